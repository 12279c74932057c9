#pragma once

#include <Eigen/Dense>
#include <vector>

#include "ksobs/design.hpp"
#include "ksobs/simulate.hpp"

namespace ksobs {

// exp(max(0, -r) T) * integral_0^T e^{r s} ds < omega is the sampling-period
// condition; Z collects the constant factor R |L| |C (A + r I)|.
double compute_Z(const Design& d, const Eigen::VectorXd& L,
                 const DecayEnvelope& env, double r);

// integral_0^T e^{x s} ds, with a series at the removable singularity.
double interval_integral(double x, double T);

// Left side of the sampling condition divided by Z's omega comparison:
// Z exp(max(0,-r) T) integral_0^T e^{r s} ds.
double masp_condition_lhs(double Z, double r, double T);

// Closed-form maximum allowable sampling period:
//   r != 0: ln(omega |r| / Z + 1) / |r|;  r = 0: omega / Z.
double masp_closed_form(const Design& d, const Eigen::VectorXd& L,
                        const DecayEnvelope& env, double r);

// Numeric cross-check: bisection on the strict condition.
double masp_bisection(const Design& d, const Eigen::VectorXd& L,
                      const DecayEnvelope& env, double r,
                      double rel_tol = 1e-12);

struct MaspCurve {
  std::vector<double> r;
  std::vector<double> t_max;
};

// T_max over an r grid; embarrassingly parallel over grid points.  The
// serial variant is the reference implementation.
MaspCurve masp_curve(const Design& d, const Eigen::VectorXd& L,
                     const DecayEnvelope& env, double r_lo, double r_hi,
                     double r_step);
MaspCurve masp_curve_serial(const Design& d, const Eigen::VectorXd& L,
                            const DecayEnvelope& env, double r_lo, double r_hi,
                            double r_step);

struct MaspOptimum {
  double r_star = 0.0;
  double t_max_star = 0.0;
};

// Grid scan followed by golden-section refinement around the argmax.
MaspOptimum optimize_r(const Design& d, const Eigen::VectorXd& L,
                       const DecayEnvelope& env, double r_lo, double r_hi,
                       double r_step);

struct IOSCertificate {
  double r = 0.0, T = 0.0;
  double sigma = 0.0;    // certified decay rate
  double K = 0.0;        // sampling-loop gain factor
  double gamma = 0.0;    // noise-to-error gain
  double M_const = 1.0;  // overshoot constant
  double gain = 0.0;     // small-gain product K R |L| / (omega - sigma) < 1
  double R = 1.0, omega = 0.0;
  double L_norm = 0.0, k_norm = 0.0;
};

// Small-gain certificate for a feasible (r, T): picks the largest decay rate
// sigma in (0, min(omega (1 - 1e-6), -mu_{N+1})] satisfying
//   h(sigma) = sigma + Z exp(max(0, sigma - r) T) integral_0^T e^{(r-sigma)s} ds
//            <= omega - 1e-9
// by a coarse scan plus bisection, then assembles K, gamma and M.
IOSCertificate ios_certificate(const Design& d, const Eigen::VectorXd& L,
                               const DecayEnvelope& env, double r, double T);

struct BoundsReport {
  long violations[3] = {0, 0, 0};      // bounds on ||e||, ||e_xx||, ||e_xxxx||
  double min_slack[3] = {0.0, 0.0, 0.0};
  double max_slack[3] = {0.0, 0.0, 0.0};
  double fitted_rate = 0.0;            // least-squares decay of ln ||e||
  bool ok() const {
    return violations[0] == 0 && violations[1] == 0 && violations[2] == 0;
  }
};

// Right sides of the three error envelopes at time t given the initial
// error norms and the running noise sup; rhs[0..2] bound ||e||, ||e_xx||,
// ||e_xxxx||.
void bound_envelopes(const IOSCertificate& cert, const SpatialNorms& e0, int N,
                     double t, double xi_sup, double rhs[3]);

// Checks every trace record against the three theoretical envelopes
//   ||e||      <= M e^{-sigma t} ||e0||  + gamma sup|xi|
//   ||e_xx||   <= N^2 pi^2 (M-1) e^{-sigma t} ||e0|| + e^{-sigma t} ||e0_xx||
//                 + gamma N^2 pi^2 sup|xi|
//   ||e_xxxx|| <= same with N^4 pi^4 and ||e0_xxxx||
// using the running sample sup of |xi| recorded in the trace.
BoundsReport verify_bounds(const HybridTrace& trace,
                           const IOSCertificate& cert);

}  // namespace ksobs
