#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "ksobs/spectral.hpp"

namespace ksobs {

// Modal design data for the observer: the first N+1 modes of the plant and
// of the output kernel c.
struct Design {
  double q = 0.0;
  int N = 0;
  Eigen::VectorXd mu;         // mu_0..mu_N
  Eigen::VectorXd c;          // kernel coefficients c_0..c_N
  double c_norm_sq = 0.0;     // ||c||^2 in L2(0,1), for the tail norm

  Eigen::MatrixXd A() const { return mu.asDiagonal(); }
  Eigen::RowVectorXd C() const { return c.transpose(); }
  // ||(I-G)c|| via Parseval: tail energy of the kernel.
  double tail_kernel_norm() const;
  double mu_next() const;  // mu_{N+1}, the fastest untracked mode
};

struct AssumptionReport {
  bool ok = true;
  std::string detail;  // first violated clause when !ok
};

// Builds the modal design.  Requires (N+1)^2 pi^2 > q so that every
// untracked mode is strictly stable.
Design build_design(double q, int N, const Profile& kernel,
                    double quad_tol = 1e-12);
// Kernel given directly by modal coefficients (entries beyond the list are
// zero; the list may be longer than N+1).
Design build_design(double q, int N, const Eigen::VectorXd& kernel_coeffs);

// Sufficient observability condition: q away from every resonance
// (n^2 + m^2) pi^2 for 0 <= n < m <= N, and c_n != 0 for all n <= N.
AssumptionReport check_assumption_b(const Design& d, double tol = 1e-9);

// det [C; CA; ...; CA^N]; nonzero iff the modal pair is observable.
double observability_determinant(const Design& d);

// Output-injection gain L with eig(A + L C) equal to the desired poles
// (distinct negative reals), via Ackermann on the dual pair.
Eigen::VectorXd place_gain(const Design& d, const std::vector<double>& poles);

// Largest singular value.
double spectral_norm(const Eigen::MatrixXd& m);

// exp(M t) by scaling-and-squaring Pade; rejects non-finite results.
Eigen::MatrixXd matrix_exponential(const Eigen::MatrixXd& m, double t);

// Solves A^T P + P A = -Q for symmetric P (Kronecker form; the matrices
// here never exceed a few rows).
Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& a,
                               const Eigen::MatrixXd& q);

// Certified decay pair: |exp(A_cl t)| <= R e^{-omega t} for all t >= 0.
struct DecayEnvelope {
  double R = 1.0;
  double omega = 0.0;
};

enum class EnvelopeStrategy { kLyapunov, kSampled, kUser };

struct EnvelopeCheck {
  bool ok = true;
  double worst_excess = 0.0;  // max of |exp(At)| e^{omega t} - R over samples
  double worst_t = 0.0;
};

// Samples |exp(A t)| e^{omega t} at n log-spaced points in [1e-4, 50]; the
// pair passes when no sample exceeds R by more than a 1e-9 relative slack.
EnvelopeCheck validate_envelope(const Eigen::MatrixXd& a_cl,
                                const DecayEnvelope& env, int n_samples = 200);

// Produces a valid envelope for a Hurwitz closed loop.  kLyapunov solves a
// shifted Lyapunov equation (R = sqrt(cond P)); kSampled measures the sup
// directly with a 1% safety factor; kUser validates the supplied pair.
DecayEnvelope decay_envelope(const Eigen::MatrixXd& a_cl,
                             EnvelopeStrategy strategy, double user_R = 0.0,
                             double user_omega = 0.0);

// Lower bound on the required exponential shift from the monotone-system
// transformation: (||phi|| + ||k||)/2 + max(||Gc|| ||phi|| + q^2/2, -r).
double monotonicity_shift(const Design& d, const Eigen::VectorXd& L, double r);

// Key-value serialization (17 significant digits, exact double round-trip).
void save_design(const Design& d, const Eigen::VectorXd& L,
                 const std::string& path);
std::pair<Design, Eigen::VectorXd> load_design(const std::string& path);

}  // namespace ksobs
