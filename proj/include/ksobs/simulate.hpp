#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "ksobs/design.hpp"
#include "ksobs/spectral.hpp"

namespace ksobs {

struct ScheduleSpec {
  enum class Kind { kUniform, kJittered, kExplicit } kind = Kind::kUniform;
  double T = 0.0;                     // uniform period / jitter upper gap
  std::vector<double> times;          // explicit instants, starting at 0
};

// Realized sampling instants covering [0, horizon]: the list starts at 0 and
// ends at the first instant >= horizon, so every time in the window lies in
// a realized inter-sample interval.  Jittered gaps are uniform in [0.2 T, T].
std::vector<double> realize_schedule(const ScheduleSpec& spec, double horizon,
                                     std::uint64_t seed);

struct NoiseSpec {
  enum class Kind { kNone, kConstant, kUniform, kSinusoid } kind = Kind::kNone;
  double bound = 0.0;   // constant value / uniform half-width
  double amp = 0.0;     // sinusoid amplitude
  double freq = 0.0;    // sinusoid angular frequency
  double phase = 0.0;
  bool stochastic() const { return kind == Kind::kUniform; }
  double declared_bound() const {
    return kind == Kind::kSinusoid ? std::abs(amp) : std::abs(bound);
  }
};

// Separable forcing f(t, x) = g(t) h(x); h is stored modally.  g must be
// constant between propagation events; a sinusoidal g is averaged per
// interval (a warning is emitted once).
struct TimeSignal {
  enum class Kind { kConstant, kSteps, kSinusoid } kind = Kind::kConstant;
  double value = 0.0;
  std::vector<double> times;   // step breakpoints (ascending)
  std::vector<double> values;  // value on [times[i], times[i+1])
  double amp = 0.0, freq = 0.0, phase = 0.0;
};

struct ForcingSpec {
  bool zero = true;
  Eigen::VectorXd space;  // modal coefficients of h, any length
  TimeSignal time;
};

struct SimOptions {
  int M_sim = 64;
  double horizon = 1.0;
  double record_dt = 0.01;
  double r = 0.0;  // predictor tuning parameter
  ScheduleSpec schedule;
  NoiseSpec noise;
  ForcingSpec forcing;
  std::uint64_t seed = 0;
  bool has_seed = false;
  bool fast_path = false;  // finite-dimensional observer (head modes + w)
};

struct TraceRecord {
  double t = 0.0;
  double l2 = 0.0;        // ||e||
  double d2 = 0.0;        // ||e_xx||
  double d4 = 0.0;        // ||e_xxxx||
  double pred_err = 0.0;  // |w - <Gc, u>|
  double xi_sup = 0.0;    // running sup of |xi| over samples so far
  bool is_sample = false;
};

struct HybridTrace {
  std::vector<TraceRecord> records;
  SpatialNorms e0;
  int N = 0;
  int M_sim = 0;
  double max_gap = 0.0;  // largest realized sampling gap
  Eigen::VectorXd a_final, ahat_final;
  double w_final = 0.0;
};

// Predictor re-initialization at a sampling instant:
//   w = y + <(G - I) c, u_hat> = y - sum_{n > N} c_n ahat_n.
double predictor_reset(const Eigen::VectorXd& c_full, int N, double y,
                       const Eigen::VectorXd& ahat);

// Exact propagation over one inter-event interval with frozen forcing.
// Decoupled modes use the diagonal variation-of-constants formula; the
// coupled block (ahat_0..ahat_N, w) uses one augmented matrix exponential.
class Propagator {
 public:
  Propagator(const Design& d, const Eigen::VectorXd& L,
             const Eigen::VectorXd& c_full, double r, int M_sim);

  void step(Eigen::VectorXd& a, Eigen::VectorXd& ahat, double& w, double dt,
            const Eigen::VectorXd& f_modal, bool observer_tail) const;

  const Eigen::VectorXd& mu_full() const { return mu_full_; }
  const Eigen::MatrixXd& coupled_block() const { return B_; }

 private:
  int N_, M_;
  Eigen::VectorXd c_full_, mu_full_;
  Eigen::MatrixXd B_;  // [[A + L C, -L], [C (A + r I), -r]]
};

// Runs the hybrid simulation.  Initial conditions are modal (shorter
// vectors are zero-padded to M_sim + 1).  The kernel must agree with the
// design on the first N+1 coefficients.
HybridTrace run(const Design& d, const Eigen::VectorXd& L,
                const Eigen::VectorXd& c_full, const Eigen::VectorXd& ic_plant,
                const Eigen::VectorXd& ic_observer, const SimOptions& opt);

// Batch driver used by the sweep/Monte-Carlo style workloads; runs are
// independent and execute in parallel.  The serial variant is the reference.
std::vector<HybridTrace> run_batch(const Design& d, const Eigen::VectorXd& L,
                                   const Eigen::VectorXd& c_full,
                                   const std::vector<Eigen::VectorXd>& ic_plant,
                                   const std::vector<Eigen::VectorXd>& ic_obs,
                                   const std::vector<SimOptions>& opts);
std::vector<HybridTrace> run_batch_serial(
    const Design& d, const Eigen::VectorXd& L, const Eigen::VectorXd& c_full,
    const std::vector<Eigen::VectorXd>& ic_plant,
    const std::vector<Eigen::VectorXd>& ic_obs,
    const std::vector<SimOptions>& opts);

}  // namespace ksobs
