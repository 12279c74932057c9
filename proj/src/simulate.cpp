#include "ksobs/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>

#include "ksobs/errors.hpp"
#include "ksobs/parallel.hpp"

namespace ksobs {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Independent deterministic substreams from one master seed.
std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double u01(std::mt19937_64& g) {
  return (g() >> 11) * 0x1.0p-53;  // uniform in [0, 1)
}

// (e^z - 1) / z without cancellation; the z -> 0 limit is 1.
double phi1(double z) {
  if (z == 0.0) return 1.0;
  return std::expm1(z) / z;
}

Eigen::VectorXd pad_modal(const Eigen::VectorXd& v, int M,
                          const char* what) {
  if (v.size() > M + 1)
    throw std::invalid_argument(std::string(what) +
                                ": more modal coefficients than M_sim + 1");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(M + 1);
  out.head(v.size()) = v;
  return out;
}

// Per-interval value of the time factor g on [t0, t1).
double signal_value(const TimeSignal& sig, double t0, double t1,
                    bool* warned) {
  switch (sig.kind) {
    case TimeSignal::Kind::kConstant:
      return sig.value;
    case TimeSignal::Kind::kSteps: {
      const auto it =
          std::upper_bound(sig.times.begin(), sig.times.end(), t0);
      const auto idx = static_cast<std::size_t>(it - sig.times.begin());
      return idx == 0 ? 0.0 : sig.values[idx - 1];
    }
    case TimeSignal::Kind::kSinusoid: {
      if (!*warned) {
        std::fprintf(stderr,
                     "warning: sinusoidal forcing factor averaged per "
                     "propagation interval\n");
        *warned = true;
      }
      if (t1 <= t0 || sig.freq == 0.0)
        return sig.amp * std::sin(sig.freq * t0 + sig.phase);
      return sig.amp *
             (std::cos(sig.freq * t0 + sig.phase) -
              std::cos(sig.freq * t1 + sig.phase)) /
             (sig.freq * (t1 - t0));
    }
  }
  return 0.0;
}

double next_breakpoint(const TimeSignal& sig, double t) {
  if (sig.kind != TimeSignal::Kind::kSteps) return kInf;
  const auto it = std::upper_bound(sig.times.begin(), sig.times.end(), t);
  return it == sig.times.end() ? kInf : *it;
}

}  // namespace

std::vector<double> realize_schedule(const ScheduleSpec& spec, double horizon,
                                     std::uint64_t seed) {
  if (!(horizon > 0.0))
    throw std::invalid_argument("realize_schedule: horizon must be > 0");
  std::vector<double> times;
  switch (spec.kind) {
    case ScheduleSpec::Kind::kUniform: {
      if (!(spec.T > 0.0))
        throw std::invalid_argument("realize_schedule: T must be > 0");
      for (long j = 0;; ++j) {
        times.push_back(j * spec.T);
        if (times.back() >= horizon) break;
      }
      break;
    }
    case ScheduleSpec::Kind::kJittered: {
      if (!(spec.T > 0.0))
        throw std::invalid_argument("realize_schedule: T must be > 0");
      std::mt19937_64 rng(splitmix64(seed ^ 0x5c5c5c5c5c5c5c5cULL));
      double t = 0.0;
      times.push_back(0.0);
      while (t < horizon) {
        t += spec.T * (0.2 + 0.8 * u01(rng));
        times.push_back(t);
      }
      break;
    }
    case ScheduleSpec::Kind::kExplicit: {
      if (spec.times.empty() || spec.times.front() != 0.0)
        throw std::invalid_argument(
            "realize_schedule: explicit schedule must start at t = 0");
      for (std::size_t i = 1; i < spec.times.size(); ++i)
        if (!(spec.times[i] > spec.times[i - 1]))
          throw std::invalid_argument(
              "realize_schedule: sampling instants must increase strictly");
      if (spec.times.back() < horizon)
        throw std::invalid_argument(
            "realize_schedule: schedule exhausted before horizon");
      for (double t : spec.times) {
        times.push_back(t);
        if (t >= horizon) break;
      }
      break;
    }
  }
  return times;
}

double predictor_reset(const Eigen::VectorXd& c_full, int N, double y,
                       const Eigen::VectorXd& ahat) {
  double tail = 0.0;
  for (Eigen::Index n = N + 1; n < c_full.size(); ++n)
    tail += c_full[n] * ahat[n];
  return y - tail;
}

Propagator::Propagator(const Design& d, const Eigen::VectorXd& L,
                       const Eigen::VectorXd& c_full, double r, int M_sim)
    : N_(d.N), M_(M_sim), c_full_(c_full) {
  if (L.size() != d.N + 1)
    throw std::invalid_argument("Propagator: gain length mismatch");
  if (c_full.size() != M_sim + 1)
    throw std::invalid_argument("Propagator: kernel length must be M_sim + 1");
  if ((c_full.head(d.N + 1) - d.c).lpNorm<Eigen::Infinity>() > 1e-12)
    throw std::invalid_argument(
        "Propagator: kernel disagrees with design coefficients");
  mu_full_.resize(M_ + 1);
  for (int n = 0; n <= M_; ++n) mu_full_[n] = modal_eigenvalue(n, d.q);

  const int m = N_ + 2;
  B_.setZero(m, m);
  for (int n = 0; n <= N_; ++n) {
    B_(n, n) = d.mu[n];
    for (int j = 0; j <= N_; ++j) B_(n, j) += L[n] * d.c[j];
    B_(n, N_ + 1) = -L[n];
  }
  for (int j = 0; j <= N_; ++j) B_(N_ + 1, j) = (d.mu[j] + r) * d.c[j];
  B_(N_ + 1, N_ + 1) = -r;
}

void Propagator::step(Eigen::VectorXd& a, Eigen::VectorXd& ahat, double& w,
                      double dt, const Eigen::VectorXd& f_modal,
                      bool observer_tail) const {
  if (dt < 0.0) throw std::invalid_argument("Propagator::step: dt < 0");
  if (dt == 0.0) return;

  // Coupled block (ahat_0..ahat_N, w) with the frozen forcing folded into
  // one augmented exponential: exp([[B, b], [0, 0]] dt).
  const int m = N_ + 2;
  Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(m + 1, m + 1);
  aug.topLeftCorner(m, m) = B_;
  aug.col(m).head(N_ + 1) = f_modal.head(N_ + 1);
  aug(N_ + 1, m) = c_full_.head(N_ + 1).dot(f_modal.head(N_ + 1));
  const Eigen::MatrixXd E = matrix_exponential(aug, dt);

  Eigen::VectorXd z(m);
  z.head(N_ + 1) = ahat.head(N_ + 1);
  z[m - 1] = w;
  z = (E.topLeftCorner(m, m) * z + E.col(m).head(m)).eval();
  ahat.head(N_ + 1) = z.head(N_ + 1);
  w = z[m - 1];

  // Decoupled modes evolve exactly: a' = e^{mu dt} a + dt phi1(mu dt) f.
  for (int n = 0; n <= M_; ++n) {
    const double z_n = mu_full_[n] * dt;
    const double growth = std::exp(z_n);
    const double drive = dt * phi1(z_n) * f_modal[n];
    a[n] = growth * a[n] + drive;
    if (observer_tail && n > N_) ahat[n] = growth * ahat[n] + drive;
  }
}

HybridTrace run(const Design& d, const Eigen::VectorXd& L,
                const Eigen::VectorXd& c_full, const Eigen::VectorXd& ic_plant,
                const Eigen::VectorXd& ic_observer, const SimOptions& opt) {
  const int M = opt.M_sim;
  if (M < d.N + 1)
    throw std::invalid_argument("run: M_sim must be at least N + 1");
  if (!(opt.record_dt > 0.0))
    throw std::invalid_argument("run: record_dt must be > 0");

  const bool stochastic =
      opt.schedule.kind == ScheduleSpec::Kind::kJittered ||
      opt.noise.stochastic();
  if (stochastic && !opt.has_seed)
    throw std::invalid_argument("run: seed required for stochastic elements");

  Eigen::VectorXd a = pad_modal(ic_plant, M, "run: plant IC");
  Eigen::VectorXd ahat = pad_modal(ic_observer, M, "run: observer IC");
  Eigen::VectorXd f_space =
      opt.forcing.zero ? Eigen::VectorXd::Zero(M + 1)
                       : pad_modal(opt.forcing.space, M, "run: forcing");
  if (opt.fast_path) {
    if (ahat.tail(M - d.N).lpNorm<Eigen::Infinity>() > 1e-12)
      throw std::invalid_argument(
          "run: fast path requires an observer IC in the span of G");
    if (f_space.tail(M - d.N).lpNorm<Eigen::Infinity>() > 1e-12)
      throw std::invalid_argument(
          "run: fast path requires forcing in the span of G");
    ahat.tail(M - d.N).setZero();
    f_space.tail(M - d.N).setZero();
  }

  const std::vector<double> samples =
      realize_schedule(opt.schedule, opt.horizon, opt.seed);

  // Pre-drawn measurement noise, one value per sampling instant.
  std::vector<double> xi(samples.size(), 0.0);
  switch (opt.noise.kind) {
    case NoiseSpec::Kind::kNone:
      break;
    case NoiseSpec::Kind::kConstant:
      std::fill(xi.begin(), xi.end(), opt.noise.bound);
      break;
    case NoiseSpec::Kind::kUniform: {
      std::mt19937_64 rng(splitmix64(opt.seed ^ 0xa3a3a3a3a3a3a3a3ULL));
      for (double& v : xi)
        v = opt.noise.bound * (2.0 * u01(rng) - 1.0);
      break;
    }
    case NoiseSpec::Kind::kSinusoid:
      for (std::size_t j = 0; j < samples.size(); ++j)
        xi[j] = opt.noise.amp *
                std::sin(opt.noise.freq * samples[j] + opt.noise.phase);
      break;
  }

  const Propagator prop(d, L, c_full, opt.r, M);
  HybridTrace trace;
  trace.N = d.N;
  trace.M_sim = M;
  for (std::size_t j = 1; j < samples.size(); ++j)
    trace.max_gap = std::max(trace.max_gap, samples[j] - samples[j - 1]);

  double t = 0.0, w = 0.0, xi_sup = 0.0;
  bool warned = false;
  std::size_t j = 0;  // next sample index
  long k = 1;         // next record grid index

  const auto do_sample = [&] {
    xi_sup = std::max(xi_sup, std::abs(xi[j]));
    const double y = c_full.dot(a) + xi[j];
    w = predictor_reset(c_full, d.N, y, ahat);
    ++j;
  };
  const auto push_record = [&](bool is_sample) {
    TraceRecord rec;
    rec.t = t;
    const SpatialNorms n = spatial_norms(ahat - a);
    rec.l2 = n.l2;
    rec.d2 = n.d2;
    rec.d4 = n.d4;
    rec.pred_err = std::abs(w - d.c.dot(a.head(d.N + 1)));
    rec.xi_sup = xi_sup;
    rec.is_sample = is_sample;
    trace.records.push_back(rec);
  };

  do_sample();        // schedules always start at t = 0
  push_record(true);

  while (t < opt.horizon) {
    const double ts = j < samples.size() ? samples[j] : kInf;
    const double tr = k * opt.record_dt;
    const double tb =
        opt.forcing.zero ? kInf : next_breakpoint(opt.forcing.time, t);
    const double tn = std::min({ts, tr, tb, opt.horizon});

    Eigen::VectorXd f = Eigen::VectorXd::Zero(M + 1);
    if (!opt.forcing.zero)
      f = signal_value(opt.forcing.time, t, tn, &warned) * f_space;
    prop.step(a, ahat, w, tn - t, f, !opt.fast_path);
    t = tn;

    const bool is_s = (t == ts);
    const bool is_r = (t == tr);
    if (is_s) do_sample();
    if (is_r) ++k;
    if (is_s || is_r || t >= opt.horizon) push_record(is_s);
  }

  trace.e0 = {trace.records.front().l2, trace.records.front().d2,
              trace.records.front().d4};
  trace.a_final = a;
  trace.ahat_final = ahat;
  trace.w_final = w;
  return trace;
}

std::vector<HybridTrace> run_batch_serial(
    const Design& d, const Eigen::VectorXd& L, const Eigen::VectorXd& c_full,
    const std::vector<Eigen::VectorXd>& ic_plant,
    const std::vector<Eigen::VectorXd>& ic_obs,
    const std::vector<SimOptions>& opts) {
  std::vector<HybridTrace> out(opts.size());
  for (std::size_t i = 0; i < opts.size(); ++i)
    out[i] = run(d, L, c_full, ic_plant[i], ic_obs[i], opts[i]);
  return out;
}

std::vector<HybridTrace> run_batch(const Design& d, const Eigen::VectorXd& L,
                                   const Eigen::VectorXd& c_full,
                                   const std::vector<Eigen::VectorXd>& ic_plant,
                                   const std::vector<Eigen::VectorXd>& ic_obs,
                                   const std::vector<SimOptions>& opts) {
  std::vector<HybridTrace> out(opts.size());
  parallel_for(static_cast<std::ptrdiff_t>(opts.size()),
               [&](std::ptrdiff_t i) {
                 out[i] = run(d, L, c_full, ic_plant[i], ic_obs[i], opts[i]);
               });
  return out;
}

}  // namespace ksobs
