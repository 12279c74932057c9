#include "ksobs/certify.hpp"

#include <cmath>
#include <limits>

#include "ksobs/errors.hpp"
#include "ksobs/parallel.hpp"

namespace ksobs {
namespace {

double k_norm_at(const Design& d, double r) {
  return ((d.mu.array() + r) * d.c.array()).matrix().norm();
}

// h(sigma) from the small-gain feasibility condition.
double h_of_sigma(double sigma, double Z, double r, double T) {
  return sigma +
         Z * std::exp(std::max(0.0, sigma - r) * T) *
             interval_integral(r - sigma, T);
}

double golden_max_r(const std::function<double(double)>& g, double a,
                    double b) {
  const double inv_phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
  double g1 = g(x1), g2 = g(x2);
  while (b - a > 1e-10) {
    if (g1 < g2) {
      a = x1;
      x1 = x2;
      g1 = g2;
      x2 = a + inv_phi * (b - a);
      g2 = g(x2);
    } else {
      b = x2;
      x2 = x1;
      g2 = g1;
      x1 = b - inv_phi * (b - a);
      g1 = g(x1);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

double interval_integral(double x, double T) {
  const double z = x * T;
  if (std::abs(z) < 1e-8) return T * (1.0 + z / 2.0 + z * z / 6.0);
  return std::expm1(z) / x;
}

double compute_Z(const Design& d, const Eigen::VectorXd& L,
                 const DecayEnvelope& env, double r) {
  return env.R * L.norm() * k_norm_at(d, r);
}

double masp_condition_lhs(double Z, double r, double T) {
  return Z * std::exp(std::max(0.0, -r) * T) * interval_integral(r, T);
}

double masp_closed_form(const Design& d, const Eigen::VectorXd& L,
                        const DecayEnvelope& env, double r) {
  const double Z = compute_Z(d, L, env, r);
  if (Z == 0.0) return std::numeric_limits<double>::infinity();
  if (r == 0.0) return env.omega / Z;
  const double ar = std::abs(r);
  return std::log1p(env.omega * ar / Z) / ar;
}

double masp_bisection(const Design& d, const Eigen::VectorXd& L,
                      const DecayEnvelope& env, double r, double rel_tol) {
  const double Z = compute_Z(d, L, env, r);
  if (Z == 0.0) return std::numeric_limits<double>::infinity();
  const auto feasible = [&](double T) {
    return masp_condition_lhs(Z, r, T) < env.omega;
  };
  double lo = 0.0, hi = 1e-6;
  int guard = 0;
  while (feasible(hi) && ++guard < 200) {
    lo = hi;
    hi *= 2.0;
  }
  while (hi - lo > rel_tol * hi) {
    const double mid = 0.5 * (lo + hi);
    (feasible(mid) ? lo : hi) = mid;
  }
  return lo;
}

MaspCurve masp_curve_serial(const Design& d, const Eigen::VectorXd& L,
                            const DecayEnvelope& env, double r_lo, double r_hi,
                            double r_step) {
  if (!(r_step > 0.0) || !(r_hi >= r_lo))
    throw std::invalid_argument("masp_curve: bad grid");
  const int n = static_cast<int>(std::floor((r_hi - r_lo) / r_step + 0.5)) + 1;
  MaspCurve curve;
  curve.r.resize(n);
  curve.t_max.resize(n);
  for (int i = 0; i < n; ++i) {
    curve.r[i] = r_lo + i * r_step;
    curve.t_max[i] = masp_closed_form(d, L, env, curve.r[i]);
  }
  return curve;
}

MaspCurve masp_curve(const Design& d, const Eigen::VectorXd& L,
                     const DecayEnvelope& env, double r_lo, double r_hi,
                     double r_step) {
  if (!(r_step > 0.0) || !(r_hi >= r_lo))
    throw std::invalid_argument("masp_curve: bad grid");
  const int n = static_cast<int>(std::floor((r_hi - r_lo) / r_step + 0.5)) + 1;
  MaspCurve curve;
  curve.r.resize(n);
  curve.t_max.resize(n);
  parallel_for(n, [&](std::ptrdiff_t i) {
    curve.r[i] = r_lo + i * r_step;
    curve.t_max[i] = masp_closed_form(d, L, env, curve.r[i]);
  });
  return curve;
}

MaspOptimum optimize_r(const Design& d, const Eigen::VectorXd& L,
                       const DecayEnvelope& env, double r_lo, double r_hi,
                       double r_step) {
  const MaspCurve curve = masp_curve(d, L, env, r_lo, r_hi, r_step);
  int best = 0;
  for (int i = 1; i < static_cast<int>(curve.r.size()); ++i)
    if (curve.t_max[i] > curve.t_max[best]) best = i;
  const double a = best > 0 ? curve.r[best - 1] : curve.r[best];
  const double b = best + 1 < static_cast<int>(curve.r.size())
                       ? curve.r[best + 1]
                       : curve.r[best];
  MaspOptimum opt;
  if (a == b) {
    opt.r_star = curve.r[best];
  } else {
    opt.r_star = golden_max_r(
        [&](double r) { return masp_closed_form(d, L, env, r); }, a, b);
  }
  opt.t_max_star = masp_closed_form(d, L, env, opt.r_star);
  return opt;
}

IOSCertificate ios_certificate(const Design& d, const Eigen::VectorXd& L,
                               const DecayEnvelope& env, double r, double T) {
  if (!(T > 0.0)) throw FeasibilityError("ios_certificate: T must be > 0");
  IOSCertificate cert;
  cert.r = r;
  cert.T = T;
  cert.R = env.R;
  cert.omega = env.omega;
  cert.L_norm = L.norm();
  cert.k_norm = k_norm_at(d, r);
  const double Z = env.R * cert.L_norm * cert.k_norm;
  if (!(masp_condition_lhs(Z, r, T) < env.omega)) {
    throw FeasibilityError(
        "ios_certificate: T = " + std::to_string(T) +
        " violates the sampling condition (T_max = " +
        std::to_string(masp_closed_form(d, L, env, r)) + ")");
  }

  const double cap = std::min(env.omega * (1.0 - 1e-6), -d.mu_next());
  const double margin = env.omega - 1e-9;
  const auto feasible = [&](double s) {
    return h_of_sigma(s, Z, r, T) <= margin;
  };

  // h need not be monotone in sigma, so locate the last feasible cell of a
  // coarse grid before refining with bisection.
  const int kCells = 10000;
  int last = -1;
  for (int i = kCells; i >= 1; --i) {
    if (feasible(cap * i / kCells)) {
      last = i;
      break;
    }
  }
  double sigma;
  if (last == kCells) {
    sigma = cap;
  } else {
    double lo, hi;
    if (last >= 1) {
      lo = cap * last / kCells;
      hi = cap * (last + 1) / kCells;
    } else if (feasible(std::numeric_limits<double>::min())) {
      lo = 0.0;  // refined below; the result stays strictly positive
      hi = cap / kCells;
    } else {
      throw FeasibilityError(
          "ios_certificate: no feasible sigma; h(0+) = " +
          std::to_string(Z * std::exp(std::max(0.0, -r) * T) *
                         interval_integral(r, T)) +
          " vs omega = " + std::to_string(env.omega));
    }
    while (hi - lo > 1e-10) {
      const double mid = 0.5 * (lo + hi);
      (feasible(mid) ? lo : hi) = mid;
    }
    sigma = lo;
  }
  cert.sigma = sigma;
  cert.K = cert.k_norm * std::exp(std::max(0.0, sigma - r) * T) *
           interval_integral(r - sigma, T);
  cert.gain = cert.K * env.R * cert.L_norm / (env.omega - sigma);
  const double amp = 1.0 / (1.0 - cert.gain);
  cert.gamma =
      amp * (env.R * cert.L_norm / env.omega) * std::exp(std::max(0.0, -r) * T);
  cert.M_const =
      1.0 + amp * env.R *
                (1.0 + cert.L_norm / (env.omega - sigma) *
                           d.tail_kernel_norm() *
                           std::exp(std::max(0.0, -r - d.mu_next()) * T));
  if (!std::isfinite(cert.gamma) || !std::isfinite(cert.M_const))
    throw NumericError("ios_certificate: certificate constants overflowed");
  return cert;
}

void bound_envelopes(const IOSCertificate& cert, const SpatialNorms& e0, int N,
                     double t, double xi_sup, double rhs[3]) {
  const double w2 = lambda_n(N);  // N^2 pi^2
  const double w4 = w2 * w2;
  const double decay = std::exp(-cert.sigma * t);
  rhs[0] = cert.M_const * decay * e0.l2 + cert.gamma * xi_sup;
  rhs[1] = w2 * (cert.M_const - 1.0) * decay * e0.l2 + decay * e0.d2 +
           cert.gamma * w2 * xi_sup;
  rhs[2] = w4 * (cert.M_const - 1.0) * decay * e0.l2 + decay * e0.d4 +
           cert.gamma * w4 * xi_sup;
}

BoundsReport verify_bounds(const HybridTrace& trace,
                           const IOSCertificate& cert) {
  BoundsReport rep;
  for (int b = 0; b < 3; ++b) {
    rep.min_slack[b] = std::numeric_limits<double>::infinity();
    rep.max_slack[b] = -std::numeric_limits<double>::infinity();
  }
  double sum_t = 0, sum_tt = 0, sum_y = 0, sum_ty = 0;
  long n_fit = 0;

  for (const TraceRecord& rec : trace.records) {
    double rhs[3];
    bound_envelopes(cert, trace.e0, trace.N, rec.t, rec.xi_sup, rhs);
    const double lhs[3] = {rec.l2, rec.d2, rec.d4};
    for (int b = 0; b < 3; ++b) {
      const double slack = rhs[b] - lhs[b];
      rep.min_slack[b] = std::min(rep.min_slack[b], slack);
      rep.max_slack[b] = std::max(rep.max_slack[b], slack);
      if (lhs[b] > rhs[b] + 1e-9 * std::max(1.0, rhs[b])) ++rep.violations[b];
    }
    if (rec.l2 > 0.0) {
      const double y = std::log(rec.l2);
      sum_t += rec.t;
      sum_tt += rec.t * rec.t;
      sum_y += y;
      sum_ty += rec.t * y;
      ++n_fit;
    }
  }
  if (n_fit >= 2 && sum_tt * n_fit - sum_t * sum_t > 0.0) {
    const double slope =
        (n_fit * sum_ty - sum_t * sum_y) / (n_fit * sum_tt - sum_t * sum_t);
    rep.fitted_rate = -slope;
  } else {
    rep.fitted_rate = std::numeric_limits<double>::infinity();
  }
  return rep;
}

}  // namespace ksobs
