#include "ksobs/design.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include "ksobs/errors.hpp"
#include "ksobs/quadrature.hpp"

namespace ksobs {
namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> log_spaced(double lo, double hi, int n) {
  std::vector<double> ts(n);
  const double llo = std::log10(lo), lhi = std::log10(hi);
  for (int i = 0; i < n; ++i)
    ts[i] = std::pow(10.0, llo + (lhi - llo) * i / (n - 1));
  return ts;
}

// Golden-section maximization on [a, b] for a smooth unimodal bracket.
double golden_max(const std::function<double(double)>& g, double a, double b) {
  const double inv_phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
  double g1 = g(x1), g2 = g(x2);
  for (int it = 0; it < 80 && (b - a) > 1e-12 * (1.0 + b); ++it) {
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
  return std::max(g1, g2);
}

double spectral_abscissa(const Eigen::MatrixXd& a) {
  return Eigen::EigenSolver<Eigen::MatrixXd>(a, false)
      .eigenvalues()
      .real()
      .maxCoeff();
}

}  // namespace

double Design::tail_kernel_norm() const {
  const double head = c.squaredNorm();
  // Guard against cancellation when the kernel lives entirely in the span.
  return std::sqrt(std::max(0.0, c_norm_sq - head));
}

double Design::mu_next() const { return modal_eigenvalue(N + 1, q); }

static Design make_design_common(double q, int N) {
  if (N < 0) throw DesignError("build_design: N must be >= 0");
  const double lam_next = lambda_n(N + 1);
  if (!(lam_next > q)) {
    throw DesignError("build_design: (N+1)^2 pi^2 = " +
                      std::to_string(lam_next) + " must exceed q = " +
                      std::to_string(q));
  }
  Design d;
  d.q = q;
  d.N = N;
  d.mu.resize(N + 1);
  for (int n = 0; n <= N; ++n) d.mu[n] = modal_eigenvalue(n, q);
  return d;
}

Design build_design(double q, int N, const Profile& kernel, double quad_tol) {
  Design d = make_design_common(q, N);
  d.c = project(kernel, N, quad_tol);
  d.c_norm_sq =
      integrate([&kernel](double x) { return kernel(x) * kernel(x); }, 0.0,
                1.0, quad_tol);
  return d;
}

Design build_design(double q, int N, const Eigen::VectorXd& kernel_coeffs) {
  Design d = make_design_common(q, N);
  d.c = Eigen::VectorXd::Zero(N + 1);
  const int m = static_cast<int>(std::min<Eigen::Index>(
      kernel_coeffs.size(), N + 1));
  d.c.head(m) = kernel_coeffs.head(m);
  d.c_norm_sq = kernel_coeffs.squaredNorm();
  return d;
}

AssumptionReport check_assumption_b(const Design& d, double tol) {
  AssumptionReport rep;
  for (int n = 0; n <= d.N; ++n) {
    for (int m = n + 1; m <= d.N; ++m) {
      const double resonance = (n * n + m * m) * kPi * kPi;
      if (std::abs(d.q - resonance) <= tol) {
        rep.ok = false;
        rep.detail = "q = (" + std::to_string(n) + "^2 + " +
                     std::to_string(m) + "^2) pi^2 (resonant pair)";
        return rep;
      }
    }
  }
  for (int n = 0; n <= d.N; ++n) {
    if (std::abs(d.c[n]) <= tol) {
      rep.ok = false;
      rep.detail = "kernel coefficient c_" + std::to_string(n) + " vanishes";
      return rep;
    }
  }
  return rep;
}

double observability_determinant(const Design& d) {
  // Vandermonde product form: exact up to rounding even when the mu span
  // many orders of magnitude (the raw determinant is not).
  double det = 1.0;
  for (int j = 0; j <= d.N; ++j) {
    det *= d.c[j];
    for (int i = 0; i < j; ++i) det *= d.mu[j] - d.mu[i];
  }
  return det;
}

Eigen::VectorXd place_gain(const Design& d, const std::vector<double>& poles) {
  const int n = d.N + 1;
  if (static_cast<int>(poles.size()) != n)
    throw DesignError("place_gain: need exactly N+1 poles");
  for (double p : poles)
    if (!(p < 0.0))
      throw DesignError("place_gain: poles must have negative real part");
  for (std::size_t i = 0; i < poles.size(); ++i)
    for (std::size_t j = i + 1; j < poles.size(); ++j)
      if (poles[i] == poles[j])
        throw DesignError("place_gain: poles must be distinct");
  const double det = observability_determinant(d);
  if (det == 0.0)
    throw DesignError("place_gain: singular observability matrix, det = " +
                      std::to_string(det));

  // Ackermann on the dual pair, L = -p(A) Obs^{-1} e_N, evaluated in closed
  // form: A is diagonal, so Obs = W diag(c) with W the moment matrix of the
  // mu, and (W^{-1} e_N)_k are the Lagrange leading coefficients.  Grouping
  // the factors as ratios keeps every intermediate O(1) even for stiff mu.
  Eigen::VectorXd L(n);
  for (int k = 0; k < n; ++k) {
    double v = -1.0 / d.c[k];
    int i = 0;
    for (int m = 0; m < n; ++m) {
      if (m == k) continue;
      v *= (d.mu[k] - poles[i++]) / (d.mu[k] - d.mu[m]);
    }
    L[k] = v * (d.mu[k] - poles[i]);
  }
  return L;
}

double spectral_norm(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  return Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues()(0);
}

Eigen::MatrixXd matrix_exponential(const Eigen::MatrixXd& m, double t) {
  if (m.rows() != m.cols())
    throw NumericError("matrix_exponential: matrix must be square");
  const Eigen::MatrixXd result = (m * t).exp();
  if (!result.allFinite())
    throw NumericError("matrix_exponential: non-finite result, |A| t = " +
                       std::to_string(spectral_norm(m) * t));
  return result;
}

Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& a,
                               const Eigen::MatrixXd& q) {
  const int n = static_cast<int>(a.rows());
  const Eigen::MatrixXd at = a.transpose();
  Eigen::MatrixXd sys = Eigen::MatrixXd::Zero(n * n, n * n);
  // vec(A^T P) = (I kron A^T) vec(P); vec(P A) = (A^T kron I) vec(P).
  for (int j = 0; j < n; ++j) sys.block(j * n, j * n, n, n) += at;
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      sys.block(j * n, k * n, n, n).diagonal().array() += at(j, k);
  Eigen::VectorXd rhs(n * n);
  for (int j = 0; j < n; ++j) rhs.segment(j * n, n) = -q.col(j);
  const Eigen::VectorXd vec_p = sys.partialPivLu().solve(rhs);
  Eigen::MatrixXd p(n, n);
  for (int j = 0; j < n; ++j) p.col(j) = vec_p.segment(j * n, n);
  return 0.5 * (p + p.transpose());
}

EnvelopeCheck validate_envelope(const Eigen::MatrixXd& a_cl,
                                const DecayEnvelope& env, int n_samples) {
  EnvelopeCheck chk;
  chk.worst_excess = -env.R;
  for (double t : log_spaced(1e-4, 50.0, n_samples)) {
    const double v =
        spectral_norm(matrix_exponential(a_cl, t)) * std::exp(env.omega * t) -
        env.R;
    if (v > chk.worst_excess) {
      chk.worst_excess = v;
      chk.worst_t = t;
    }
  }
  chk.ok = chk.worst_excess <= 1e-9 * std::max(1.0, env.R);
  return chk;
}

DecayEnvelope decay_envelope(const Eigen::MatrixXd& a_cl,
                             EnvelopeStrategy strategy, double user_R,
                             double user_omega) {
  const double abscissa = spectral_abscissa(a_cl);
  if (!(abscissa < 0.0))
    throw DesignError("decay_envelope: closed loop is not Hurwitz, max Re = " +
                      std::to_string(abscissa));

  if (strategy == EnvelopeStrategy::kUser) {
    DecayEnvelope env{user_R, user_omega};
    if (!(env.R >= 1.0) || !(env.omega > 0.0))
      throw DesignError("decay_envelope: user pair needs R >= 1, omega > 0");
    const EnvelopeCheck chk = validate_envelope(a_cl, env);
    if (!chk.ok)
      throw DesignError("decay_envelope: user pair violated at t = " +
                        std::to_string(chk.worst_t) + " by " +
                        std::to_string(chk.worst_excess));
    return env;
  }

  DecayEnvelope env;
  env.omega = 0.9 * (-abscissa);
  if (strategy == EnvelopeStrategy::kLyapunov) {
    const int n = static_cast<int>(a_cl.rows());
    const Eigen::MatrixXd shifted =
        a_cl + env.omega * Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd p =
        solve_lyapunov(shifted, Eigen::MatrixXd::Identity(n, n));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(p);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    if (!(lo > 0.0))
      throw NumericError("decay_envelope: Lyapunov solution not positive");
    env.R = std::sqrt(hi / lo);
    return env;
  }

  // Sampled: measure sup_t |exp(At)| e^{omega t}, refine the peak, then put
  // a 1% safety factor on top to cover between-sample excursions.
  const auto g = [&](double t) {
    return spectral_norm(matrix_exponential(a_cl, t)) * std::exp(env.omega * t);
  };
  const std::vector<double> ts = log_spaced(1e-4, 50.0, 400);
  double sup = 1.0;  // t = 0 gives |I| = 1
  int argmax = -1;
  for (int i = 0; i < static_cast<int>(ts.size()); ++i) {
    const double v = g(ts[i]);
    if (v > sup) {
      sup = v;
      argmax = i;
    }
  }
  if (argmax >= 0) {
    const double a = argmax > 0 ? ts[argmax - 1] : 0.0;
    const double b = argmax + 1 < static_cast<int>(ts.size())
                         ? ts[argmax + 1]
                         : ts.back();
    sup = std::max(sup, golden_max(g, a, b));
  }
  env.R = 1.01 * sup;
  return env;
}

double monotonicity_shift(const Design& d, const Eigen::VectorXd& L,
                          double r) {
  const double phi_norm = L.norm();
  const double k_norm =
      ((d.mu.array() + r) * d.c.array()).matrix().norm();
  const double gc_norm = d.c.norm();
  return 0.5 * (phi_norm + k_norm) +
         std::max(gc_norm * phi_norm + 0.5 * d.q * d.q, -r);
}

void save_design(const Design& d, const Eigen::VectorXd& L,
                 const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_design: cannot write " + path);
  char buf[64];
  const auto put = [&](const std::string& key, double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << key << " = " << buf << "\n";
  };
  out << "design.N = " << d.N << "\n";
  put("design.q", d.q);
  put("design.c_norm_sq", d.c_norm_sq);
  for (int n = 0; n <= d.N; ++n) put("design.mu." + std::to_string(n), d.mu[n]);
  for (int n = 0; n <= d.N; ++n) put("design.c." + std::to_string(n), d.c[n]);
  for (int n = 0; n < L.size(); ++n)
    put("design.L." + std::to_string(n), L[n]);
}

std::pair<Design, Eigen::VectorXd> load_design(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_design: cannot read " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  Design d;
  d.N = std::stoi(kv.at("design.N"));
  d.q = std::stod(kv.at("design.q"));
  d.c_norm_sq = std::stod(kv.at("design.c_norm_sq"));
  d.mu.resize(d.N + 1);
  d.c.resize(d.N + 1);
  for (int n = 0; n <= d.N; ++n) {
    d.mu[n] = std::stod(kv.at("design.mu." + std::to_string(n)));
    d.c[n] = std::stod(kv.at("design.c." + std::to_string(n)));
  }
  Eigen::VectorXd L;
  std::vector<double> ls;
  for (int n = 0; kv.count("design.L." + std::to_string(n)); ++n)
    ls.push_back(std::stod(kv.at("design.L." + std::to_string(n))));
  L = Eigen::Map<Eigen::VectorXd>(ls.data(), ls.size());
  return {d, L};
}

}  // namespace ksobs
