#include "ksobs/spectral.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "ksobs/parallel.hpp"
#include "ksobs/quadrature.hpp"

namespace ksobs {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kSqrt2 = std::numbers::sqrt2;
}  // namespace

double basis_eval(int n, double x) {
  if (n < 0) throw std::invalid_argument("basis_eval: n must be >= 0");
  if (n == 0) return 1.0;
  return kSqrt2 * std::cos(n * kPi * x);
}

double lambda_n(int n) { return n * n * kPi * kPi; }

double modal_eigenvalue(int n, double q) {
  if (n < 0) throw std::invalid_argument("modal_eigenvalue: n must be >= 0");
  if (n == 0) return 0.0;
  const double lam = lambda_n(n);
  return -lam * (lam - q);
}

Eigen::VectorXd project(const Profile& f, int M, double abs_tol) {
  if (M < 0) throw std::invalid_argument("project: M must be >= 0");
  Eigen::VectorXd c(M + 1);
  for (int n = 0; n <= M; ++n) {
    c[n] = integrate([&f, n](double x) { return f(x) * basis_eval(n, x); },
                     0.0, 1.0, abs_tol);
  }
  return c;
}

double reconstruct(const Eigen::VectorXd& coeffs, double x) {
  double s = 0.0;
  for (int n = 0; n < coeffs.size(); ++n) s += coeffs[n] * basis_eval(n, x);
  return s;
}

Eigen::VectorXd reconstruct_grid_serial(const Eigen::VectorXd& coeffs,
                                        const Eigen::VectorXd& xs) {
  Eigen::VectorXd out(xs.size());
  for (Eigen::Index i = 0; i < xs.size(); ++i)
    out[i] = reconstruct(coeffs, xs[i]);
  return out;
}

Eigen::VectorXd reconstruct_grid(const Eigen::VectorXd& coeffs,
                                 const Eigen::VectorXd& xs) {
  Eigen::VectorXd out(xs.size());
  parallel_for(xs.size(),
               [&](std::ptrdiff_t i) { out[i] = reconstruct(coeffs, xs[i]); });
  return out;
}

SpatialNorms spatial_norms(const Eigen::VectorXd& coeffs) {
  SpatialNorms n;
  double s0 = 0.0, s2 = 0.0, s4 = 0.0;
  for (int k = 0; k < coeffs.size(); ++k) {
    const double lam = lambda_n(k);  // phi_k'' = -lam phi_k
    const double a2 = coeffs[k] * coeffs[k];
    s0 += a2;
    s2 += lam * lam * a2;
    s4 += lam * lam * lam * lam * a2;
  }
  n.l2 = std::sqrt(s0);
  n.d2 = std::sqrt(s2);
  n.d4 = std::sqrt(s4);
  return n;
}

}  // namespace ksobs
