#include "ksobs/fd.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "ksobs/errors.hpp"

namespace ksobs {
namespace {

// Fold a stencil index back into the grid: even reflection about both ends.
int fold(int i, int n) {
  if (i < 0) return -i;
  if (i > n - 1) return 2 * (n - 1) - i;
  return i;
}

}  // namespace

FDSolver::FDSolver(int n_points, double q, double dt)
    : n_(n_points), dt_(dt) {
  if (n_points < 9 || n_points % 2 == 0)
    throw std::invalid_argument("FDSolver: n_points must be odd and >= 9");
  h_ = 1.0 / (n_points - 1);
  if (!(dt > 0.0) || dt > h_ * h_)
    throw std::invalid_argument("FDSolver: need 0 < dt <= h^2");

  const double c4 = 1.0 / (h_ * h_ * h_ * h_);
  const double c2 = q / (h_ * h_);
  const double s4[5] = {c4, -4.0 * c4, 6.0 * c4, -4.0 * c4, c4};
  const double s2[3] = {c2, -2.0 * c2, c2};

  std::vector<Eigen::Triplet<double>> lhs_t, rhs_t;
  for (int i = 0; i < n_; ++i) {
    // K = D4 + q D2 row at offsets -2..2, then ghost-fold the columns;
    // setFromTriplets sums duplicates produced by the folding.
    double kcol[5];
    int jcol[5];
    for (int o = 0; o < 5; ++o) {
      jcol[o] = fold(i + o - 2, n_);
      kcol[o] = s4[o];
    }
    for (int o = 0; o < 3; ++o) kcol[o + 1] += s2[o];
    for (int o = 0; o < 5; ++o) {
      const double k_ij = kcol[o];
      lhs_t.emplace_back(i, jcol[o], 0.5 * dt_ * k_ij);
      rhs_t.emplace_back(i, jcol[o], -0.5 * dt_ * k_ij);
    }
    lhs_t.emplace_back(i, i, 1.0);
    rhs_t.emplace_back(i, i, 1.0);
  }

  Eigen::SparseMatrix<double> lhs_m(n_, n_);
  lhs_m.setFromTriplets(lhs_t.begin(), lhs_t.end());
  rhs_.resize(n_, n_);
  rhs_.setFromTriplets(rhs_t.begin(), rhs_t.end());
  lhs_.compute(lhs_m);
  if (lhs_.info() != Eigen::Success)
    throw NumericError("FDSolver: factorization failed");
}

void FDSolver::step(Eigen::VectorXd& u) const {
  if (u.size() != n_)
    throw std::invalid_argument("FDSolver::step: wrong grid size");
  u = lhs_.solve(rhs_ * u);
}

double FDSolver::grid_mean(const Eigen::VectorXd& u, double h) {
  const Eigen::Index n = u.size();
  return h * (0.5 * (u[0] + u[n - 1]) + u.segment(1, n - 2).sum());
}

double FDSolver::grid_l2(const Eigen::VectorXd& u, double h) {
  const Eigen::Index n = u.size();
  const double s = 0.5 * (u[0] * u[0] + u[n - 1] * u[n - 1]) +
                   u.segment(1, n - 2).squaredNorm();
  return std::sqrt(h * s);
}

double fd_vs_spectral(const Profile& profile, double q, double horizon,
                      int n_points, double dt, int M_sim) {
  if (!(horizon > 0.0) || horizon > 0.05)
    throw std::invalid_argument("fd_vs_spectral: need 0 < horizon <= 0.05");
  const FDSolver solver(n_points, q, dt);
  const double h = solver.h();

  Eigen::VectorXd u_fd(n_points);
  Eigen::VectorXd xs(n_points);
  for (int i = 0; i < n_points; ++i) {
    xs[i] = i * h;
    u_fd[i] = profile(xs[i]);
  }
  const Eigen::VectorXd a0 = project(profile, M_sim);
  Eigen::VectorXd mu(M_sim + 1);
  for (int n = 0; n <= M_sim; ++n) mu[n] = modal_eigenvalue(n, q);

  const long n_steps = std::lround(horizon / dt);
  if (n_steps < 10)
    throw std::invalid_argument("fd_vs_spectral: horizon shorter than 10 dt");

  double worst = 0.0;
  long next_check = 0;
  int check = 0;
  for (long s = 0; s <= n_steps; ++s) {
    if (s == next_check) {
      const double t = s * dt;
      const Eigen::VectorXd a_t =
          (mu.array() * t).exp().matrix().cwiseProduct(a0);
      const Eigen::VectorXd u_spec = reconstruct_grid(a_t, xs);
      const double denom = std::max(FDSolver::grid_l2(u_spec, h), 1e-30);
      worst = std::max(worst,
                       FDSolver::grid_l2(u_fd - u_spec, h) / denom);
      ++check;
      next_check = n_steps * check / 10;
    }
    if (s < n_steps) solver.step(u_fd);
  }
  return worst;
}

}  // namespace ksobs
