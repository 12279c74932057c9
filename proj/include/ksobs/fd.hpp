#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "ksobs/spectral.hpp"

namespace ksobs {

// Independent cross-check solver: Crank-Nicolson in time, centered 5-point
// u_xxxx and 3-point u_xx stencils in space on a uniform grid over [0, 1].
// The Neumann-type conditions u_x = u_xxx = 0 enter through even-reflection
// ghost values (u_{-1} = u_1, u_{-2} = u_2, mirrored on the right).
class FDSolver {
 public:
  // n_points must be odd (so common profiles hit grid nodes) and the step
  // must satisfy dt <= h^2.
  FDSolver(int n_points, double q, double dt);

  void step(Eigen::VectorXd& u) const;  // one Crank-Nicolson step
  double h() const { return h_; }
  int n_points() const { return n_; }

  // Trapezoidal grid functionals.
  static double grid_mean(const Eigen::VectorXd& u, double h);
  static double grid_l2(const Eigen::VectorXd& u, double h);

 private:
  int n_;
  double h_, dt_;
  Eigen::SparseMatrix<double> rhs_;  // I - dt/2 K
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lhs_;  // I + dt/2 K
};

// Runs the FD solver and the exact modal solution (f = 0) from the same
// profile and reports the maximum over 11 evenly spaced checkpoints of
//   ||u_fd - u_spec|| / max(||u_spec||, 1e-30)
// in the grid L2 norm.  horizon must stay small (<= 0.05) so the stiff
// modal decay cannot underflow the denominator guard.
double fd_vs_spectral(const Profile& profile, double q, double horizon,
                      int n_points, double dt, int M_sim = 64);

}  // namespace ksobs
