#pragma once

#include <Eigen/Dense>
#include <functional>

namespace ksobs {

using Profile = std::function<double(double)>;

// Orthonormal Neumann-type cosine basis on (0, 1):
//   phi_0(x) = 1,  phi_n(x) = sqrt(2) cos(n pi x)  for n >= 1.
double basis_eval(int n, double x);

// Growth rate of mode n for u_t = -u_xxxx - q u_xx:
//   mu_n = -lambda_n (lambda_n - q),  lambda_n = n^2 pi^2.
// mu_0 = 0 for every q.
double modal_eigenvalue(int n, double q);
double lambda_n(int n);

// Modal coefficients <f, phi_n> for n = 0..M, each via adaptive quadrature
// to the given absolute tolerance.
Eigen::VectorXd project(const Profile& f, int M, double abs_tol = 1e-12);

// Pointwise synthesis sum_{n<=M} a_n phi_n(x).
double reconstruct(const Eigen::VectorXd& coeffs, double x);

// Grid synthesis; the parallel variant is the OpenMP kernel, the serial one
// is the reference used by tests and the benchmark.
Eigen::VectorXd reconstruct_grid_serial(const Eigen::VectorXd& coeffs,
                                        const Eigen::VectorXd& xs);
Eigen::VectorXd reconstruct_grid(const Eigen::VectorXd& coeffs,
                                 const Eigen::VectorXd& xs);

struct SpatialNorms {
  double l2 = 0.0;  // ||u||
  double d2 = 0.0;  // ||u_xx||
  double d4 = 0.0;  // ||u_xxxx||
};

// Parseval norms of a modal vector: ||u|| = |a|, ||u_xx|| with weight
// n^2 pi^2, ||u_xxxx|| with weight n^4 pi^4.
SpatialNorms spatial_norms(const Eigen::VectorXd& coeffs);

}  // namespace ksobs
