#pragma once

#include <functional>
#include <stdexcept>
#include <string>

namespace ksobs {

// Raised when the adaptive scheme cannot reach the requested absolute
// tolerance within the refinement depth limit.  Carries the tolerance that
// was actually achieved so callers can report it.
class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& msg, double achieved)
      : std::runtime_error(msg), achieved_tolerance(achieved) {}
  double achieved_tolerance;
};

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;  // sum of per-panel Kronrod/Gauss differences
  int max_depth_used = 0;
  bool converged = true;
};

// Adaptive Gauss-Kronrod (G7/K15) integration of f over [a, b] to an
// absolute tolerance.  Panels are bisected until the local estimate fits the
// local budget or max_depth is reached.
QuadratureResult integrate_adaptive(const std::function<double(double)>& f,
                                    double a, double b,
                                    double abs_tol = 1e-12,
                                    int max_depth = 20);

// Same, but throws QuadratureError if the tolerance was not met.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol = 1e-12, int max_depth = 20);

}  // namespace ksobs
