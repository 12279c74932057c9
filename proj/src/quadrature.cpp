#include "ksobs/quadrature.hpp"

#include <algorithm>
#include <cmath>

namespace ksobs {
namespace {

// 15-point Kronrod abscissae on [-1, 1] (positive half) with the embedded
// 7-point Gauss rule on the odd-indexed nodes.  Values from QUADPACK dqk15.
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};
constexpr double kWgk[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};
constexpr double kWg[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

struct PanelResult {
  double kronrod;
  double diff;  // |K15 - G7|
};

PanelResult panel(const std::function<double(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double resk = kWgk[7] * fc;
  double resg = kWg[3] * fc;
  for (int i = 0; i < 7; ++i) {
    const double dx = h * kXgk[i];
    const double fsum = f(c - dx) + f(c + dx);
    resk += kWgk[i] * fsum;
    if (i % 2 == 1) resg += kWg[i / 2] * fsum;
  }
  return {resk * h, std::abs((resk - resg) * h)};
}

void refine(const std::function<double(double)>& f, double a, double b,
            double budget, int depth, int max_depth, QuadratureResult* out) {
  const PanelResult p = panel(f, a, b);
  out->max_depth_used = std::max(out->max_depth_used, depth);
  if (p.diff <= budget || depth >= max_depth) {
    out->value += p.kronrod;
    out->error_estimate += p.diff;
    if (p.diff > budget) out->converged = false;
    return;
  }
  const double c = 0.5 * (a + b);
  refine(f, a, c, 0.5 * budget, depth + 1, max_depth, out);
  refine(f, c, b, 0.5 * budget, depth + 1, max_depth, out);
}

}  // namespace

QuadratureResult integrate_adaptive(const std::function<double(double)>& f,
                                    double a, double b, double abs_tol,
                                    int max_depth) {
  QuadratureResult out;
  if (a == b) return out;
  refine(f, a, b, abs_tol, 0, max_depth, &out);
  return out;
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol, int max_depth) {
  const QuadratureResult r = integrate_adaptive(f, a, b, abs_tol, max_depth);
  if (!r.converged) {
    throw QuadratureError(
        "quadrature did not converge: requested " + std::to_string(abs_tol) +
            ", achieved " + std::to_string(r.error_estimate),
        r.error_estimate);
  }
  return r.value;
}

}  // namespace ksobs
