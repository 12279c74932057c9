// Benchmark comparing the OpenMP kernels against their serial reference
// implementations: the sampling-period sweep, the batch simulation driver,
// and grid synthesis.  Prints wall times and speedups; not part of ctest.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <vector>

#include "ksobs/certify.hpp"
#include "ksobs/design.hpp"
#include "ksobs/simulate.hpp"
#include "ksobs/spectral.hpp"

using namespace ksobs;

namespace {

double seconds(const std::function<void()>& work) {
  const auto t0 = std::chrono::steady_clock::now();
  work();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(t1 - t0).count();
}

void row(const char* name, double serial, double parallel) {
  std::printf("%-20s %10.3f ms %10.3f ms %8.2fx\n", name, serial * 1e3,
              parallel * 1e3, serial / parallel);
}

}  // namespace

int main() {
  const double q = 9.970925584731695;
  const Design d = build_design(q, 1, [](double x) { return x; });
  const Eigen::VectorXd L = place_gain(d, {-1.0, -2.0});
  const DecayEnvelope env = decay_envelope(d.A() + L * d.C(),
                                           EnvelopeStrategy::kUser,
                                           11.657584361344007, 1.0);

  std::printf("%-20s %13s %13s %9s\n", "kernel", "serial", "parallel",
              "speedup");

  {
    MaspCurve out;
    const double t_ser = seconds(
        [&] { out = masp_curve_serial(d, L, env, -1.0, 1.0, 2e-6); });
    const double t_par =
        seconds([&] { out = masp_curve(d, L, env, -1.0, 1.0, 2e-6); });
    row("masp_curve", t_ser, t_par);
  }

  {
    const int M = 64, runs = 64;
    const Eigen::VectorXd c_full = project([](double x) { return x; }, M);
    std::vector<Eigen::VectorXd> ics, ics_hat;
    std::vector<SimOptions> opts;
    for (int i = 0; i < runs; ++i) {
      Eigen::VectorXd a0 = Eigen::VectorXd::Zero(M + 1);
      for (int n = 0; n <= 16; ++n)
        a0[n] = std::cos(1.7 * (i + n)) * std::pow(1.0 + n, -4.0);
      ics.push_back(a0);
      ics_hat.push_back(Eigen::VectorXd::Zero(M + 1));
      SimOptions opt;
      opt.M_sim = M;
      opt.horizon = 2.0;
      opt.record_dt = 0.01;
      opt.r = -0.2;
      opt.schedule.kind = ScheduleSpec::Kind::kJittered;
      opt.schedule.T = 0.01;
      opt.seed = 100 + static_cast<std::uint64_t>(i);
      opt.has_seed = true;
      opts.push_back(opt);
    }
    std::vector<HybridTrace> out;
    const double t_ser = seconds(
        [&] { out = run_batch_serial(d, L, c_full, ics, ics_hat, opts); });
    const double t_par =
        seconds([&] { out = run_batch(d, L, c_full, ics, ics_hat, opts); });
    row("run_batch", t_ser, t_par);
  }

  {
    const int M = 384, n_pts = 500'000;
    Eigen::VectorXd coeffs(M + 1);
    for (int n = 0; n <= M; ++n) coeffs[n] = std::pow(1.0 + n, -2.0);
    Eigen::VectorXd xs(n_pts);
    for (int i = 0; i < n_pts; ++i) xs[i] = double(i) / (n_pts - 1);
    Eigen::VectorXd out;
    const double t_ser =
        seconds([&] { out = reconstruct_grid_serial(coeffs, xs); });
    const double t_par = seconds([&] { out = reconstruct_grid(coeffs, xs); });
    row("reconstruct_grid", t_ser, t_par);
  }

  return 0;
}
