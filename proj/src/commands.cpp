#include "ksobs/commands.hpp"

#include <algorithm>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "ksobs/certify.hpp"
#include "ksobs/config.hpp"
#include "ksobs/design.hpp"
#include "ksobs/errors.hpp"
#include "ksobs/fd.hpp"
#include "ksobs/parallel.hpp"
#include "ksobs/quadrature.hpp"
#include "ksobs/simulate.hpp"

namespace ksobs {

namespace {

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

class Csv {
 public:
  Csv(const std::filesystem::path& path, const std::string& header)
      : out_(path) {
    if (!out_) throw std::runtime_error("cannot write " + path.string());
    out_ << header << "\n";
  }
  void row(const std::string& line) { out_ << line << "\n"; }

 private:
  std::ofstream out_;
};

struct Context {
  KeyValues kv;
  RunConfig cfg;
  std::filesystem::path out;
};

Context prepare(const CliOptions& opt) {
  KeyValues kv = KeyValues::from_file(opt.config_path);
  if (opt.grid) {
    std::istringstream in(*opt.grid);
    std::string lo, hi, step;
    if (!std::getline(in, lo, ':') || !std::getline(in, hi, ':') ||
        !std::getline(in, step) || lo.empty() || hi.empty() || step.empty())
      throw std::runtime_error("--grid expects lo:hi:step");
    kv.set("cert.r_lo", lo);
    kv.set("cert.r_hi", hi);
    kv.set("cert.r_step", step);
  }
  if (opt.seed) kv.set("seed", std::to_string(*opt.seed));
  if (opt.out) kv.set("out", *opt.out);
  if (opt.jobs > 0) set_jobs(opt.jobs);

  Context ctx{std::move(kv), {}, {}};
  ctx.cfg = parse_config(ctx.kv);
  std::string out = ctx.cfg.out_dir;
  if (out.empty()) {
    const char* env = std::getenv("KSOBS_OUT");
    out = (env && *env) ? env : "out";
  }
  std::filesystem::create_directories(out);
  ctx.out = out;
  ctx.kv.set("out", out);
  ctx.kv.write((ctx.out / "config_echo.cfg").string());
  return ctx;
}

int guarded(const std::function<void()>& body) {
  try {
    body();
    return 0;
  } catch (const DesignError& e) {
    std::cerr << "error (assumptions): " << e.what() << "\n";
    return 2;
  } catch (const FeasibilityError& e) {
    std::cerr << "error (infeasible): " << e.what() << "\n";
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "error (numeric): " << e.what() << "\n";
    return 4;
  } catch (const QuadratureError& e) {
    std::cerr << "error (numeric): " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

Design make_design(const RunConfig& cfg) {
  if (cfg.kernel.kind == ProfileSpec::Kind::kModal) {
    Eigen::VectorXd k(static_cast<int>(cfg.kernel.coeffs.size()));
    for (int i = 0; i < k.size(); ++i) k[i] = cfg.kernel.coeffs[i];
    return build_design(cfg.q, cfg.N, k);
  }
  return build_design(cfg.q, cfg.N, cfg.kernel.function());
}

Eigen::VectorXd make_gain(const RunConfig& cfg, const Design& d) {
  Eigen::VectorXd L;
  if (cfg.gain_from_poles) {
    if (static_cast<int>(cfg.poles.size()) != d.N + 1)
      throw std::runtime_error("gain.poles must list problem.N + 1 values");
    L = place_gain(d, cfg.poles);
  } else {
    if (static_cast<int>(cfg.gain.size()) != d.N + 1)
      throw std::runtime_error("gain.L must list problem.N + 1 values");
    L.resize(d.N + 1);
    for (int i = 0; i <= d.N; ++i) L[i] = cfg.gain[i];
  }
  const Eigen::MatrixXd acl = d.A() + L * d.C();
  const double abscissa =
      Eigen::EigenSolver<Eigen::MatrixXd>(acl, false)
          .eigenvalues()
          .real()
          .maxCoeff();
  if (!(abscissa < 0.0))
    throw DesignError("closed loop A + L C is not Hurwitz (spectral "
                      "abscissa " + fmt(abscissa) + ")");
  return L;
}

void require_assumption_b(const Design& d) {
  const AssumptionReport rep = check_assumption_b(d);
  if (!rep.ok) throw DesignError(rep.detail);
}

double certificate_period(const RunConfig& cfg) {
  if (cfg.T && *cfg.T > 0.0) return *cfg.T;
  if (cfg.sim.schedule.kind == ScheduleSpec::Kind::kExplicit) {
    const auto& ts = cfg.sim.schedule.times;
    double gap = 0.0;
    for (std::size_t i = 1; i < ts.size(); ++i)
      gap = std::max(gap, ts[i] - ts[i - 1]);
    if (gap > 0.0) return gap;
  }
  throw std::runtime_error(
      "a positive sampling period is required (set cert.T or "
      "sim.schedule.T)");
}

}  // namespace

int cmd_design(const CliOptions& opt) {
  return guarded([&] {
    Context ctx = prepare(opt);
    const Design d = make_design(ctx.cfg);
    const AssumptionReport rep = check_assumption_b(d);

    Csv csv(ctx.out / "design.csv", "quantity,index,value");
    for (int n = 0; n <= d.N; ++n)
      csv.row("mu," + std::to_string(n) + "," + fmt(d.mu[n]));
    for (int n = 0; n <= d.N; ++n)
      csv.row("c," + std::to_string(n) + "," + fmt(d.c[n]));
    csv.row("mu_next,0," + fmt(d.mu_next()));
    csv.row("kernel_tail_norm,0," + fmt(d.tail_kernel_norm()));
    csv.row("obs_det,0," + fmt(observability_determinant(d)));
    csv.row(std::string("assumption_b,0,") + (rep.ok ? "1" : "0"));
    if (!rep.ok) throw DesignError(rep.detail);

    const Eigen::VectorXd L = make_gain(ctx.cfg, d);
    for (int n = 0; n <= d.N; ++n)
      csv.row("L," + std::to_string(n) + "," + fmt(L[n]));

    const Eigen::MatrixXd acl = d.A() + L * d.C();
    Eigen::VectorXcd eigs =
        Eigen::EigenSolver<Eigen::MatrixXd>(acl, false).eigenvalues();
    std::sort(eigs.data(), eigs.data() + eigs.size(),
              [](std::complex<double> a, std::complex<double> b) {
                return a.real() != b.real() ? a.real() < b.real()
                                            : a.imag() < b.imag();
              });
    for (int n = 0; n < eigs.size(); ++n) {
      csv.row("eig_real," + std::to_string(n) + "," + fmt(eigs[n].real()));
      csv.row("eig_imag," + std::to_string(n) + "," + fmt(eigs[n].imag()));
    }
    csv.row("monotonicity_shift,0," +
            fmt(monotonicity_shift(d, L, ctx.cfg.r)));
    save_design(d, L, (ctx.out / "design.kv").string());
  });
}

int cmd_masp(const CliOptions& opt) {
  return guarded([&] {
    Context ctx = prepare(opt);
    const Design d = make_design(ctx.cfg);
    require_assumption_b(d);
    const Eigen::VectorXd L = make_gain(ctx.cfg, d);
    const DecayEnvelope env =
        decay_envelope(d.A() + L * d.C(), ctx.cfg.envelope, ctx.cfg.user_R,
                       ctx.cfg.user_omega);

    const MaspCurve curve = masp_curve(d, L, env, ctx.cfg.r_lo, ctx.cfg.r_hi,
                                       ctx.cfg.r_step);
    Csv csv(ctx.out / "masp_curve.csv", "r,t_max");
    for (std::size_t i = 0; i < curve.r.size(); ++i)
      csv.row(fmt(curve.r[i]) + "," + fmt(curve.t_max[i]));

    const MaspOptimum best = optimize_r(d, L, env, ctx.cfg.r_lo, ctx.cfg.r_hi,
                                        ctx.cfg.r_step);
    Csv copt(ctx.out / "masp_optimum.csv", "r_star,t_max_star");
    copt.row(fmt(best.r_star) + "," + fmt(best.t_max_star));
  });
}

int cmd_certify(const CliOptions& opt) {
  return guarded([&] {
    Context ctx = prepare(opt);
    const Design d = make_design(ctx.cfg);
    require_assumption_b(d);
    const Eigen::VectorXd L = make_gain(ctx.cfg, d);
    const DecayEnvelope env =
        decay_envelope(d.A() + L * d.C(), ctx.cfg.envelope, ctx.cfg.user_R,
                       ctx.cfg.user_omega);
    const double T = certificate_period(ctx.cfg);
    const IOSCertificate cert = ios_certificate(d, L, env, ctx.cfg.r, T);

    Csv csv(ctx.out / "certificate.csv", "key,value");
    csv.row("r," + fmt(cert.r));
    csv.row("T," + fmt(cert.T));
    csv.row("T_max," + fmt(masp_closed_form(d, L, env, cert.r)));
    csv.row("sigma," + fmt(cert.sigma));
    csv.row("K," + fmt(cert.K));
    csv.row("gamma," + fmt(cert.gamma));
    csv.row("M," + fmt(cert.M_const));
    csv.row("gain," + fmt(cert.gain));
    csv.row("R," + fmt(cert.R));
    csv.row("omega," + fmt(cert.omega));
    csv.row("Z," + fmt(compute_Z(d, L, env, cert.r)));
    csv.row("L_norm," + fmt(cert.L_norm));
    csv.row("k_norm," + fmt(cert.k_norm));
  });
}

int cmd_simulate(const CliOptions& opt) {
  return guarded([&] {
    Context ctx = prepare(opt);
    RunConfig& cfg = ctx.cfg;
    const Design d = make_design(cfg);
    require_assumption_b(d);
    const Eigen::VectorXd L = make_gain(cfg, d);
    const DecayEnvelope env = decay_envelope(d.A() + L * d.C(), cfg.envelope,
                                             cfg.user_R, cfg.user_omega);
    const double T = certificate_period(cfg);
    const IOSCertificate cert = ios_certificate(d, L, env, cfg.r, T);

    const int M = cfg.sim.M_sim;
    const Eigen::VectorXd c_full = cfg.kernel.modal(M);
    const Eigen::VectorXd a0 = cfg.ic_plant.modal(M);
    const Eigen::VectorXd ahat0 = cfg.ic_observer.modal(M);
    const HybridTrace trace = run(d, L, c_full, a0, ahat0, cfg.sim);
    if (trace.max_gap > T * (1.0 + 1e-12))
      throw FeasibilityError("realized sampling gap " + fmt(trace.max_gap) +
                             " exceeds the certified period " + fmt(T));

    const BoundsReport rep = verify_bounds(trace, cert);

    Csv csv(ctx.out / "trace.csv",
            "t,norm_L2,norm_D2,norm_D4,predictor_error,bound21,bound22,"
            "bound23,is_sample_time");
    for (const TraceRecord& rec : trace.records) {
      double rhs[3];
      bound_envelopes(cert, trace.e0, trace.N, rec.t, rec.xi_sup, rhs);
      csv.row(fmt(rec.t) + "," + fmt(rec.l2) + "," + fmt(rec.d2) + "," +
              fmt(rec.d4) + "," + fmt(rec.pred_err) + "," + fmt(rhs[0]) +
              "," + fmt(rhs[1]) + "," + fmt(rhs[2]) + "," +
              (rec.is_sample ? "1" : "0"));
    }

    Csv verdict(ctx.out / "verdict.csv", "key,value");
    const char* names[3] = {"bound21", "bound22", "bound23"};
    for (int b = 0; b < 3; ++b) {
      verdict.row("violations_" + std::string(names[b]) + "," +
                  std::to_string(rep.violations[b]));
      verdict.row("min_slack_" + std::string(names[b]) + "," +
                  fmt(rep.min_slack[b]));
      verdict.row("max_slack_" + std::string(names[b]) + "," +
                  fmt(rep.max_slack[b]));
    }
    verdict.row("fitted_decay_rate," + fmt(rep.fitted_rate));
    verdict.row("sigma," + fmt(cert.sigma));
    verdict.row("gamma," + fmt(cert.gamma));
    verdict.row("M," + fmt(cert.M_const));
    verdict.row("max_gap," + fmt(trace.max_gap));
    verdict.row(std::string("all_bounds_hold,") + (rep.ok() ? "1" : "0"));
  });
}

int cmd_oracle(const CliOptions& opt) {
  return guarded([&] {
    Context ctx = prepare(opt);
    const RunConfig& cfg = ctx.cfg;
    if (!cfg.oracle_profile.closed_form())
      throw std::runtime_error(
          "oracle.profile must be a closed-form profile (x, poly or cospi)");
    const Profile profile = cfg.oracle_profile.function();

    Csv csv(ctx.out / "oracle.csv", "n_points,h,dt,discrepancy,ratio");
    const double d1 = fd_vs_spectral(profile, cfg.q, cfg.oracle_horizon,
                                     cfg.oracle_grid, cfg.oracle_dt);
    csv.row(std::to_string(cfg.oracle_grid) + "," +
            fmt(1.0 / (cfg.oracle_grid - 1)) + "," + fmt(cfg.oracle_dt) +
            "," + fmt(d1) + ",");
    if (cfg.oracle_convergence) {
      const int fine = 2 * (cfg.oracle_grid - 1) + 1;
      const double d2 = fd_vs_spectral(profile, cfg.q, cfg.oracle_horizon,
                                       fine, cfg.oracle_dt);
      csv.row(std::to_string(fine) + "," + fmt(1.0 / (fine - 1)) + "," +
              fmt(cfg.oracle_dt) + "," + fmt(d2) + "," + fmt(d1 / d2));
    }
  });
}

}  // namespace ksobs
