#include <string>

#include "CLI11.hpp"
#include "ksobs/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Sampled-data observer toolkit for the linear "
               "Kuramoto-Sivashinsky equation"};
  app.require_subcommand(1);

  ksobs::CliOptions opt;
  std::string out, grid;
  std::uint64_t seed = 0;
  int jobs = 0;

  auto add_common = [&](CLI::App* sub, bool with_grid) {
    sub->add_option("--config", opt.config_path, "configuration file")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--out", out, "output directory");
    sub->add_option("--seed", seed, "RNG seed override");
    sub->add_option("--jobs", jobs, "worker threads for parallel kernels");
    if (with_grid) sub->add_option("--grid", grid, "r grid as lo:hi:step");
    return sub;
  };

  CLI::App* design = add_common(
      app.add_subcommand("design", "modal design, gain and assumptions"),
      false);
  CLI::App* masp = add_common(
      app.add_subcommand("masp", "maximum allowable sampling period sweep"),
      true);
  CLI::App* certify = add_common(
      app.add_subcommand("certify", "input-to-state certificate for (r, T)"),
      false);
  CLI::App* simulate = add_common(
      app.add_subcommand("simulate", "hybrid closed-loop simulation"), false);
  CLI::App* oracle = add_common(
      app.add_subcommand("oracle", "finite-difference cross-check"), false);

  CLI11_PARSE(app, argc, argv);

  CLI::App* sub = app.get_subcommands().front();
  auto counted = [&](const char* name) {
    const CLI::Option* o = sub->get_option_no_throw(name);
    return o != nullptr && o->count() > 0;
  };
  if (counted("--out")) opt.out = out;
  if (counted("--grid")) opt.grid = grid;
  if (counted("--seed")) opt.seed = seed;
  opt.jobs = jobs;

  if (sub == design) return ksobs::cmd_design(opt);
  if (sub == masp) return ksobs::cmd_masp(opt);
  if (sub == certify) return ksobs::cmd_certify(opt);
  if (sub == simulate) return ksobs::cmd_simulate(opt);
  if (sub == oracle) return ksobs::cmd_oracle(opt);
  return 1;
}
