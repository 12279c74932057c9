#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

const char* kCli = KSOBS_CLI_PATH;

fs::path fresh_dir(const std::string& tag) {
  fs::path dir = fs::temp_directory_path() /
                 ("ksobs_cli_" + tag + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run_cli(const std::string& args) {
  const std::string cmd =
      std::string(kCli) + " " + args + " > /dev/null 2> /dev/null";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

std::string base_config() {
  return R"(problem.q = 9.970925584731695
problem.N = 1
problem.kernel.kind = x
gain.kind = poles
gain.poles = -1 -2
envelope.strategy = user
envelope.R = 11.657584361344007
envelope.omega = 1.0
cert.r = -0.2
cert.T = 0.01
sim.M = 48
sim.horizon = 0.5
sim.record_dt = 0.01
sim.schedule.kind = jittered
sim.schedule.T = 0.01
sim.noise.kind = uniform
sim.noise.bound = 0.02
sim.ic_plant.kind = cospi
sim.ic_plant.mode = 1
sim.ic_plant.amp = 1.0
sim.ic_observer.kind = modal
forcing.kind = zero
seed = 123
)";
}

}  // namespace

TEST_CASE("repeated runs with one seed are byte-identical") {
  const fs::path dir = fresh_dir("determinism");
  write_file(dir / "run.cfg", base_config());
  const fs::path out1 = dir / "a", out2 = dir / "b";
  REQUIRE(run_cli("simulate --config " + (dir / "run.cfg").string() +
                  " --out " + out1.string()) == 0);
  REQUIRE(run_cli("simulate --config " + (dir / "run.cfg").string() +
                  " --out " + out2.string()) == 0);
  CHECK(slurp(out1 / "trace.csv") == slurp(out2 / "trace.csv"));
  CHECK(slurp(out1 / "verdict.csv") == slurp(out2 / "verdict.csv"));
  fs::remove_all(dir);
}

TEST_CASE("seed override changes the realization, repeating it does not") {
  const fs::path dir = fresh_dir("seed");
  write_file(dir / "run.cfg", base_config());
  const std::string cfg = (dir / "run.cfg").string();
  REQUIRE(run_cli("simulate --config " + cfg + " --seed 5 --out " +
                  (dir / "a").string()) == 0);
  REQUIRE(run_cli("simulate --config " + cfg + " --seed 5 --out " +
                  (dir / "b").string()) == 0);
  REQUIRE(run_cli("simulate --config " + cfg + " --seed 6 --out " +
                  (dir / "c").string()) == 0);
  CHECK(slurp(dir / "a" / "trace.csv") == slurp(dir / "b" / "trace.csv"));
  CHECK(slurp(dir / "a" / "trace.csv") != slurp(dir / "c" / "trace.csv"));
  fs::remove_all(dir);
}

TEST_CASE("the echoed config reproduces the run byte for byte") {
  const fs::path dir = fresh_dir("echo");
  write_file(dir / "run.cfg", base_config());
  REQUIRE(run_cli("simulate --config " + (dir / "run.cfg").string() +
                  " --out " + (dir / "a").string()) == 0);
  REQUIRE(run_cli("simulate --config " + (dir / "a" / "config_echo.cfg").string() +
                  " --out " + (dir / "b").string()) == 0);
  CHECK(slurp(dir / "a" / "trace.csv") == slurp(dir / "b" / "trace.csv"));
  fs::remove_all(dir);
}

TEST_CASE("masp output is independent of the worker count") {
  const fs::path dir = fresh_dir("jobs");
  write_file(dir / "run.cfg", base_config());
  const std::string cfg = (dir / "run.cfg").string();
  REQUIRE(run_cli("masp --config " + cfg + " --jobs 1 --out " +
                  (dir / "a").string()) == 0);
  REQUIRE(run_cli("masp --config " + cfg + " --jobs 4 --out " +
                  (dir / "b").string()) == 0);
  CHECK(slurp(dir / "a" / "masp_curve.csv") ==
        slurp(dir / "b" / "masp_curve.csv"));
  CHECK(slurp(dir / "a" / "masp_optimum.csv") ==
        slurp(dir / "b" / "masp_optimum.csv"));
  fs::remove_all(dir);
}

TEST_CASE("--grid narrows the sweep") {
  const fs::path dir = fresh_dir("grid");
  write_file(dir / "run.cfg", base_config());
  REQUIRE(run_cli("masp --config " + (dir / "run.cfg").string() +
                  " --grid=-0.5:0.5:0.5 --out " + (dir / "a").string()) == 0);
  std::istringstream in(slurp(dir / "a" / "masp_curve.csv"));
  std::string line;
  int rows = 0;
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 4);  // header + three grid points
  fs::remove_all(dir);
}

TEST_CASE("assumption violations exit with code 2") {
  const fs::path dir = fresh_dir("exit2");
  // (N+1)^2 pi^2 < q: the first untracked mode is unstable.
  write_file(dir / "unstable.cfg",
             "problem.q = 45\nproblem.N = 1\n"
             "problem.kernel.kind = x\ngain.kind = poles\n"
             "gain.poles = -1 -2\n");
  CHECK(run_cli("design --config " + (dir / "unstable.cfg").string() +
                " --out " + (dir / "a").string()) == 2);
  // A vanishing kernel coefficient breaks observability.
  write_file(dir / "zero_c.cfg",
             "problem.q = 9.970925584731695\nproblem.N = 1\n"
             "problem.kernel.kind = modal\nproblem.kernel.coeffs = 0.5 0\n"
             "gain.kind = poles\ngain.poles = -1 -2\n");
  CHECK(run_cli("design --config " + (dir / "zero_c.cfg").string() +
                " --out " + (dir / "b").string()) == 2);
  fs::remove_all(dir);
}

TEST_CASE("infeasible periods exit with code 3") {
  const fs::path dir = fresh_dir("exit3");
  std::string cfg = base_config();
  cfg.replace(cfg.find("cert.T = 0.01"), 13, "cert.T = 0.02");
  write_file(dir / "run.cfg", cfg);
  CHECK(run_cli("certify --config " + (dir / "run.cfg").string() + " --out " +
                (dir / "a").string()) == 3);
  fs::remove_all(dir);
}

TEST_CASE("config mistakes exit with code 1") {
  const fs::path dir = fresh_dir("exit1");
  write_file(dir / "bad.cfg", "problem.q = fast\nproblem.N = 1\n");
  CHECK(run_cli("design --config " + (dir / "bad.cfg").string() + " --out " +
                (dir / "a").string()) == 1);
  write_file(dir / "noseed.cfg", [] {
    std::string c = base_config();
    c.erase(c.find("seed = 123"), 10);
    return c;
  }());
  CHECK(run_cli("simulate --config " + (dir / "noseed.cfg").string() +
                " --out " + (dir / "b").string()) == 1);
  fs::remove_all(dir);
}

TEST_CASE("KSOBS_OUT provides the default output directory") {
  const fs::path dir = fresh_dir("envout");
  write_file(dir / "run.cfg", base_config());
  const fs::path target = dir / "from_env";
  const std::string cmd = "KSOBS_OUT=" + target.string() + " " +
                          std::string(kCli) + " design --config " +
                          (dir / "run.cfg").string() +
                          " > /dev/null 2> /dev/null";
  const int rc = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(rc));
  CHECK(WEXITSTATUS(rc) == 0);
  CHECK(fs::exists(target / "design.csv"));
  fs::remove_all(dir);
}

TEST_CASE("design artifacts include the serialized design") {
  const fs::path dir = fresh_dir("artifacts");
  write_file(dir / "run.cfg", base_config());
  REQUIRE(run_cli("design --config " + (dir / "run.cfg").string() + " --out " +
                  (dir / "a").string()) == 0);
  CHECK(fs::exists(dir / "a" / "design.csv"));
  CHECK(fs::exists(dir / "a" / "design.kv"));
  CHECK(fs::exists(dir / "a" / "config_echo.cfg"));
  fs::remove_all(dir);
}
