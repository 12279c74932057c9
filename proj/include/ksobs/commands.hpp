#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace ksobs {

struct CliOptions {
  std::string config_path;
  std::optional<std::string> out;   // overrides config 'out'
  std::optional<std::uint64_t> seed;
  std::optional<std::string> grid;  // "lo:hi:step", masp only
  int jobs = 0;                     // 0 keeps the runtime default
};

// Subcommand entry points; each returns the process exit code.
// 0 success, 1 usage/config error, 2 assumption violation,
// 3 infeasible (r, T), 4 numeric failure.
int cmd_design(const CliOptions& opt);
int cmd_masp(const CliOptions& opt);
int cmd_certify(const CliOptions& opt);
int cmd_simulate(const CliOptions& opt);
int cmd_oracle(const CliOptions& opt);

}  // namespace ksobs
