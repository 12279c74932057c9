#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ksobs/design.hpp"
#include "ksobs/simulate.hpp"

namespace ksobs {

// Flat "key = value" text with dotted section names and # comments.
// Values are decimal numbers, words, or whitespace-separated lists.
class KeyValues {
 public:
  static KeyValues from_file(const std::string& path);
  static KeyValues from_string(const std::string& text);

  bool has(const std::string& key) const { return map_.count(key) > 0; }
  void set(const std::string& key, const std::string& value);
  std::string get(const std::string& key) const;  // throws if missing
  std::string get(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  std::uint64_t get_u64(const std::string& key) const;
  std::vector<double> get_list(const std::string& key) const;

  void write(const std::string& path) const;  // sorted, reproducible

 private:
  std::map<std::string, std::string> map_;
};

// A spatial profile given either in closed form or modally.
struct ProfileSpec {
  enum class Kind { kX, kPoly, kCosPi, kModal } kind = Kind::kModal;
  std::vector<double> coeffs;  // poly coefficients or modal coefficients
  int mode = 0;                // cospi: amp * cos(mode pi x)
  double amp = 1.0;

  bool closed_form() const { return kind != Kind::kModal; }
  Profile function() const;                 // closed-form kinds only
  Eigen::VectorXd modal(int M,
                        double quad_tol = 1e-12) const;  // length M + 1
};

struct RunConfig {
  double q = 0.0;
  int N = 0;
  ProfileSpec kernel;

  bool gain_from_poles = true;
  std::vector<double> poles;
  std::vector<double> gain;

  EnvelopeStrategy envelope = EnvelopeStrategy::kSampled;
  double user_R = 0.0, user_omega = 0.0;

  double r = 0.0;
  std::optional<double> T;      // defaults to the schedule period
  double r_lo = -1.0, r_hi = 1.0, r_step = 0.005;

  SimOptions sim;               // schedule/noise/forcing/horizon/record
  ProfileSpec ic_plant, ic_observer;

  ProfileSpec oracle_profile;
  int oracle_grid = 201;
  double oracle_dt = 1e-6;
  double oracle_horizon = 0.01;
  bool oracle_convergence = false;

  std::string out_dir;  // empty: resolve from --out / KSOBS_OUT / ./out
};

// Parses and validates the fields present in the key-value map; fields a
// given subcommand does not use may be absent.
RunConfig parse_config(const KeyValues& kv);

}  // namespace ksobs
