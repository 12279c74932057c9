#include "ksobs/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "ksobs/spectral.hpp"

namespace ksobs {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const char* wanted) {
  throw std::runtime_error("config key '" + key + "': expected " + wanted +
                           ", got '" + value + "'");
}

}  // namespace

KeyValues KeyValues::from_string(const std::string& text) {
  KeyValues kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line " + std::to_string(lineno) +
                               ": expected 'key = value', got '" + line + "'");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw std::runtime_error("config line " + std::to_string(lineno) +
                               ": empty key");
    kv.map_[key] = value;  // later lines win
  }
  return kv;
}

KeyValues KeyValues::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_string(buf.str());
}

void KeyValues::set(const std::string& key, const std::string& value) {
  map_[key] = value;
}

std::string KeyValues::get(const std::string& key) const {
  auto it = map_.find(key);
  if (it == map_.end())
    throw std::runtime_error("missing config key: " + key);
  return it->second;
}

std::string KeyValues::get(const std::string& key,
                           const std::string& fallback) const {
  auto it = map_.find(key);
  return it == map_.end() ? fallback : it->second;
}

double KeyValues::get_double(const std::string& key) const {
  const std::string v = get(key);
  std::size_t pos = 0;
  double x = 0.0;
  try {
    x = std::stod(v, &pos);
  } catch (const std::exception&) {
    bad_value(key, v, "a number");
  }
  if (pos != v.size()) bad_value(key, v, "a number");
  return x;
}

double KeyValues::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

int KeyValues::get_int(const std::string& key, int fallback) const {
  if (!has(key)) return fallback;
  const std::string v = get(key);
  std::size_t pos = 0;
  long x = 0;
  try {
    x = std::stol(v, &pos);
  } catch (const std::exception&) {
    bad_value(key, v, "an integer");
  }
  if (pos != v.size()) bad_value(key, v, "an integer");
  return static_cast<int>(x);
}

std::uint64_t KeyValues::get_u64(const std::string& key) const {
  const std::string v = get(key);
  std::size_t pos = 0;
  unsigned long long x = 0;
  try {
    x = std::stoull(v, &pos);
  } catch (const std::exception&) {
    bad_value(key, v, "an unsigned integer");
  }
  if (pos != v.size()) bad_value(key, v, "an unsigned integer");
  return static_cast<std::uint64_t>(x);
}

std::vector<double> KeyValues::get_list(const std::string& key) const {
  const std::string v = get(key);
  std::istringstream in(v);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) {
    std::size_t pos = 0;
    double x = 0.0;
    try {
      x = std::stod(tok, &pos);
    } catch (const std::exception&) {
      bad_value(key, v, "a list of numbers");
    }
    if (pos != tok.size()) bad_value(key, v, "a list of numbers");
    out.push_back(x);
  }
  return out;
}

void KeyValues::write(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write config echo: " + path);
  for (const auto& [k, v] : map_) out << k << " = " << v << "\n";
}

Profile ProfileSpec::function() const {
  switch (kind) {
    case Kind::kX:
      return [](double x) { return x; };
    case Kind::kPoly: {
      auto cs = coeffs;
      return [cs](double x) {
        double acc = 0.0;
        for (std::size_t i = cs.size(); i-- > 0;) acc = acc * x + cs[i];
        return acc;
      };
    }
    case Kind::kCosPi: {
      const double a = amp;
      const double w = mode * std::numbers::pi;
      return [a, w](double x) { return a * std::cos(w * x); };
    }
    case Kind::kModal:
      break;
  }
  throw std::logic_error("modal profile has no closed form");
}

Eigen::VectorXd ProfileSpec::modal(int M, double quad_tol) const {
  if (kind == Kind::kModal) {
    if (static_cast<int>(coeffs.size()) > M + 1)
      throw std::runtime_error(
          "modal profile lists " + std::to_string(coeffs.size()) +
          " coefficients; at most M + 1 = " + std::to_string(M + 1) +
          " are representable");
    Eigen::VectorXd v = Eigen::VectorXd::Zero(M + 1);
    for (std::size_t i = 0; i < coeffs.size(); ++i) v[static_cast<int>(i)] = coeffs[i];
    return v;
  }
  return project(function(), M, quad_tol);
}

namespace {

ProfileSpec parse_profile(const KeyValues& kv, const std::string& prefix,
                          const char* default_kind) {
  ProfileSpec p;
  const std::string kind = kv.get(prefix + ".kind", default_kind);
  if (kind == "x") {
    p.kind = ProfileSpec::Kind::kX;
  } else if (kind == "poly") {
    p.kind = ProfileSpec::Kind::kPoly;
    p.coeffs = kv.get_list(prefix + ".coeffs");
  } else if (kind == "cospi") {
    p.kind = ProfileSpec::Kind::kCosPi;
    p.mode = kv.get_int(prefix + ".mode", 1);
    p.amp = kv.get_double(prefix + ".amp", 1.0);
  } else if (kind == "modal") {
    p.kind = ProfileSpec::Kind::kModal;
    if (kv.has(prefix + ".coeffs")) p.coeffs = kv.get_list(prefix + ".coeffs");
  } else {
    throw std::runtime_error("config key '" + prefix +
                             ".kind': unknown profile kind '" + kind + "'");
  }
  return p;
}

ScheduleSpec parse_schedule(const KeyValues& kv, double fallback_T) {
  ScheduleSpec s;
  const std::string kind = kv.get("sim.schedule.kind", "uniform");
  if (kind == "uniform") {
    s.kind = ScheduleSpec::Kind::kUniform;
  } else if (kind == "jittered") {
    s.kind = ScheduleSpec::Kind::kJittered;
  } else if (kind == "explicit") {
    s.kind = ScheduleSpec::Kind::kExplicit;
    s.times = kv.get_list("sim.schedule.times");
  } else {
    throw std::runtime_error("config key 'sim.schedule.kind': unknown kind '" +
                             kind + "'");
  }
  s.T = kv.get_double("sim.schedule.T", fallback_T);
  return s;
}

NoiseSpec parse_noise(const KeyValues& kv) {
  NoiseSpec n;
  const std::string kind = kv.get("sim.noise.kind", "none");
  if (kind == "none") {
    n.kind = NoiseSpec::Kind::kNone;
  } else if (kind == "constant") {
    n.kind = NoiseSpec::Kind::kConstant;
    n.bound = kv.get_double("sim.noise.bound");
  } else if (kind == "uniform") {
    n.kind = NoiseSpec::Kind::kUniform;
    n.bound = kv.get_double("sim.noise.bound");
  } else if (kind == "sinusoid") {
    n.kind = NoiseSpec::Kind::kSinusoid;
    n.amp = kv.get_double("sim.noise.amp");
    n.freq = kv.get_double("sim.noise.freq");
    n.phase = kv.get_double("sim.noise.phase", 0.0);
  } else {
    throw std::runtime_error("config key 'sim.noise.kind': unknown kind '" +
                             kind + "'");
  }
  return n;
}

TimeSignal parse_time_signal(const KeyValues& kv) {
  TimeSignal g;
  const std::string kind = kv.get("forcing.time.kind", "constant");
  if (kind == "constant") {
    g.kind = TimeSignal::Kind::kConstant;
    g.value = kv.get_double("forcing.time.value", 1.0);
  } else if (kind == "steps") {
    g.kind = TimeSignal::Kind::kSteps;
    g.times = kv.get_list("forcing.time.times");
    g.values = kv.get_list("forcing.time.values");
    if (g.times.empty() || g.times.size() != g.values.size())
      throw std::runtime_error(
          "forcing.time.times and forcing.time.values must be nonempty lists "
          "of equal length");
    if (g.times.front() != 0.0)
      throw std::runtime_error("forcing.time.times must start at 0");
    for (std::size_t i = 1; i < g.times.size(); ++i)
      if (!(g.times[i] > g.times[i - 1]))
        throw std::runtime_error("forcing.time.times must be increasing");
  } else if (kind == "sin") {
    g.kind = TimeSignal::Kind::kSinusoid;
    g.amp = kv.get_double("forcing.time.amp");
    g.freq = kv.get_double("forcing.time.freq");
    g.phase = kv.get_double("forcing.time.phase", 0.0);
  } else {
    throw std::runtime_error("config key 'forcing.time.kind': unknown kind '" +
                             kind + "'");
  }
  return g;
}

}  // namespace

RunConfig parse_config(const KeyValues& kv) {
  RunConfig cfg;
  cfg.q = kv.get_double("problem.q");
  cfg.N = kv.get_int("problem.N", -1);
  if (cfg.N < 0) throw std::runtime_error("missing config key: problem.N");
  cfg.kernel = parse_profile(kv, "problem.kernel", "x");

  const std::string gain_kind = kv.get("gain.kind", "poles");
  if (gain_kind == "poles") {
    cfg.gain_from_poles = true;
    if (kv.has("gain.poles")) cfg.poles = kv.get_list("gain.poles");
  } else if (gain_kind == "explicit") {
    cfg.gain_from_poles = false;
    cfg.gain = kv.get_list("gain.L");
  } else {
    throw std::runtime_error("config key 'gain.kind': unknown kind '" +
                             gain_kind + "'");
  }

  const std::string env = kv.get("envelope.strategy", "sampled");
  if (env == "lyapunov") {
    cfg.envelope = EnvelopeStrategy::kLyapunov;
  } else if (env == "sampled") {
    cfg.envelope = EnvelopeStrategy::kSampled;
  } else if (env == "user") {
    cfg.envelope = EnvelopeStrategy::kUser;
    cfg.user_R = kv.get_double("envelope.R");
    cfg.user_omega = kv.get_double("envelope.omega");
  } else {
    throw std::runtime_error("config key 'envelope.strategy': unknown "
                             "strategy '" + env + "'");
  }

  cfg.r = kv.get_double("cert.r", 0.0);
  if (kv.has("cert.T")) cfg.T = kv.get_double("cert.T");
  cfg.r_lo = kv.get_double("cert.r_lo", -1.0);
  cfg.r_hi = kv.get_double("cert.r_hi", 1.0);
  cfg.r_step = kv.get_double("cert.r_step", 0.005);

  cfg.sim.M_sim = kv.get_int("sim.M", 64);
  if (cfg.sim.M_sim < cfg.N + 1)
    throw std::runtime_error("sim.M must be at least problem.N + 1");
  cfg.sim.horizon = kv.get_double("sim.horizon", 1.0);
  cfg.sim.record_dt = kv.get_double("sim.record_dt", 0.01);
  cfg.sim.r = cfg.r;
  cfg.sim.schedule = parse_schedule(kv, cfg.T.value_or(0.0));
  cfg.sim.noise = parse_noise(kv);
  cfg.sim.fast_path = kv.get_int("sim.fast_path", 0) != 0;
  if (!cfg.T && cfg.sim.schedule.T > 0.0) cfg.T = cfg.sim.schedule.T;

  const std::string forcing = kv.get("forcing.kind", "zero");
  if (forcing == "zero") {
    cfg.sim.forcing.zero = true;
  } else if (forcing == "separable") {
    cfg.sim.forcing.zero = false;
    cfg.sim.forcing.space =
        parse_profile(kv, "forcing.space", "modal").modal(cfg.sim.M_sim);
    cfg.sim.forcing.time = parse_time_signal(kv);
  } else {
    throw std::runtime_error("config key 'forcing.kind': unknown kind '" +
                             forcing + "'");
  }

  cfg.ic_plant = parse_profile(kv, "sim.ic_plant", "modal");
  cfg.ic_observer = parse_profile(kv, "sim.ic_observer", "modal");

  if (kv.has("seed")) {
    cfg.sim.seed = kv.get_u64("seed");
    cfg.sim.has_seed = true;
  }

  cfg.oracle_profile = parse_profile(kv, "oracle.profile", "cospi");
  cfg.oracle_grid = kv.get_int("oracle.grid", 201);
  cfg.oracle_dt = kv.get_double("oracle.dt", 1e-6);
  cfg.oracle_horizon = kv.get_double("oracle.horizon", 0.01);
  cfg.oracle_convergence = kv.get_int("oracle.convergence", 0) != 0;

  cfg.out_dir = kv.get("out", "");
  return cfg;
}

}  // namespace ksobs
