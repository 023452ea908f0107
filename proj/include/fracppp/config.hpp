#pragma once

// Run configuration: a flat `key = value` text file, '#' starts a comment.  Every key is
// known in advance; unknown or repeated keys are rejected.
//
//   r = 15          # model parameters, all required
//   alpha = 0.8
//   s = 0.05
//   init = 30, 5, 10
//   sweep_range = 0.055, 0.085

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "fracppp/analysis.hpp"
#include "fracppp/errors.hpp"
#include "fracppp/model.hpp"
#include "fracppp/simulation.hpp"

namespace fracppp {

struct RunConfig {
  ModelParams model;
  double alpha = 1.0;
  std::vector<double> alphas;  ///< thresholds table rows; falls back to {alpha}
  std::optional<double> s;
  SweepParameter sweep_parameter = SweepParameter::StepSize;
  std::optional<SweepRange> sweep;
  State init{30.0, 5.0, 10.0};
  SimConfig sim;
  std::size_t renorm_interval = 1;
  double lle_zero_tol = 5e-5;
  bool continuation = false;
  bool require_convergence = false;
  std::optional<double> s9_max;
  std::string output_dir = "out";

  friend bool operator==(const RunConfig&, const RunConfig&) = default;

  [[nodiscard]] std::vector<double> threshold_alphas() const {
    return alphas.empty() ? std::vector<double>{alpha} : alphas;
  }
};

/// Shortest decimal text that reads back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

inline std::string format_fixed(double v, int decimals) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, decimals);
  return {buf, res.ptr};
}

namespace detail {

inline std::string_view trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r");
  return text.substr(first, last - first + 1);
}

inline std::vector<std::string_view> split_list(std::string_view text) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    parts.push_back(trim(text.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return parts;
}

inline double parse_real(std::string_view key, std::string_view text) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (res.ec != std::errc{} || res.ptr != end || !std::isfinite(v)) {
    throw ConfigError("key '" + std::string(key) + "': expected a real number, got '" +
                      std::string(text) + "'");
  }
  return v;
}

inline std::size_t parse_count(std::string_view key, std::string_view text) {
  std::size_t v = 0;
  const auto* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (res.ec != std::errc{} || res.ptr != end) {
    throw ConfigError("key '" + std::string(key) + "': expected a non-negative integer, got '" +
                      std::string(text) + "'");
  }
  return v;
}

inline bool parse_bool(std::string_view key, std::string_view text) {
  if (text == "true" || text == "yes" || text == "1") return true;
  if (text == "false" || text == "no" || text == "0") return false;
  throw ConfigError("key '" + std::string(key) + "': expected true or false");
}

inline std::vector<double> parse_reals(std::string_view key, std::string_view text,
                                       std::size_t expected = 0) {
  std::vector<double> out;
  for (auto part : split_list(text)) out.push_back(parse_real(key, part));
  if (expected != 0 && out.size() != expected) {
    throw ConfigError("key '" + std::string(key) + "': expected " + std::to_string(expected) +
                      " comma-separated values");
  }
  return out;
}

inline const std::vector<std::string_view>& known_keys() {
  static const std::vector<std::string_view> keys{
      "r",         "K",           "lambda",          "m",
      "mu",        "a",           "theta",           "d",
      "alpha",     "alphas",      "s",               "sweep_parameter",
      "sweep_range", "n_points",  "init",            "n_steps",
      "transient", "record_every", "convergence_tol", "divergence_bound",
      "renorm_interval", "lle_zero_tol", "continuation", "require_convergence",
      "s9_max",    "output_dir"};
  return keys;
}

}  // namespace detail

using ConfigEntries = std::map<std::string, std::string, std::less<>>;

/// Splits config text into key/value pairs; rejects unknown keys, repeats and malformed lines.
inline ConfigEntries parse_config_entries(std::string_view text) {
  ConfigEntries entries;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? nl : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (eq == std::string_view::npos) throw ConfigError(where + "expected 'key = value'");
    const auto key = detail::trim(line.substr(0, eq));
    const auto value = detail::trim(line.substr(eq + 1));
    const auto& keys = detail::known_keys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw ConfigError(where + "unknown key '" + std::string(key) + "'");
    }
    if (value.empty()) throw ConfigError(where + "empty value for '" + std::string(key) + "'");
    if (!entries.emplace(std::string(key), std::string(value)).second) {
      throw ConfigError(where + "repeated key '" + std::string(key) + "'");
    }
  }
  return entries;
}

/// Builds and validates a RunConfig from parsed entries.
inline RunConfig build_config(const ConfigEntries& entries) {
  using namespace detail;
  RunConfig cfg;
  auto get = [&](std::string_view key) -> std::optional<std::string_view> {
    const auto it = entries.find(key);
    if (it == entries.end()) return std::nullopt;
    return std::string_view(it->second);
  };
  auto real = [&](std::string_view key, double& dst) {
    if (auto v = get(key)) dst = parse_real(key, *v);
  };
  auto required = [&](std::string_view key, double& dst) {
    if (!get(key)) throw ConfigError("missing required key '" + std::string(key) + "'");
    real(key, dst);
  };
  auto count = [&](std::string_view key, std::size_t& dst) {
    if (auto v = get(key)) dst = parse_count(key, *v);
  };
  auto flag = [&](std::string_view key, bool& dst) {
    if (auto v = get(key)) dst = parse_bool(key, *v);
  };

  required("r", cfg.model.r);
  required("K", cfg.model.K);
  required("lambda", cfg.model.lambda);
  required("m", cfg.model.m);
  required("mu", cfg.model.mu);
  required("a", cfg.model.a);
  required("theta", cfg.model.theta);
  required("d", cfg.model.d);
  real("alpha", cfg.alpha);
  if (auto v = get("alphas")) cfg.alphas = parse_reals("alphas", *v);
  if (auto v = get("s")) cfg.s = parse_real("s", *v);
  if (auto v = get("sweep_parameter")) {
    if (*v == "s") {
      cfg.sweep_parameter = SweepParameter::StepSize;
    } else if (*v == "alpha") {
      cfg.sweep_parameter = SweepParameter::Order;
    } else {
      throw ConfigError("sweep_parameter must be 's' or 'alpha'");
    }
  }
  if (auto v = get("sweep_range")) {
    const auto lohi = parse_reals("sweep_range", *v, 2);
    cfg.sweep = SweepRange{lohi[0], lohi[1], 200};
  }
  if (auto v = get("n_points")) {
    if (!cfg.sweep) throw ConfigError("n_points given without sweep_range");
    cfg.sweep->n_points = parse_count("n_points", *v);
  }
  if (auto v = get("init")) {
    const auto xyz = parse_reals("init", *v, 3);
    cfg.init = {xyz[0], xyz[1], xyz[2]};
  }
  count("n_steps", cfg.sim.n_steps);
  count("transient", cfg.sim.transient);
  count("record_every", cfg.sim.record_every);
  real("convergence_tol", cfg.sim.convergence_tol);
  real("divergence_bound", cfg.sim.divergence_bound);
  count("renorm_interval", cfg.renorm_interval);
  real("lle_zero_tol", cfg.lle_zero_tol);
  flag("continuation", cfg.continuation);
  flag("require_convergence", cfg.require_convergence);
  if (auto v = get("s9_max")) cfg.s9_max = parse_real("s9_max", *v);
  if (auto v = get("output_dir")) cfg.output_dir = std::string(*v);

  try {
    validate(cfg.model);
    for (double al : cfg.threshold_alphas()) (void)Discretization(al, 1.0);
    (void)Discretization(cfg.alpha, cfg.s.value_or(1.0));
    check_initial_state(cfg.init);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  validate(cfg.sim);
  if (cfg.sweep) validate(*cfg.sweep, cfg.sweep_parameter);
  if (cfg.renorm_interval == 0) throw ConfigError("renorm_interval must be at least 1");
  if (!(cfg.lle_zero_tol >= 0.0)) throw ConfigError("lle_zero_tol must be non-negative");
  if (cfg.s9_max && !(*cfg.s9_max > 0.0)) throw ConfigError("s9_max must be positive");
  return cfg;
}

inline RunConfig parse_config(std::string_view text) {
  return build_config(parse_config_entries(text));
}

inline ConfigEntries read_config_entries(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_entries(buf.str());
}

inline RunConfig load_config(const std::string& path) {
  return build_config(read_config_entries(path));
}

/// Canonical text form; parse_config(dump_config(c)) == c.
inline std::string dump_config(const RunConfig& cfg) {
  std::ostringstream os;
  auto line = [&os](std::string_view key, const std::string& value) {
    os << key << " = " << value << '\n';
  };
  auto list = [](std::initializer_list<double> values) {
    std::string out;
    for (double v : values) {
      if (!out.empty()) out += ", ";
      out += format_double(v);
    }
    return out;
  };
  const auto& m = cfg.model;
  os << "# model\n";
  line("r", format_double(m.r));
  line("K", format_double(m.K));
  line("lambda", format_double(m.lambda));
  line("m", format_double(m.m));
  line("mu", format_double(m.mu));
  line("a", format_double(m.a));
  line("theta", format_double(m.theta));
  line("d", format_double(m.d));
  os << "# discretization\n";
  line("alpha", format_double(cfg.alpha));
  if (!cfg.alphas.empty()) {
    std::string text;
    for (double v : cfg.alphas) text += (text.empty() ? "" : ", ") + format_double(v);
    line("alphas", text);
  }
  if (cfg.s) line("s", format_double(*cfg.s));
  line("sweep_parameter", std::string(label(cfg.sweep_parameter)));
  if (cfg.sweep) {
    line("sweep_range", list({cfg.sweep->lo, cfg.sweep->hi}));
    line("n_points", std::to_string(cfg.sweep->n_points));
  }
  os << "# simulation\n";
  line("init", list({cfg.init.x, cfg.init.y, cfg.init.z}));
  line("n_steps", std::to_string(cfg.sim.n_steps));
  line("transient", std::to_string(cfg.sim.transient));
  line("record_every", std::to_string(cfg.sim.record_every));
  line("convergence_tol", format_double(cfg.sim.convergence_tol));
  line("divergence_bound", format_double(cfg.sim.divergence_bound));
  line("require_convergence", cfg.require_convergence ? "true" : "false");
  os << "# analysis\n";
  line("renorm_interval", std::to_string(cfg.renorm_interval));
  line("lle_zero_tol", format_double(cfg.lle_zero_tol));
  line("continuation", cfg.continuation ? "true" : "false");
  if (cfg.s9_max) line("s9_max", format_double(*cfg.s9_max));
  line("output_dir", cfg.output_dir);
  return os.str();
}

}  // namespace fracppp
