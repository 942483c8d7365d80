#ifndef BLOWUP_CONFIG_HPP
#define BLOWUP_CONFIG_HPP

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace blowup::harness {

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

inline const std::vector<std::string>& known_commands() {
  static const std::vector<std::string> cmds{
      "profile.shoot",      "profile.scan",    "profile.singular", "semigroup.norm",  "semigroup.mehler",
      "semigroup.check",    "evolve.run",      "evolve.wframe",    "verify.convergence", "verify.theorem2",
      "verify.theorem4",    "verify.loglog",   "verify.classify",  "verify.refined",  "suite"};
  return cmds;
}

inline const std::vector<std::string>& known_suites() {
  static const std::vector<std::string> s{"semigroup", "profiles", "evolution", "theorems", "all"};
  return s;
}

/// Experiment description. Every field has a documented default except `command`.
struct ExperimentConfig {
  // [general]
  std::string command;
  std::string output;  // empty selects $BLOWUP_OUTPUT_ROOT/<command> or ./blowup_out/<command>
  int threads = 1;
  int seed = 20240917;
  // [problem]
  std::string nonlinearity = "exponential";
  double p = 3.0;
  int N = 3;
  double R = 1.0;
  int M = 2048;
  // [profile]
  double alpha = 0.0;
  double alpha_lo = 0.0;
  double alpha_hi = 20.0;
  int scan_grid = 200;
  int candidate = 0;
  // [semigroup]
  double t = 1.0;
  double q = 2.0;
  double beta = 2.0;
  double r = 0.0;
  double r_tilde = 0.0;
  double xi = 0.0;
  int draws = 1000;
  double bump_amplitude = 1.0;
  double bump_center = 0.0;
  double bump_width = 1.0;
  // [evolve]
  double amplitude = 8.0;
  double t_max = 10.0;
  double u_stop = 0.0;  // 0 selects the nonlinearity default
  double dt_max = 1e-3;
  double c_safety = 0.1;
  double Y = 10.0;
  double s_span = 1.0;
  // [verify]
  std::string source = "exact";
  double tau_final = 1e-8;
  double x_lo = 1e-3;
  double x_hi = 0.1;
  double tol_prof = 0.05;
  double tol_conv = 1e-2;
  double tol_fit = 1e-2;
  double a0 = 0.04;
  int halvings = 3;
  // [suite]
  std::string suite = "all";

  bool operator==(const ExperimentConfig&) const = default;
};

namespace detail {

using Member = std::variant<std::string ExperimentConfig::*, int ExperimentConfig::*, double ExperimentConfig::*>;

struct Key {
  std::string_view name;
  std::string_view section;
  Member member;
};

inline const std::vector<Key>& schema() {
  using C = ExperimentConfig;
  static const std::vector<Key> keys{
      {"command", "general", &C::command},       {"output", "general", &C::output},
      {"threads", "general", &C::threads},       {"seed", "general", &C::seed},
      {"nonlinearity", "problem", &C::nonlinearity}, {"p", "problem", &C::p},
      {"N", "problem", &C::N},                   {"R", "problem", &C::R},
      {"M", "problem", &C::M},                   {"alpha", "profile", &C::alpha},
      {"alpha_lo", "profile", &C::alpha_lo},     {"alpha_hi", "profile", &C::alpha_hi},
      {"scan_grid", "profile", &C::scan_grid},   {"candidate", "profile", &C::candidate},
      {"t", "semigroup", &C::t},                 {"q", "semigroup", &C::q},
      {"beta", "semigroup", &C::beta},           {"r", "semigroup", &C::r},
      {"r_tilde", "semigroup", &C::r_tilde},     {"xi", "semigroup", &C::xi},
      {"draws", "semigroup", &C::draws},         {"bump_amplitude", "semigroup", &C::bump_amplitude},
      {"bump_center", "semigroup", &C::bump_center}, {"bump_width", "semigroup", &C::bump_width},
      {"amplitude", "evolve", &C::amplitude},    {"t_max", "evolve", &C::t_max},
      {"u_stop", "evolve", &C::u_stop},          {"dt_max", "evolve", &C::dt_max},
      {"c_safety", "evolve", &C::c_safety},      {"Y", "evolve", &C::Y},
      {"s_span", "evolve", &C::s_span},          {"source", "verify", &C::source},
      {"tau_final", "verify", &C::tau_final},    {"x_lo", "verify", &C::x_lo},
      {"x_hi", "verify", &C::x_hi},              {"tol_prof", "verify", &C::tol_prof},
      {"tol_conv", "verify", &C::tol_conv},      {"tol_fit", "verify", &C::tol_fit},
      {"a0", "verify", &C::a0},                  {"halvings", "verify", &C::halvings},
      {"suite", "suite", &C::suite}};
  return keys;
}

inline constexpr std::array<std::string_view, 7> kSections{"general", "problem", "profile", "semigroup",
                                                           "evolve",  "verify",  "suite"};

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

[[noreturn]] inline void fail(int line, const std::string& msg) {
  throw ConfigError(line > 0 ? "line " + std::to_string(line) + ": " + msg : msg);
}

inline void assign(ExperimentConfig& c, const Key& key, const std::string& value, int line) {
  const std::string name(key.name);
  std::visit(
      [&](auto member) {
        using T = std::remove_cvref_t<decltype(c.*member)>;
        if constexpr (std::is_same_v<T, std::string>) {
          c.*member = value;
        } else if constexpr (std::is_same_v<T, int>) {
          long v = 0;
          const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
          if (ec != std::errc() || ptr != value.data() + value.size() || v < INT32_MIN || v > INT32_MAX) {
            fail(line, name + " must be integer");
          }
          c.*member = static_cast<int>(v);
        } else {
          std::size_t used = 0;
          double v = 0.0;
          try {
            v = std::stod(value, &used);
          } catch (const std::exception&) {
            fail(line, name + " must be a real number");
          }
          if (used != value.size() || !std::isfinite(v)) fail(line, name + " must be a real number");
          c.*member = v;
        }
      },
      key.member);
}

}  // namespace detail

/// Checks value ranges; throws ConfigError naming the offending key.
inline void validate(const ExperimentConfig& c) {
  auto need = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
  };
  const auto& cmds = known_commands();
  need(!c.command.empty(), "missing required key: command");
  need(std::find(cmds.begin(), cmds.end(), c.command) != cmds.end(), "unknown command: " + c.command);
  need(c.nonlinearity == "exponential" || c.nonlinearity == "power", "nonlinearity must be exponential or power");
  need(c.nonlinearity != "power" || c.p > 1.0, "p must be > 1");
  need(c.N >= 1, "N must be >= 1");
  need(c.R > 0.0, "R must be > 0");
  need(c.M >= 8, "M must be >= 8");
  need(c.threads >= 1, "threads must be >= 1");
  need(c.seed >= 0, "seed must be >= 0");
  need(c.alpha >= 0.0, "alpha must be >= 0");
  need(c.alpha_lo >= 0.0 && c.alpha_hi > c.alpha_lo, "alpha range must satisfy 0 <= alpha_lo < alpha_hi");
  need(c.scan_grid >= 2, "scan_grid must be >= 2");
  need(c.candidate >= 0, "candidate must be >= 0");
  need(c.t > 0.0, "t must be > 0");
  need(c.q >= 1.0 && c.beta >= 1.0, "q and beta must be >= 1");
  need(c.r >= 0.0 && c.r_tilde >= 0.0, "r and r_tilde must be >= 0");
  need(c.draws >= 1, "draws must be >= 1");
  need(c.bump_amplitude >= 0.0 && c.bump_center >= 0.0 && c.bump_width > 0.0, "invalid bump parameters");
  need(c.t_max > 0.0 && c.dt_max > 0.0 && c.c_safety > 0.0, "t_max, dt_max and c_safety must be > 0");
  need(c.u_stop >= 0.0, "u_stop must be >= 0");
  need(c.Y > 0.0 && c.s_span > 0.0, "Y and s_span must be > 0");
  need(c.source == "exact" || c.source == "run", "source must be exact or run");
  need(c.tau_final > 0.0, "tau_final must be > 0");
  need(c.x_lo > 0.0 && c.x_hi > c.x_lo, "window must satisfy 0 < x_lo < x_hi");
  need(c.tol_prof > 0.0 && c.tol_conv > 0.0 && c.tol_fit > 0.0, "tolerances must be positive");
  need(c.a0 > 0.0 && c.halvings >= 1, "a0 must be > 0 and halvings >= 1");
  const auto& suites = known_suites();
  need(std::find(suites.begin(), suites.end(), c.suite) != suites.end(), "unknown suite: " + c.suite);
}

/// Sets one key from its textual value, with the same type rules as the file format.
inline void set_value(ExperimentConfig& c, const std::string& key, const std::string& value, int line = 0) {
  const auto& keys = detail::schema();
  const auto it = std::find_if(keys.begin(), keys.end(), [&](const auto& k) { return k.name == key; });
  if (it == keys.end()) detail::fail(line, "unknown key: " + key);
  detail::assign(c, *it, value, line);
}

/// Parses `key = value` lines grouped under optional `[section]` headers; `#` starts a comment.
/// Keys before the first header may come from any section; keys under a header must belong to it.
/// No range validation is done, so that command-line overrides can be applied first.
inline ExperimentConfig parse_config_unvalidated(std::string_view text) {
  ExperimentConfig c;
  std::string section;
  std::set<std::string> seen;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string body = detail::trim(std::string_view(raw).substr(0, hash));
    if (body.empty()) continue;
    if (body.front() == '[') {
      if (body.back() != ']') detail::fail(line, "malformed section header");
      section = detail::trim(std::string_view(body).substr(1, body.size() - 2));
      const auto& s = detail::kSections;
      if (std::find(s.begin(), s.end(), section) == s.end()) detail::fail(line, "unknown section: " + section);
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos) detail::fail(line, "expected key=value");
    const std::string key = detail::trim(std::string_view(body).substr(0, eq));
    const std::string value = detail::trim(std::string_view(body).substr(eq + 1));
    const auto& keys = detail::schema();
    const auto it = std::find_if(keys.begin(), keys.end(), [&](const auto& k) { return k.name == key; });
    if (it == keys.end()) detail::fail(line, "unknown key: " + key);
    if (!section.empty() && it->section != section) {
      detail::fail(line, "key " + key + " belongs to section [" + std::string(it->section) + "]");
    }
    if (!seen.insert(key).second) detail::fail(line, "duplicate key: " + key);
    detail::assign(c, *it, value, line);
  }
  return c;
}

/// Parses and validates a complete configuration.
inline ExperimentConfig parse_config(std::string_view text) {
  auto c = parse_config_unvalidated(text);
  validate(c);
  return c;
}

/// Writes every key, grouped by section, so that parse_config(serialize(c)) == c.
inline std::string serialize(const ExperimentConfig& c) {
  std::ostringstream out;
  for (const auto section : detail::kSections) {
    out << '[' << section << "]\n";
    for (const auto& k : detail::schema()) {
      if (k.section != section) continue;
      out << k.name << " = ";
      std::visit(
          [&](auto member) {
            using T = std::remove_cvref_t<decltype(c.*member)>;
            if constexpr (std::is_same_v<T, double>) {
              out << detail::format_double(c.*member);
            } else {
              out << c.*member;
            }
          },
          k.member);
      out << '\n';
    }
  }
  return out.str();
}

}  // namespace blowup::harness

#endif  // BLOWUP_CONFIG_HPP
