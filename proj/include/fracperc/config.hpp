#pragma once

// Run configuration shared by all subcommands. The textual form is one
// `key = value` pair per line; `#` starts a comment. Values are resolved as
// defaults, then the config file, then command-line flags.

#include "fracperc/analytic.hpp"
#include "fracperc/core.hpp"
#include "fracperc/montecarlo.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace fracperc::config {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline const std::vector<std::string>& known_commands() {
  static const std::vector<std::string> commands{"curves", "simulate", "thresholds",
                                                 "verify", "render",   "oracle"};
  return commands;
}

// ---------------------------------------------------------------------------
// Scalars

inline std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string part;
  std::istringstream is(s);
  while (std::getline(is, part, sep)) parts.push_back(trim(part));
  if (!s.empty() && s.back() == sep) parts.emplace_back();
  return parts;
}

/// Accepts integers, fractions a/b and decimals with an optional exponent;
/// decimals are converted exactly (0.1 is 1/10).
inline Rational parse_rational(const std::string& raw) {
  const std::string s = trim(raw);
  auto fail = [&]() -> Rational { throw ConfigError("not a number: '" + raw + "'"); };
  if (s.empty()) return fail();
  if (const auto slash = s.find('/'); slash != std::string::npos) {
    try {
      const boost::multiprecision::cpp_int num(trim(s.substr(0, slash)));
      const boost::multiprecision::cpp_int den(trim(s.substr(slash + 1)));
      if (den == 0) return fail();
      return Rational(num, den);
    } catch (const std::exception&) {
      return fail();
    }
  }
  std::size_t i = 0;
  bool negative = false;
  if (s[i] == '+' || s[i] == '-') negative = s[i++] == '-';
  boost::multiprecision::cpp_int mantissa = 0;
  int scale = 0;
  bool digits = false, dot = false;
  for (; i < s.size() && s[i] != 'e' && s[i] != 'E'; ++i) {
    if (s[i] == '.') {
      if (dot) return fail();
      dot = true;
    } else if (s[i] >= '0' && s[i] <= '9') {
      mantissa = mantissa * 10 + (s[i] - '0');
      digits = true;
      if (dot) ++scale;
    } else {
      return fail();
    }
  }
  if (!digits) return fail();
  int exponent = 0;
  if (i < s.size()) {
    try {
      std::size_t used = 0;
      exponent = std::stoi(s.substr(i + 1), &used);
      if (used != s.size() - i - 1) return fail();
    } catch (const std::exception&) {
      return fail();
    }
  }
  exponent -= scale;
  if (std::abs(exponent) > 400) return fail();
  Rational value(mantissa);
  const Rational ten(10);
  value *= ipow(ten, exponent);
  return negative ? Rational(-value) : value;
}

/// Decimal form when exact with few digits, otherwise a/b.
inline std::string format_rational(const Rational& x) {
  using boost::multiprecision::cpp_int;
  const cpp_int num = boost::multiprecision::numerator(x);
  const cpp_int den = boost::multiprecision::denominator(x);
  if (den == 1) return num.str();
  cpp_int scaled_den = 1;
  for (int digits = 1; digits <= 30; ++digits) {
    scaled_den *= 10;
    if (scaled_den % den != 0) continue;
    const cpp_int value = num * (scaled_den / den);
    const bool negative = value < 0;
    std::string text = (negative ? cpp_int(-value) : value).str();
    if (static_cast<int>(text.size()) <= digits) text.insert(0, digits - text.size() + 1, '0');
    text.insert(text.size() - digits, ".");
    return (negative ? "-" : "") + text;
  }
  return to_string(x);
}

inline std::int64_t parse_int(const std::string& raw, const std::string& key) {
  try {
    std::size_t used = 0;
    const std::string s = trim(raw);
    const long long value = std::stoll(s, &used);
    if (used != s.size()) throw ConfigError("");
    return value;
  } catch (const std::exception&) {
    throw ConfigError(key + ": not an integer: '" + raw + "'");
  }
}

inline std::uint64_t parse_uint(const std::string& raw, const std::string& key) {
  const std::string s = trim(raw);
  if (s.empty() || s[0] == '-') throw ConfigError(key + ": not a non-negative integer: '" + raw + "'");
  try {
    std::size_t used = 0;
    const unsigned long long value = std::stoull(s, &used);
    if (used != s.size()) throw ConfigError("");
    return value;
  } catch (const std::exception&) {
    throw ConfigError(key + ": not a non-negative integer: '" + raw + "'");
  }
}

inline bool parse_bool(const std::string& raw, const std::string& key) {
  const std::string s = trim(raw);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError(key + ": not a boolean: '" + raw + "'");
}

// ---------------------------------------------------------------------------
// p specification: a single value, a comma list, or start:stop:step

struct PSpec {
  bool is_range = false;
  std::vector<Rational> list;
  Rational start{0}, stop{0}, step{0};

  [[nodiscard]] std::vector<Rational> values() const {
    if (!is_range) return list;
    std::vector<Rational> out;
    for (Rational p = start; p <= stop; p += step) out.push_back(p);
    return out;
  }

  friend bool operator==(const PSpec&, const PSpec&) = default;
};

inline PSpec parse_pspec(const std::string& raw) {
  PSpec spec;
  const std::string s = trim(raw);
  if (s.find(':') != std::string::npos) {
    const auto parts = split(s, ':');
    if (parts.size() != 3) throw ConfigError("p: range must be start:stop:step, got '" + raw + "'");
    spec.is_range = true;
    spec.start = parse_rational(parts[0]);
    spec.stop = parse_rational(parts[1]);
    spec.step = parse_rational(parts[2]);
    if (spec.step <= 0) throw ConfigError("p: range step must be positive");
    if (spec.start > spec.stop) throw ConfigError("p: range start exceeds stop");
    if ((spec.stop - spec.start) / spec.step > 1000000) throw ConfigError("p: range too long");
    return spec;
  }
  for (const auto& part : split(s, ',')) spec.list.push_back(parse_rational(part));
  if (spec.list.empty()) throw ConfigError("p: empty value");
  return spec;
}

inline std::string format_pspec(const PSpec& spec) {
  if (spec.is_range) {
    return format_rational(spec.start) + ":" + format_rational(spec.stop) + ":" +
           format_rational(spec.step);
  }
  std::string out;
  for (std::size_t i = 0; i < spec.list.size(); ++i) {
    out += (i ? "," : "") + format_rational(spec.list[i]);
  }
  return out;
}

struct SampleOverride {
  Rational p_max{0};
  std::uint64_t samples = 0;
  friend bool operator==(const SampleOverride&, const SampleOverride&) = default;
};

// ---------------------------------------------------------------------------

struct RunConfig {
  std::string command = "simulate";
  std::vector<int> M{2};
  int d = 2;
  PSpec p;
  /// Empty: chosen per M so that M^n <= 4096.
  std::vector<int> n;
  std::uint64_t samples = 2000;
  std::optional<std::uint64_t> seed;
  std::uint64_t sample_index = 0;
  int connectivity = 8;
  std::vector<std::string> targets{"F", "C"};
  std::vector<std::string> functionals{"V0", "V1", "V2"};
  std::string out = "out";
  unsigned workers = 0;
  std::uint64_t shards = 0;
  bool coupled = true;
  std::uint64_t memory_budget = std::uint64_t{2} << 30;
  /// Replicates for p <= p_max; the first matching entry wins.
  std::vector<SampleOverride> sample_override;
  bool full_protocol = false;
  bool spanning = false;
  bool two_copies = false;
  std::uint64_t geometry_grids = 1000;
  bool tamper = false;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;

  [[nodiscard]] std::uint64_t samples_for(const Rational& pv) const {
    for (const auto& o : sample_override) {
      if (pv <= o.p_max) return o.samples;
    }
    return samples;
  }

  [[nodiscard]] std::vector<int> levels_for(int m) const {
    if (!n.empty()) return n;
    int level = 0;
    std::int64_t side = 1;
    while (side * m <= 4096) {
      side *= m;
      ++level;
    }
    return {level};
  }
};

inline const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys{
      "command",  "M",         "d",       "p",             "n",
      "samples",  "seed",      "sample_index", "connectivity", "targets",
      "functionals", "out",    "workers", "shards",        "coupled",
      "memory_budget", "sample_override", "full_protocol", "spanning", "two_copies",
      "geometry_grids", "tamper"};
  return keys;
}

namespace detail {

template <class T, class Format>
std::string join(const std::vector<T>& values, Format&& format) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) out += (i ? "," : "") + format(values[i]);
  return out;
}

inline std::vector<int> parse_int_list(const std::string& raw, const std::string& key) {
  std::vector<int> out;
  for (const auto& part : split(trim(raw), ',')) {
    const auto v = parse_int(part, key);
    if (v < INT32_MIN || v > INT32_MAX) throw ConfigError(key + ": out of range");
    out.push_back(static_cast<int>(v));
  }
  if (out.empty()) throw ConfigError(key + ": empty list");
  return out;
}

}  // namespace detail

/// Defaults for one subcommand.
inline RunConfig defaults_for(const std::string& command) {
  RunConfig cfg;
  cfg.command = command;
  if (command == "curves") {
    cfg.M = {2, 3, 4, 8, 16, 64};
    cfg.n = {1, 2, 4, 8, 16};
    cfg.p = parse_pspec("0.26:1:0.01");
  } else if (command == "simulate") {
    cfg.p = parse_pspec("0.11:0.99:0.02");
  } else if (command == "thresholds") {
    cfg.M = {2, 3, 4, 5, 6, 8, 16, 32, 64, 128, 256, 512, 1024};
    cfg.p = parse_pspec("1");
  } else if (command == "verify") {
    cfg.p = parse_pspec("1");
    cfg.seed = 20240917;
  } else if (command == "render") {
    cfg.M = {3};
    cfg.p = parse_pspec("0.7");
    cfg.n = {5};
    cfg.out = "realization.pbm";
  } else if (command == "oracle") {
    cfg.p = parse_pspec("1/2");
    cfg.n = {1};
    cfg.functionals = {"V0"};
    cfg.targets = {"F"};
  } else {
    throw ConfigError("unknown subcommand '" + command + "'");
  }
  return cfg;
}

inline void set_value(RunConfig& cfg, const std::string& key, const std::string& raw) {
  const std::string value = trim(raw);
  if (key == "command") {
    const auto& commands = known_commands();
    if (std::find(commands.begin(), commands.end(), value) == commands.end()) {
      throw ConfigError("unknown subcommand '" + value + "'");
    }
    cfg.command = value;
  } else if (key == "M") {
    cfg.M = detail::parse_int_list(value, key);
  } else if (key == "d") {
    cfg.d = static_cast<int>(parse_int(value, key));
  } else if (key == "p") {
    cfg.p = parse_pspec(value);
  } else if (key == "n") {
    cfg.n = value == "auto" ? std::vector<int>{} : detail::parse_int_list(value, key);
  } else if (key == "samples") {
    cfg.samples = parse_uint(value, key);
  } else if (key == "seed") {
    if (value.empty() || value == "none") {
      cfg.seed.reset();
    } else {
      cfg.seed = parse_uint(value, key);
    }
  } else if (key == "sample_index") {
    cfg.sample_index = parse_uint(value, key);
  } else if (key == "connectivity") {
    cfg.connectivity = static_cast<int>(parse_int(value, key));
  } else if (key == "targets") {
    cfg.targets = split(value, ',');
  } else if (key == "functionals") {
    cfg.functionals = split(value, ',');
  } else if (key == "out") {
    if (value.empty()) throw ConfigError("out: empty path");
    cfg.out = value;
  } else if (key == "workers") {
    const auto w = parse_uint(value, key);
    if (w > 4096) throw ConfigError("workers: at most 4096");
    cfg.workers = static_cast<unsigned>(w);
  } else if (key == "shards") {
    cfg.shards = parse_uint(value, key);
  } else if (key == "coupled") {
    cfg.coupled = parse_bool(value, key);
  } else if (key == "memory_budget") {
    cfg.memory_budget = parse_uint(value, key);
  } else if (key == "sample_override") {
    cfg.sample_override.clear();
    if (value.empty() || value == "none") return;
    for (const auto& item : split(value, ',')) {
      const auto parts = split(item, ':');
      if (parts.size() != 2) {
        throw ConfigError("sample_override: expected p_max:samples, got '" + item + "'");
      }
      cfg.sample_override.push_back({parse_rational(parts[0]), parse_uint(parts[1], key)});
    }
  } else if (key == "full_protocol") {
    cfg.full_protocol = parse_bool(value, key);
  } else if (key == "spanning") {
    cfg.spanning = parse_bool(value, key);
  } else if (key == "two_copies") {
    cfg.two_copies = parse_bool(value, key);
  } else if (key == "geometry_grids") {
    cfg.geometry_grids = parse_uint(value, key);
  } else if (key == "tamper") {
    cfg.tamper = parse_bool(value, key);
  } else {
    throw ConfigError("unknown configuration key '" + key + "'");
  }
}

/// Canonical textual form; parse_text(to_text(c)) == c.
inline std::string to_text(const RunConfig& cfg) {
  std::ostringstream os;
  auto line = [&os](const std::string& key, const std::string& value) {
    os << key << " = " << value << '\n';
  };
  auto str = [](const std::string& s) { return s; };
  line("command", cfg.command);
  line("M", detail::join(cfg.M, [](int m) { return std::to_string(m); }));
  line("d", std::to_string(cfg.d));
  line("p", format_pspec(cfg.p));
  line("n", cfg.n.empty() ? "auto" : detail::join(cfg.n, [](int v) { return std::to_string(v); }));
  line("samples", std::to_string(cfg.samples));
  line("seed", cfg.seed ? std::to_string(*cfg.seed) : "none");
  line("sample_index", std::to_string(cfg.sample_index));
  line("connectivity", std::to_string(cfg.connectivity));
  line("targets", detail::join(cfg.targets, str));
  line("functionals", detail::join(cfg.functionals, str));
  line("out", cfg.out);
  line("workers", std::to_string(cfg.workers));
  line("shards", std::to_string(cfg.shards));
  line("coupled", cfg.coupled ? "true" : "false");
  line("memory_budget", std::to_string(cfg.memory_budget));
  line("sample_override",
       cfg.sample_override.empty()
           ? "none"
           : detail::join(cfg.sample_override, [](const SampleOverride& o) {
               return format_rational(o.p_max) + ":" + std::to_string(o.samples);
             }));
  line("full_protocol", cfg.full_protocol ? "true" : "false");
  line("spanning", cfg.spanning ? "true" : "false");
  line("two_copies", cfg.two_copies ? "true" : "false");
  line("geometry_grids", std::to_string(cfg.geometry_grids));
  line("tamper", cfg.tamper ? "true" : "false");
  return os.str();
}

/// Parses `key = value` lines into an ordered map; later lines win.
inline std::map<std::string, std::string> parse_pairs(const std::string& text) {
  std::map<std::string, std::string> pairs;
  std::istringstream is(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(is, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const auto& keys = known_keys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw ConfigError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    if (!pairs.emplace(key, trim(line.substr(eq + 1))).second) {
      throw ConfigError("config line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
  }
  return pairs;
}

inline void apply_pairs(RunConfig& cfg, const std::map<std::string, std::string>& pairs) {
  for (const auto& [key, value] : pairs) {
    if (key != "command") set_value(cfg, key, value);
  }
}

inline RunConfig parse_text(const std::string& text) {
  const auto pairs = parse_pairs(text);
  const auto command = pairs.find("command");
  RunConfig cfg = defaults_for(command == pairs.end() ? "simulate" : command->second);
  apply_pairs(cfg, pairs);
  return cfg;
}

/// Replaces the fields that define the full-size simulation protocol unless the
/// caller set them explicitly.
inline void apply_full_protocol(RunConfig& cfg, const std::set<std::string>& explicit_keys) {
  if (!cfg.full_protocol) return;
  if (!explicit_keys.count("M")) cfg.M = {2};
  if (!explicit_keys.count("n")) cfg.n = {16};
  if (!explicit_keys.count("p")) cfg.p = parse_pspec("0.11:0.99:0.02");
  if (!explicit_keys.count("samples")) cfg.samples = 75000;
}

/// Semantic checks, including the analytic domain rules for limit curves.
inline void validate(const RunConfig& cfg) {
  if (cfg.M.empty()) throw ConfigError("M: empty list");
  for (int m : cfg.M) {
    if (m < 2) throw ConfigError("M must be >= 2, got " + std::to_string(m));
  }
  if (cfg.d != 1 && cfg.d != 2) throw ConfigError("d must be 1 or 2");
  const auto ps = cfg.p.values();
  if (ps.empty()) throw ConfigError("p: no values");
  for (const auto& pv : ps) {
    if (pv < 0 || pv > 1) throw ConfigError("p must lie in [0,1], got " + format_rational(pv));
  }
  for (int level : cfg.n) {
    if (level < 0) throw ConfigError("n must be >= 0");
  }
  if (cfg.samples < 2) throw ConfigError("samples must be >= 2");
  if (cfg.samples > montecarlo::kMaxSamples) throw ConfigError("samples too large");
  for (const auto& o : cfg.sample_override) {
    if (o.samples < 2 || o.samples > montecarlo::kMaxSamples) {
      throw ConfigError("sample_override: samples must be in [2, 2^40]");
    }
  }
  if (cfg.connectivity != 4 && cfg.connectivity != 8) {
    throw ConfigError("connectivity must be 4 or 8");
  }
  for (const auto& t : cfg.targets) {
    if (t != "F" && t != "C") throw ConfigError("targets: unknown target '" + t + "'");
  }
  if (cfg.targets.empty()) throw ConfigError("targets: empty list");
  if (cfg.functionals.empty()) throw ConfigError("functionals: empty list");

  const std::string& cmd = cfg.command;
  auto single = [&](const char* what, std::size_t count) {
    if (count != 1) throw ConfigError(cmd + ": " + what + " must be a single value");
  };
  if (cmd == "simulate") {
    for (const auto& f : cfg.functionals) montecarlo::functional_from_string(f);
  } else if (cmd == "curves" || cmd == "thresholds") {
    if (cfg.d != 2) throw ConfigError(cmd + ": only d = 2 curves are available");
  }
  if (cmd == "curves") {
    for (int level : cfg.n) {
      if (level < 1) throw ConfigError("curves: n must be >= 1");
    }
    for (int m : cfg.M) {
      for (const auto& pv : ps) {
        try {
          analytic::limit_Vck_2d(make_params(m, to_double(pv), 2), 0);
        } catch (const DomainError& e) {
          throw ConfigError("curves: p = " + format_rational(pv) + " outside the domain for M = " +
                            std::to_string(m) + " (" + e.what() + ")");
        }
      }
    }
  }
  if (cmd == "render" || cmd == "oracle") {
    single("M", cfg.M.size());
    single("p", ps.size());
    single("n", cfg.n.size());
  }
  if (cmd == "oracle") {
    single("functionals", cfg.functionals.size());
    single("targets", cfg.targets.size());
    const std::set<std::string> allowed = cfg.d == 1
        ? std::set<std::string>{"V0", "V1", "N", "contains0", "contains1"}
        : std::set<std::string>{"V0",         "V1",         "V2",         "side_V0",
                                "side_V1",    "corner2_V0", "corner2_V1", "corner3_V0",
                                "corner3_V1", "corner4_V0", "corner4_V1"};
    if (!allowed.count(cfg.functionals.front())) {
      throw ConfigError("oracle: functional '" + cfg.functionals.front() +
                        "' not available for d = " + std::to_string(cfg.d));
    }
  }
}

}  // namespace fracperc::config
