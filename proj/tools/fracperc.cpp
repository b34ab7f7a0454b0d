// Command-line front end: curves, simulate, thresholds, verify, render, oracle.
//
// Exit codes: 0 success, 2 configuration error, 3 verification failure,
// 4 resource guard (lattice or enumeration too large).

#include "fracperc/analytic.hpp"
#include "fracperc/config.hpp"
#include "fracperc/geometry.hpp"
#include "fracperc/io.hpp"
#include "fracperc/montecarlo.hpp"
#include "fracperc/oracle.hpp"
#include "fracperc/sampler.hpp"
#include "fracperc/thresholds.hpp"
#include "fracperc/verify.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using fracperc::Rational;
using fracperc::Target;
using fracperc::config::RunConfig;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitVerify = 3;
constexpr int kExitResource = 4;

Target parse_target(const std::string& t) { return t == "F" ? Target::F : Target::C; }

double to_d(const Rational& x) { return fracperc::to_double(x); }

json manifest_base(const RunConfig& cfg, double seconds) {
  const std::string text = fracperc::config::to_text(cfg);
  json m;
  m["command"] = cfg.command;
  m["config"] = text;
  m["config_hash"] = fracperc::io::config_hash(text);
  m["seed"] = cfg.seed ? json(*cfg.seed) : json(nullptr);
  m["seconds"] = seconds;
  return m;
}

void ensure_directory(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create directory " + dir + ": " + ec.message());
}

class Stopwatch {
 public:
  [[nodiscard]] double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// ---------------------------------------------------------------------------

int cmd_curves(const RunConfig& cfg) {
  namespace an = fracperc::analytic;
  Stopwatch clock;
  ensure_directory(cfg.out);
  const auto ps = cfg.p.values();
  json outputs = json::array();

  for (int M : cfg.M) {
    fracperc::io::WideTable f_table, c_table;
    f_table.header = {"p"};
    c_table.header = {"p"};
    for (int level : cfg.n) {
      f_table.header.push_back("n=" + std::to_string(level));
      c_table.header.push_back("n=" + std::to_string(level));
    }
    f_table.header.push_back("n=inf");
    c_table.header.push_back("n=inf");
    for (const auto& pr : ps) {
      const auto P = fracperc::make_params(M, to_d(pr), 2);
      std::vector<double> f_row{P.p}, c_row{P.p};
      for (int level : cfg.n) {
        f_row.push_back(an::vbar0_2d_finite(P, level));
        c_row.push_back(an::vbarc0_2d_finite(P, level).rescaled);
      }
      f_row.push_back(an::limit_Vk_2d(P, 0));
      c_row.push_back(an::limit_Vck_2d(P, 0));
      f_table.rows.push_back(f_row);
      c_table.rows.push_back(c_row);
    }
    for (auto [table, tag] : {std::pair{&f_table, "F"}, std::pair{&c_table, "C"}}) {
      const std::string path = cfg.out + "/curves_" + tag + "_M" + std::to_string(M) + ".csv";
      fracperc::io::write_file(path, [&](std::ostream& os) { table->write(os); });
      outputs.push_back(path);
    }
  }

  // Limit curves across M together with the M -> infinity cubics.
  fracperc::io::WideTable v_table, vc_table;
  v_table.header = {"p"};
  vc_table.header = {"p"};
  for (int M : cfg.M) {
    v_table.header.push_back("M=" + std::to_string(M));
    vc_table.header.push_back("M=" + std::to_string(M));
  }
  v_table.header.push_back("M=inf");
  vc_table.header.push_back("M=inf");
  for (const auto& pr : ps) {
    const double p = to_d(pr);
    std::vector<double> v_row{p}, vc_row{p};
    for (int M : cfg.M) {
      const auto P = fracperc::make_params(M, p, 2);
      v_row.push_back(an::limit_Vk_2d(P, 0));
      vc_row.push_back(-an::limit_Vck_2d(P, 0));
    }
    v_row.push_back(an::largeM_v(p));
    vc_row.push_back(an::largeM_vc(p));
    v_table.rows.push_back(v_row);
    vc_table.rows.push_back(vc_row);
  }
  for (auto [table, name] : {std::pair{&v_table, "limits_F.csv"},
                             std::pair{&vc_table, "limits_C.csv"}}) {
    const std::string path = cfg.out + "/" + name;
    fracperc::io::write_file(path, [&](std::ostream& os) { table->write(os); });
    outputs.push_back(path);
  }

  json manifest = manifest_base(cfg, clock.seconds());
  manifest["outputs"] = outputs;
  fracperc::io::write_json(cfg.out + "/manifest.json", manifest);
  std::cout << "wrote " << outputs.size() << " curve files to " << cfg.out << "\n";
  return kExitOk;
}

int cmd_simulate(const RunConfig& cfg) {
  namespace mc = fracperc::montecarlo;
  Stopwatch clock;
  ensure_directory(cfg.out);
  const std::string csv_path = cfg.out + "/simulate.csv";
  std::ofstream csv(csv_path);
  if (!csv) throw std::runtime_error("cannot write " + csv_path);
  fracperc::io::write_estimate_header(csv);

  std::vector<Target> targets;
  for (const auto& t : cfg.targets) targets.push_back(parse_target(t));
  std::vector<mc::Functional> functionals;
  for (const auto& f : cfg.functionals) functionals.push_back(mc::functional_from_string(f));

  std::size_t rows = 0;
  json runs = json::array();
  for (int M : cfg.M) {
    for (int level : cfg.levels_for(M)) {
      for (const auto& pr : cfg.p.values()) {
        mc::ExperimentSpec spec;
        spec.params = fracperc::make_params(M, to_d(pr), cfg.d);
        spec.n = level;
        spec.samples = cfg.samples_for(pr);
        spec.seed = *cfg.seed;
        spec.targets = targets;
        spec.functionals = functionals;
        spec.connectivity = cfg.connectivity;
        spec.sample_options.coupled = cfg.coupled;
        spec.sample_options.memory_budget_bytes = cfg.memory_budget;
        spec.shards = cfg.shards;
        spec.workers = cfg.workers;
        const auto result = mc::run_experiment(spec);
        for (const auto& row : result.rows) fracperc::io::write_estimate_row(csv, row);
        csv.flush();
        rows += result.rows.size();
        runs.push_back({{"M", M}, {"n", level}, {"p", spec.params.p}, {"samples", spec.samples},
                        {"shards", result.shards}, {"workers", result.workers},
                        {"seconds", result.seconds}});
        std::cerr << "M=" << M << " n=" << level << " p=" << spec.params.p << " samples "
                  << spec.samples << " (" << result.seconds << " s)\n";
      }
    }
  }
  json manifest = manifest_base(cfg, clock.seconds());
  manifest["outputs"] = {csv_path};
  manifest["rows"] = rows;
  manifest["runs"] = runs;
  fracperc::io::write_json(cfg.out + "/manifest.json", manifest);
  std::cout << "wrote " << rows << " rows to " << csv_path << "\n";
  return kExitOk;
}

int cmd_thresholds(const RunConfig& cfg) {
  namespace th = fracperc::thresholds;
  Stopwatch clock;
  ensure_directory(cfg.out);
  const std::string path = cfg.out + "/thresholds.csv";
  std::ofstream csv(path);
  if (!csv) throw std::runtime_error("cannot write " + path);
  using fracperc::io::format_double;
  csv << "M,p0,p0_residual,pmin,pmin_bracket,p1,p1_residual,pc_lower,pc_upper\n";
  std::cout << "     M          p0        pmin          p1   pc bounds\n";
  for (int M : cfg.M) {
    const auto r = th::threshold_report(M);
    csv << M << ',' << format_double(r.p0.root) << ',' << format_double(r.p0.residual) << ','
        << format_double(r.pmin.argmin) << ',' << format_double(r.pmin.bracket.width()) << ','
        << format_double(r.p1.root) << ',' << format_double(r.p1.residual) << ','
        << format_double(r.known->lower) << ',' << format_double(r.known->upper) << '\n';
    char line[160];
    std::snprintf(line, sizeof line, "%6d  %.8f  %.8f  %.8f   [%.4f, %.4f]\n", M, r.p0.root,
                  r.pmin.argmin, r.p1.root, r.known->lower, r.known->upper);
    std::cout << line;
  }
  json manifest = manifest_base(cfg, clock.seconds());
  manifest["outputs"] = {path};
  fracperc::io::write_json(cfg.out + "/manifest.json", manifest);
  return kExitOk;
}

int cmd_verify(const RunConfig& cfg) {
  namespace vf = fracperc::verify;
  Stopwatch clock;
  vf::VerifyOptions options;
  options.seed = *cfg.seed;
  options.mc_samples = cfg.samples;
  options.merge_samples = cfg.samples;
  options.geometry_grids = cfg.geometry_grids;
  options.workers = cfg.workers;
  if (cfg.tamper) options.formulas = vf::FormulaTable::tampered();

  json groups = json::array();
  bool all_passed = true;
  for (const auto& g : vf::run_all(options)) {
    json checks = json::array();
    for (const auto& c : g.checks) {
      checks.push_back({{"name", c.name}, {"passed", c.passed}, {"residual", c.residual},
                        {"detail", c.detail}});
    }
    groups.push_back({{"id", g.id}, {"name", g.name}, {"passed", g.passed()},
                      {"seconds", g.seconds}, {"checks", checks}});
    all_passed = all_passed && g.passed();
    std::cout << (g.passed() ? "PASS" : "FAIL") << "  group " << g.id << ": " << g.name << " ("
              << g.checks.size() - g.failures() << "/" << g.checks.size() << " checks)\n";
    for (const auto& c : g.checks) {
      if (!c.passed) std::cout << "      failed: " << c.name << ": " << c.detail << "\n";
    }
  }
  json report = manifest_base(cfg, clock.seconds());
  report["passed"] = all_passed;
  report["groups"] = groups;
  ensure_directory(cfg.out);
  fracperc::io::write_json(cfg.out + "/verify.json", report);
  std::cout << (all_passed ? "all checks passed" : "verification FAILED") << "\n";
  return all_passed ? kExitOk : kExitVerify;
}

int cmd_render(const RunConfig& cfg) {
  Stopwatch clock;
  const auto params = fracperc::make_params(cfg.M.front(), to_d(cfg.p.values().front()), cfg.d);
  fracperc::SampleOptions options;
  options.coupled = cfg.coupled;
  options.memory_budget_bytes = cfg.memory_budget;
  const auto realization =
      fracperc::sample(params, cfg.n.front(), *cfg.seed, cfg.sample_index, options);
  const fs::path out(cfg.out);
  if (out.has_parent_path()) ensure_directory(out.parent_path().string());
  json outputs = json::array();
  fracperc::io::write_file(cfg.out, [&](std::ostream& os) {
    fracperc::io::write_pbm(os, realization.grid);
  });
  outputs.push_back(cfg.out);
  json extra;
  if (cfg.spanning) {
    const auto labeling = fracperc::geometry::label(realization.grid, cfg.connectivity);
    fs::path span_path = out;
    span_path.replace_filename(out.stem().string() + "_spanning" + out.extension().string());
    fracperc::io::write_file(span_path.string(), [&](std::ostream& os) {
      fracperc::io::write_pbm(os, fracperc::geometry::spanning_mask(labeling));
    });
    outputs.push_back(span_path.string());
    extra["components"] = labeling.component_count;
    extra["spans_horizontal"] = labeling.spans[0];
    extra["spans_vertical"] = labeling.spans[1];
  }
  fs::path manifest_path = out;
  manifest_path.replace_extension(".json");
  json manifest = manifest_base(cfg, clock.seconds());
  manifest["outputs"] = outputs;
  manifest["cells"] = realization.grid.popcount();
  if (!extra.is_null()) manifest["labeling"] = extra;
  fracperc::io::write_json(manifest_path.string(), manifest);
  std::cout << "wrote " << cfg.out << " (" << realization.side() << "x"
            << realization.grid.height() << ", " << realization.grid.popcount()
            << " present cells)\n";
  return kExitOk;
}

int cmd_oracle(const RunConfig& cfg) {
  namespace orc = fracperc::oracle;
  const int M = cfg.M.front();
  const int n = cfg.n.front();
  const Rational p = cfg.p.values().front();
  const std::string functional = cfg.functionals.front();
  const Target target = parse_target(cfg.targets.front());
  const auto dist = orc::enumerate_outcomes(M, n, cfg.d);
  Rational value;
  if (cfg.d == 1) {
    orc::Query1D query;
    query.target = target;
    query.two_copies = cfg.two_copies;
    if (functional == "V0") query.functional = orc::Functional1D::V0;
    if (functional == "V1") query.functional = orc::Functional1D::V1;
    if (functional == "N") query.functional = orc::Functional1D::isolated_points;
    if (functional == "contains0") query.functional = orc::Functional1D::contains_zero;
    if (functional == "contains1") query.functional = orc::Functional1D::contains_one;
    value = orc::enumerate_1d(dist, p, query);
  } else if (functional.size() == 2) {
    value = orc::enumerate_2d(dist, p, functional[1] - '0', target);
  } else {
    const auto sep = functional.find('_');
    const auto configuration =
        fracperc::analytic::configuration_from_string(functional.substr(0, sep));
    value = orc::intersection_term_2d(dist, p, configuration, functional.back() - '0', target);
  }
  json out{{"M", M},
           {"n", n},
           {"d", cfg.d},
           {"p", fracperc::config::format_rational(p)},
           {"functional", functional},
           {"target", cfg.targets.front()},
           {"two_copies", cfg.two_copies},
           {"outcomes", dist.masks.size()},
           {"exact", fracperc::to_string(value)},
           {"value", fracperc::io::format_double(to_d(value))}};
  std::cout << out.dump(2) << "\n";
  return kExitOk;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw fracperc::config::ConfigError("cannot read config file " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

bool is_randomized(const std::string& command) {
  return command == "simulate" || command == "render" || command == "verify";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fractal percolation: analytic curves, Monte Carlo estimates and self-checks"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for all subcommands");

  struct Sub {
    CLI::App* app = nullptr;
    std::string config_path;
    std::map<std::string, std::string> values;
    std::map<std::string, CLI::Option*> options;
  };
  std::map<std::string, Sub> subs;
  const std::map<std::string, std::string> descriptions{
      {"curves", "Write rescaled Euler characteristic curves and their limits as CSV"},
      {"simulate", "Monte Carlo estimates of the Minkowski functionals"},
      {"thresholds", "Locate p0, pmin and p1 on the limit curves"},
      {"verify", "Run the self-verification suites"},
      {"render", "Write a realization (and optionally its spanning cluster) as PBM"},
      {"oracle", "Exact expectation by exhaustive enumeration of a tiny instance"}};
  for (const auto& name : fracperc::config::known_commands()) {
    Sub& sub = subs[name];
    sub.app = app.add_subcommand(name, descriptions.at(name));
    sub.app->add_option("--config", sub.config_path, "key = value configuration file");
    for (const auto& key : fracperc::config::known_keys()) {
      if (key == "command") continue;
      sub.options[key] = sub.app->add_option("--" + key, sub.values[key], "sets " + key);
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    std::string command;
    for (auto& [name, sub] : subs) {
      if (sub.app->parsed()) command = name;
    }
    Sub& sub = subs.at(command);
    RunConfig cfg = fracperc::config::defaults_for(command);
    std::set<std::string> explicit_keys;
    if (!sub.config_path.empty()) {
      const auto pairs = fracperc::config::parse_pairs(read_file(sub.config_path));
      if (auto it = pairs.find("command"); it != pairs.end() && it->second != command) {
        throw fracperc::config::ConfigError("config file is for '" + it->second +
                                            "', not '" + command + "'");
      }
      fracperc::config::apply_pairs(cfg, pairs);
      for (const auto& kv : pairs) explicit_keys.insert(kv.first);
    }
    for (const auto& [key, option] : sub.options) {
      if (option->count() > 0) {
        fracperc::config::set_value(cfg, key, sub.values.at(key));
        explicit_keys.insert(key);
      }
    }
    fracperc::config::apply_full_protocol(cfg, explicit_keys);
    fracperc::config::validate(cfg);
    if (is_randomized(command) && !cfg.seed) {
      cfg.seed = (std::uint64_t{std::random_device{}()} << 32) ^ std::random_device{}();
      std::cerr << "no seed given; using seed = " << *cfg.seed << "\n";
    }

    if (command == "curves") return cmd_curves(cfg);
    if (command == "simulate") return cmd_simulate(cfg);
    if (command == "thresholds") return cmd_thresholds(cfg);
    if (command == "verify") return cmd_verify(cfg);
    if (command == "render") return cmd_render(cfg);
    return cmd_oracle(cfg);
  } catch (const fracperc::ResourceError& e) {
    std::cerr << "resource guard: " << e.what() << "\n";
    return kExitResource;
  } catch (const fracperc::InstanceTooLarge& e) {
    std::cerr << "resource guard: " << e.what() << "\n";
    return kExitResource;
  } catch (const fracperc::DomainError& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
