#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qkrylov/experiment.hpp"
#include "qkrylov/hamiltonian_io.hpp"
#include "qkrylov/records.hpp"

namespace qkrylov {

/// Everything one CLI invocation needs. Values come from an optional JSON
/// config file, then command-line flags override them.
struct RunConfig {
  std::string system;  // file path or model:<kind>:<n>[:params...]
  Variant variant = Variant::qks_u;
  std::vector<std::size_t> B_list{1};
  std::size_t K_max = 10;
  std::optional<double> t;
  std::optional<double> tau;
  std::vector<double> t_list;
  std::vector<std::string> regs{"none"};
  FilterMode filter = FilterMode::metric_only;
  bool noise = false;
  std::uint64_t shots = 1'000'000;
  std::uint64_t seed = 0;
  std::size_t runs = 100;
  std::string out;    // file or existing directory; empty writes to stdout
  std::string stats;  // ensemble statistics CSV
  OutputFormat format = OutputFormat::csv;
  std::size_t dense_cap = kDefaultDenseCap;
  bool grouping = true;
  Generator generator = Generator::time_evolution;

  std::vector<Strategy> strategies() const {
    std::vector<Strategy> s;
    for (const auto& r : regs) s.push_back(parse_strategy(r, filter));
    return s;
  }

  SweepOptions sweep_options() const { return {t, tau, grouping, generator}; }

  NoiseSpec noise_spec(bool enabled) const { return {shots, seed, enabled, true}; }
};

inline Generator parse_generator(std::string_view s) {
  if (s == "time_evolution" || s == "time-evolution" || s == "u") return Generator::time_evolution;
  if (s == "hamiltonian_power" || s == "hamiltonian-power" || s == "power") {
    return Generator::hamiltonian_power;
  }
  throw InvalidInput("unknown generator '" + std::string(s) + "'");
}

/// Rejects inconsistent settings; QKS-U times must lie in (0, pi].
inline void validate(const RunConfig& c) {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  if (c.system.empty()) fail("--system is required");
  if (c.B_list.empty()) fail("at least one block size is required");
  for (auto b : c.B_list) {
    if (b < 1) fail("block sizes must be >= 1");
  }
  if (c.regs.empty()) fail("at least one --reg is required");
  if (c.shots < 1) fail("--shots must be >= 1");
  if (c.dense_cap < 2) fail("--dense-cap must be >= 2");
  auto check_time = [&](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) fail(std::string(name) + " must be > 0");
    if (c.variant == Variant::qks_u && v > std::numbers::pi) {
      fail(std::string(name) + " = " + format_double(v) + " exceeds pi for QKS-U");
    }
  };
  if (c.t) check_time(*c.t, "t");
  if (c.tau) check_time(*c.tau, "tau");
  for (double v : c.t_list) check_time(v, "t");
  if (c.generator == Generator::hamiltonian_power && c.variant != Variant::qks_h) {
    fail("the hamiltonian_power generator requires --variant qks-h");
  }
  try {
    (void)c.strategies();
  } catch (const InvalidInput& e) {
    fail(e.what());
  }
}

namespace detail {

template <class T>
std::vector<T> scalar_or_list(const nlohmann::json& j) {
  if (j.is_array()) return j.get<std::vector<T>>();
  return {j.get<T>()};
}

}  // namespace detail

/// Applies a JSON config document. Unknown keys are rejected.
inline void apply_config_json(RunConfig& c, const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  try {
    for (const auto& [key, v] : doc.items()) {
      if (key == "system") c.system = v.get<std::string>();
      else if (key == "variant") c.variant = parse_variant(v.get<std::string>());
      else if (key == "B") c.B_list = detail::scalar_or_list<std::size_t>(v);
      else if (key == "K") c.K_max = v.get<std::size_t>();
      else if (key == "t") c.t = v.get<double>();
      else if (key == "tau") c.tau = v.get<double>();
      else if (key == "t_list") c.t_list = detail::scalar_or_list<double>(v);
      else if (key == "reg") c.regs = detail::scalar_or_list<std::string>(v);
      else if (key == "filter") c.filter = parse_filter_mode(v.get<std::string>());
      else if (key == "noise") c.noise = v.get<bool>();
      else if (key == "shots") c.shots = v.get<std::uint64_t>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "runs") c.runs = v.get<std::size_t>();
      else if (key == "out") c.out = v.get<std::string>();
      else if (key == "stats") c.stats = v.get<std::string>();
      else if (key == "format") c.format = parse_output_format(v.get<std::string>());
      else if (key == "dense_cap") c.dense_cap = v.get<std::size_t>();
      else if (key == "grouping") c.grouping = v.get<bool>();
      else if (key == "generator") c.generator = parse_generator(v.get<std::string>());
      else throw ConfigError("unknown config key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const InvalidInput& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

inline void load_config_file(RunConfig& c, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config file '" + path + "': " + e.what());
  }
  apply_config_json(c, doc);
}

/// "model:tfim:4:1:1" builds a chain model, anything else is read as a file.
inline PauliSum load_hamiltonian(const std::string& spec) {
  if (!spec.starts_with("model:")) return parse_hamiltonian_file(spec);
  std::vector<std::string> parts;
  std::stringstream ss(spec.substr(6));
  for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
  if (parts.size() < 2) throw InvalidInput("model spec must be model:<kind>:<n_sites>[:params]");
  const ModelKind kind = parse_model_kind(parts[0]);
  std::vector<double> params;
  std::size_t n = 0;
  try {
    n = std::stoul(parts[1]);
    for (std::size_t i = 2; i < parts.size(); ++i) params.push_back(parse_double(parts[i]));
  } catch (const std::logic_error&) {
    throw InvalidInput("invalid number in model spec '" + spec + "'");
  }
  return model_hamiltonian(kind, n, params);
}

inline std::string system_id(const std::string& spec) {
  if (spec.starts_with("model:")) return spec.substr(6);
  return std::filesystem::path(spec).stem().string();
}

namespace detail {

/// Resolves --out: a directory gets `<name>.<ext>` inside it.
inline std::string output_path(const std::string& out, const std::string& name, OutputFormat f) {
  if (out.empty()) return {};
  if (std::filesystem::is_directory(out)) {
    return (std::filesystem::path(out) / (name + (f == OutputFormat::csv ? ".csv" : ".json"))).string();
  }
  return out;
}

inline void emit_records(const RunConfig& c, const std::string& name,
                         std::span<const ExperimentRecord> records, std::ostream& out) {
  const auto path = output_path(c.out, name, c.format);
  if (path.empty()) {
    write_records(out, records, c.format);
  } else {
    write_records(records, c.format, path);
  }
}

template <class Writer>
void emit_file(const std::string& path, std::ostream& fallback, Writer&& write) {
  if (path.empty()) {
    write(fallback);
    return;
  }
  auto f = open_output(path);
  write(f);
  finish_output(f, path);
}

}  // namespace detail

inline int run_subcommand(const std::string& cmd, const RunConfig& c, std::ostream& out) {
  const System sys(system_id(c.system), load_hamiltonian(c.system), c.dense_cap);
  const auto strategies = c.strategies();
  const auto opts = c.sweep_options();

  if (cmd == "solve-once") {
    std::vector<ExperimentRecord> records;
    const std::size_t B = c.B_list.front();
    KrylovSpace space(references_for(sys, B, c.grouping), sys.data(), make_config(c.variant, sys, B, opts));
    space.grow_to(c.K_max);
    const bool noisy = c.noise;
    const auto m = noisy ? sample_noisy(space, c.noise_spec(true), c.K_max) : space.matrices(c.K_max);
    const double level = noisy ? c.noise_spec(true).noise_level() : 0.0;
    std::optional<std::uint64_t> seed;
    if (noisy) seed = c.seed;
    for (const auto& s : strategies) records.push_back(evaluate(m, sys, s, level, seed).record);
    if (c.out.empty()) {
      out << "exact_energy " << format_double(sys.exact_energy()) << '\n';
      for (const auto& r : records) {
        out << r.reg_method << ": ";
        if (r.eliminated) {
          out << "all solutions eliminated";
        } else {
          out << "gs_energy " << format_double(*r.gs_energy) << " abs_error "
              << format_double(*r.abs_error);
        }
        out << " kappa " << format_double(r.kappa_pre);
        if (r.kappa_post) out << " kappa_post " << format_double(*r.kappa_post);
        out << '\n';
      }
    } else {
      detail::emit_records(c, "solve_once", records, out);
    }
    return 0;
  }

  if (cmd == "sweep-subspace") {
    std::vector<std::size_t> ks;
    for (std::size_t k = 0; k <= c.K_max; ++k) ks.push_back(k);
    const auto records = sweep_subspace(sys, c.variant, c.B_list, ks, strategies, opts);
    detail::emit_records(c, "sweep_subspace", records, out);
    return 0;
  }

  if (cmd == "sweep-timestep") {
    std::vector<double> ts = c.t_list;
    if (ts.empty()) ts.push_back(make_config(c.variant, sys, 1, opts).t);
    const auto records = sweep_timestep(sys, c.variant, ts, strategies, c.K_max, opts);
    detail::emit_records(c, "sweep_timestep", records, out);
    return 0;
  }

  if (cmd == "noisy-ensemble") {
    EnsembleOptions eo;
    eo.noise = c.noise_spec(true);
    eo.n_runs = c.runs;
    eo.K_max = c.K_max;
    eo.B = c.B_list.front();
    eo.sweep = opts;
    const auto res = run_noisy_ensemble(sys, c.variant, strategies, eo);
    detail::emit_records(c, "noisy_ensemble", res.records, out);
    std::string stats_path = c.stats;
    if (stats_path.empty() && !c.out.empty() && std::filesystem::is_directory(c.out)) {
      stats_path = (std::filesystem::path(c.out) / "noisy_ensemble_stats.csv").string();
    }
    if (!stats_path.empty()) {
      detail::emit_file(stats_path, out, [&](std::ostream& o) {
        write_stats_csv(o, sys.id(), c.variant, res.stats);
      });
    }
    return 0;
  }

  if (cmd == "singular-values") {
    const auto runs = dump_singular_values(sys, c.variant, c.K_max, c.noise_spec(c.noise), c.runs,
                                           c.B_list.front(), opts);
    std::string path = c.out;
    if (!path.empty() && std::filesystem::is_directory(path)) {
      path = (std::filesystem::path(path) / "singular_values.csv").string();
    }
    detail::emit_file(path, out, [&](std::ostream& o) {
      write_singular_values_csv(o, sys.id(), c.variant, c.K_max, runs);
    });
    return 0;
  }
  throw ConfigError("unknown subcommand '" + cmd + "'");
}

/// Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.
inline int cli_main(std::vector<std::string> args, std::ostream& out = std::cout,
                    std::ostream& err = std::cerr) {
  CLI::App app{"Quantum Krylov subspace diagonalization experiments", "qkrylov"};
  app.require_subcommand(1);

  std::string config_path, system, variant, filter, format, generator, out_path, stats_path;
  std::vector<std::size_t> B_list;
  std::size_t K = 0, runs = 0, dense_cap = 0;
  double t = 0.0, tau = 0.0;
  std::vector<double> t_list;
  std::vector<std::string> regs;
  std::uint64_t seed = 0, shots = 0;
  std::string grouping, noise;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file (flags override it)");
    sub->add_option("--system", system, "Hamiltonian file or model:<tfim|heisenberg>:<n>[:params]");
    sub->add_option("--variant", variant, "qks-u or qks-h");
    sub->add_option("--B", B_list, "block size(s)");
    sub->add_option("--K", K, "largest Krylov iteration");
    sub->add_option("--t", t, "generation time step");
    sub->add_option("--tau", tau, "QKS-U projection time");
    sub->add_option("--t-list", t_list, "time steps for sweep-timestep");
    sub->add_option("--reg", regs, "none | fixed:<sigma> | elbow | lit_a | lit_b, optionally +filter");
    sub->add_option("--filter", filter, "off | metric_only | filtering");
    sub->add_option("--noise", noise, "on | off (solve-once, singular-values)");
    sub->add_option("--shots", shots, "shots per real/imaginary part");
    sub->add_option("--seed", seed, "base seed");
    sub->add_option("--runs", runs, "ensemble size");
    sub->add_option("--out", out_path, "output file or directory (default stdout)");
    sub->add_option("--stats", stats_path, "ensemble statistics CSV");
    sub->add_option("--format", format, "csv or json");
    sub->add_option("--dense-cap", dense_cap, "largest dense dimension");
    sub->add_option("--grouping", grouping, "on | off: merge open-shell references");
    sub->add_option("--generator", generator, "time_evolution | hamiltonian_power");
  };
  const std::pair<const char*, const char*> subcommands[] = {
      {"sweep-subspace", "ground-energy error over block sizes, iterations and strategies"},
      {"sweep-timestep", "ground-energy error over a list of time steps"},
      {"noisy-ensemble", "shot-noise ensemble with geometric statistics"},
      {"singular-values", "log10 singular values of the overlap matrix"},
      {"solve-once", "one pipeline run with a human-readable summary"},
  };
  for (const auto& [name, help] : subcommands) add_common(app.add_subcommand(name, help));

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }
  CLI::App* sub = app.get_subcommands().front();
  auto given = [&](const char* flag) { return sub->count(flag) > 0; };
  auto on_off = [](const std::string& v, const char* flag) {
    if (v == "on" || v == "true" || v == "1") return true;
    if (v == "off" || v == "false" || v == "0") return false;
    throw ConfigError(std::string(flag) + " expects on or off");
  };

  RunConfig c;
  try {
    if (given("--config")) load_config_file(c, config_path);
    if (given("--system")) c.system = system;
    if (given("--variant")) c.variant = parse_variant(variant);
    if (given("--B")) c.B_list = B_list;
    if (given("--K")) c.K_max = K;
    if (given("--t")) c.t = t;
    if (given("--tau")) c.tau = tau;
    if (given("--t-list")) c.t_list = t_list;
    if (given("--reg")) c.regs = regs;
    if (given("--filter")) c.filter = parse_filter_mode(filter);
    if (given("--noise")) c.noise = on_off(noise, "--noise");
    if (given("--shots")) c.shots = shots;
    if (given("--seed")) c.seed = seed;
    if (given("--runs")) c.runs = runs;
    if (given("--out")) c.out = out_path;
    if (given("--stats")) c.stats = stats_path;
    if (given("--format")) c.format = parse_output_format(format);
    if (given("--dense-cap")) c.dense_cap = dense_cap;
    if (given("--grouping")) c.grouping = on_off(grouping, "--grouping");
    if (given("--generator")) c.generator = parse_generator(generator);
    validate(c);
    if (sub->get_name() == "noisy-ensemble" && c.runs < 2) throw ConfigError("--runs must be >= 2");
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n\n" << sub->help();
    return 2;
  }

  try {
    return run_subcommand(sub->get_name(), c, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

inline int cli_main(int argc, const char* const* argv, std::ostream& out = std::cout,
                    std::ostream& err = std::cerr) {
  return cli_main(std::vector<std::string>(argv + 1, argv + argc), out, err);
}

}  // namespace qkrylov
