#pragma once

// Command-line front end: flag/JSON-config parsing, dispatch to the solvers and
// simulators, and text/JSON/CSV emitters.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "switchoff/switchoff.hpp"

namespace switchoff::cli {

enum class Command { SolveExp, SolveLinear, SolveGeneral, SolveFamily, NoSwitchoff, Simulate, SolveNoisy, Curve };
enum class Format { Text, Json, Csv };

inline const std::map<std::string, Command, std::less<>>& command_names() {
  static const std::map<std::string, Command, std::less<>> names = {
      {"solve-exp", Command::SolveExp},       {"solve-linear", Command::SolveLinear},
      {"solve-general", Command::SolveGeneral}, {"solve-family", Command::SolveFamily},
      {"no-switchoff", Command::NoSwitchoff}, {"simulate", Command::Simulate},
      {"solve-noisy", Command::SolveNoisy},   {"curve", Command::Curve}};
  return names;
}

inline std::string command_name(Command c) {
  for (const auto& [name, cmd] : command_names()) {
    if (cmd == c) return name;
  }
  return "?";
}

struct RunConfig {
  Command command = Command::SolveExp;
  std::optional<double> a, b, t0, T, Q, t1, dt, m, Lv, c3, c4, t1_lo, t1_hi;
  std::optional<std::uint64_t> paths, points, seed;
  std::optional<std::string> model;  // exp | linear | tabulated
  std::optional<std::string> ramp_csv, decay_csv;
  std::optional<std::string> output_path;
  Format format = Format::Text;
};

/// Bad command line or config; exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace exit_code {
inline constexpr int kOk = 0;
inline constexpr int kFailure = 1;
inline constexpr int kUsage = 2;
inline constexpr int kInfeasible = 3;
}  // namespace exit_code

namespace detail {

using DoubleField = std::optional<double> RunConfig::*;
using CountField = std::optional<std::uint64_t> RunConfig::*;
using TextField = std::optional<std::string> RunConfig::*;

inline const std::vector<std::pair<std::string, DoubleField>>& double_fields() {
  static const std::vector<std::pair<std::string, DoubleField>> fields = {
      {"a", &RunConfig::a},   {"b", &RunConfig::b},       {"t0", &RunConfig::t0},
      {"T", &RunConfig::T},   {"Q", &RunConfig::Q},       {"t1", &RunConfig::t1},
      {"dt", &RunConfig::dt}, {"m", &RunConfig::m},       {"Lv", &RunConfig::Lv},
      {"c3", &RunConfig::c3}, {"c4", &RunConfig::c4},     {"t1-lo", &RunConfig::t1_lo},
      {"t1-hi", &RunConfig::t1_hi}};
  return fields;
}

inline const std::vector<std::pair<std::string, CountField>>& count_fields() {
  static const std::vector<std::pair<std::string, CountField>> fields = {
      {"paths", &RunConfig::paths}, {"points", &RunConfig::points}, {"seed", &RunConfig::seed}};
  return fields;
}

inline const std::vector<std::pair<std::string, TextField>>& text_fields() {
  static const std::vector<std::pair<std::string, TextField>> fields = {
      {"model", &RunConfig::model},
      {"ramp", &RunConfig::ramp_csv},
      {"decay", &RunConfig::decay_csv},
      {"out", &RunConfig::output_path}};
  return fields;
}

// Keys written by the JSON emitters; tolerated in config files so that a
// result document can be fed back in as a config.
inline const std::set<std::string, std::less<>>& result_keys() {
  static const std::set<std::string, std::less<>> keys = {
      "command",  "t1_hat",      "t2",          "y",           "residual",         "method",
      "feasible", "t",           "during_ramp", "mc_energy",   "mc_stderr",        "reference_energy",
      "format",   "error",       "message"};
  return keys;
}

inline std::string fmt(double v) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::setprecision(17) << v;
  return os.str();
}

inline Format parse_format(const std::string& s) {
  if (s == "text") return Format::Text;
  if (s == "json") return Format::Json;
  if (s == "csv") return Format::Csv;
  throw UsageError("--format must be text, json or csv, got '" + s + "'");
}

inline void apply_config_file(RunConfig& cfg, const std::string& path,
                              const std::set<std::string>& given, bool& format_given,
                              std::string& format_text) {
  std::ifstream in(path);
  if (!in) throw UsageError("--config: cannot open '" + path + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("--config: invalid JSON in '" + path + "': " + e.what());
  }
  if (!doc.is_object()) throw UsageError("--config: top level must be a flat object");

  for (const auto& [key, value] : doc.items()) {
    const bool overridden = given.count(key) > 0;
    auto expect_number = [&] {
      if (!value.is_number()) throw UsageError("--config: key '" + key + "' must be numeric");
    };
    if (auto it = std::find_if(double_fields().begin(), double_fields().end(),
                               [&](const auto& f) { return f.first == key; });
        it != double_fields().end()) {
      expect_number();
      if (!overridden) cfg.*(it->second) = value.get<double>();
    } else if (auto ct = std::find_if(count_fields().begin(), count_fields().end(),
                                      [&](const auto& f) { return f.first == key; });
               ct != count_fields().end()) {
      if (!value.is_number_unsigned()) {
        throw UsageError("--config: key '" + key + "' must be a nonnegative integer");
      }
      if (!overridden) cfg.*(ct->second) = value.get<std::uint64_t>();
    } else if (auto tt = std::find_if(text_fields().begin(), text_fields().end(),
                                      [&](const auto& f) { return f.first == key; });
               tt != text_fields().end()) {
      if (!value.is_string()) throw UsageError("--config: key '" + key + "' must be a string");
      if (!overridden) cfg.*(tt->second) = value.get<std::string>();
    } else if (key == "format" && value.is_string() && !format_given) {
      // A result document records its own format; only honour it when it names one.
      format_text = value.get<std::string>();
      format_given = true;
    } else if (result_keys().count(key) == 0) {
      throw UsageError("--config: unknown key '" + key + "'");
    }
  }
}

inline void require(bool present, const std::string& flag, Command cmd) {
  if (!present) throw UsageError(command_name(cmd) + " requires --" + flag);
}

inline std::string resolved_model(const RunConfig& cfg) {
  if (cfg.model) return *cfg.model;
  if (cfg.ramp_csv || cfg.decay_csv) return "tabulated";
  if (cfg.b) return "exp";
  return "linear";
}

inline bool has_demand(const RunConfig& cfg) { return cfg.Q.has_value() || (cfg.m && cfg.Lv); }

inline void validate(const RunConfig& cfg) {
  const Command cmd = cfg.command;
  auto need_exp = [&] {
    for (const char* f : {"a", "b", "t0", "T"}) {
      const auto& field = std::find_if(double_fields().begin(), double_fields().end(),
                                       [&](const auto& p) { return p.first == f; })
                              ->second;
      require((cfg.*field).has_value(), f, cmd);
    }
    ExponentialParams{*cfg.a, *cfg.b, *cfg.t0, *cfg.T}.validate();
  };
  auto need_linear = [&] {
    require(cfg.a.has_value(), "a", cmd);
    require(cfg.t0.has_value(), "t0", cmd);
    require(cfg.T.has_value(), "T", cmd);
    LinearParams{*cfg.a, *cfg.t0, *cfg.T}.validate();
  };
  auto need_model = [&] {
    const auto model = resolved_model(cfg);
    if (model == "exp") {
      need_exp();
    } else if (model == "linear") {
      need_linear();
    } else if (model == "tabulated") {
      require(cfg.ramp_csv.has_value(), "ramp", cmd);
      require(cfg.decay_csv.has_value(), "decay", cmd);
    } else {
      throw UsageError("--model must be exp, linear or tabulated, got '" + model + "'");
    }
  };
  auto need_demand = [&] {
    if (!has_demand(cfg)) throw UsageError(command_name(cmd) + " requires --Q (or --m and --Lv)");
    if (cfg.Q) {
      EnergyDemand{*cfg.Q};
    } else {
      latent_heat_demand(*cfg.m, *cfg.Lv);
    }
  };

  try {
    switch (cmd) {
      case Command::SolveExp:
        need_exp();
        need_demand();
        break;
      case Command::SolveLinear:
        need_linear();
        need_demand();
        break;
      case Command::SolveGeneral:
      case Command::SolveFamily:
      case Command::NoSwitchoff:
        need_model();
        need_demand();
        break;
      case Command::SolveNoisy:
        need_exp();
        need_demand();
        break;
      case Command::Simulate:
      case Command::Curve: {
        need_model();
        if (cmd == Command::Simulate && resolved_model(cfg) == "tabulated") {
          throw UsageError("simulate supports --model exp or linear");
        }
        if (!cfg.t1) need_demand();
        if (cfg.t1 && !std::isfinite(*cfg.t1)) throw UsageError("--t1 must be finite");
        break;
      }
    }
    if (cfg.t1_lo.has_value() != cfg.t1_hi.has_value()) {
      throw UsageError("--t1-lo and --t1-hi must be given together");
    }
    if (cfg.t1_lo) Interval(*cfg.t1_lo, *cfg.t1_hi);
    if (cfg.dt && !(*cfg.dt > 0.0 && std::isfinite(*cfg.dt))) throw UsageError("--dt must be positive");
    if (cfg.points && *cfg.points < 2) throw UsageError("--points must be at least 2");
    if (cfg.paths && *cfg.paths < 1) throw UsageError("--paths must be at least 1");
    for (const auto& [name, field] : double_fields()) {
      if ((cfg.*field) && !std::isfinite(*(cfg.*field))) {
        throw UsageError("--" + name + " must be finite");
      }
    }
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
}

}  // namespace detail

/// Parses `args` (command first, no program name). Flags win over --config
/// values; SWITCHOFF_SEED supplies the seed when neither sets it.
inline RunConfig parse_args(const std::vector<std::string>& args) {
  if (args.empty()) throw UsageError("missing command");
  const auto it = command_names().find(args.front());
  if (it == command_names().end()) throw UsageError("unknown command '" + args.front() + "'");

  RunConfig cfg;
  cfg.command = it->second;

  CLI::App app{"switchoff"};
  app.allow_extras(false);
  std::map<std::string, double> doubles;
  std::map<std::string, std::uint64_t> counts;
  std::map<std::string, std::string> texts;
  std::map<std::string, CLI::Option*> options;
  for (const auto& [name, field] : detail::double_fields()) {
    options[name] = app.add_option("--" + name, doubles[name]);
  }
  for (const auto& [name, field] : detail::count_fields()) {
    options[name] = app.add_option("--" + name, counts[name]);
  }
  for (const auto& [name, field] : detail::text_fields()) {
    options[name] = app.add_option("--" + name, texts[name]);
  }
  std::string config_path;
  std::string format_text = "text";
  auto* config_opt = app.add_option("--config", config_path);
  auto* format_opt = app.add_option("--format", format_text);

  std::vector<std::string> rest(args.begin() + 1, args.end());
  std::reverse(rest.begin(), rest.end());
  try {
    app.parse(rest);
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  std::set<std::string> given;
  for (const auto& [name, opt] : options) {
    if (opt->count() > 0) given.insert(name);
  }
  for (const auto& [name, field] : detail::double_fields()) {
    if (given.count(name)) cfg.*field = doubles[name];
  }
  for (const auto& [name, field] : detail::count_fields()) {
    if (given.count(name)) cfg.*field = counts[name];
  }
  for (const auto& [name, field] : detail::text_fields()) {
    if (given.count(name)) cfg.*field = texts[name];
  }
  bool format_given = format_opt->count() > 0;
  if (config_opt->count() > 0) {
    detail::apply_config_file(cfg, config_path, given, format_given, format_text);
  }
  cfg.format = detail::parse_format(format_text);

  if (!cfg.seed) {
    if (const char* env = std::getenv("SWITCHOFF_SEED")) {
      try {
        std::size_t used = 0;
        const std::string text(env);
        const auto value = std::stoull(text, &used);
        if (used != text.size()) throw std::invalid_argument("trailing characters");
        cfg.seed = value;
      } catch (const std::exception&) {
        throw UsageError("SWITCHOFF_SEED must be an unsigned integer");
      }
    }
  }
  detail::validate(cfg);
  return cfg;
}

/// Reads a "t,rate" CSV (header optional) into samples.
inline std::vector<RateSample> read_samples_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::vector<RateSample> samples;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw Error(ErrorKind::InvalidProfile, path + ":" + std::to_string(line_no) + ": expected 't,rate'");
    }
    try {
      std::size_t u1 = 0;
      std::size_t u2 = 0;
      const std::string lhs = line.substr(0, comma);
      const std::string rhs = line.substr(comma + 1);
      const double t = std::stod(lhs, &u1);
      const double r = std::stod(rhs, &u2);
      if (lhs.find_first_not_of(" \t", u1) != std::string::npos ||
          rhs.find_first_not_of(" \t", u2) != std::string::npos) {
        throw std::invalid_argument("trailing characters");
      }
      samples.push_back({t, r});
    } catch (const std::logic_error&) {
      if (line_no == 1 && samples.empty()) continue;  // header
      throw Error(ErrorKind::InvalidProfile, path + ":" + std::to_string(line_no) + ": not numeric");
    }
  }
  return samples;
}

inline std::vector<double> uniform_grid(double t_end, std::size_t n_points) {
  std::vector<double> grid(n_points);
  for (std::size_t i = 0; i < n_points; ++i) {
    grid[i] = t_end * static_cast<double>(i) / static_cast<double>(n_points - 1);
  }
  grid.back() = t_end;
  return grid;
}

/// Writes "t,rate,cumulative_energy" on a uniform grid over [0, t1 + T]; with a
/// Monte-Carlo estimate on the same grid, ",mean,stderr" columns are appended.
inline void emit_curve(std::ostream& out, const SupplyProfile& profile, double t1,
                       std::size_t n_points, const MeanEstimate* stochastic = nullptr,
                       const Tolerance& tol = {}) {
  if (n_points < 2) throw Error(ErrorKind::InvalidParams, "a curve needs at least two points");
  const auto grid = uniform_grid(extinction_time(profile, t1), n_points);
  if (stochastic && stochastic->grid.size() != grid.size()) {
    throw Error(ErrorKind::InvalidParams, "mean estimate grid does not match the curve grid");
  }
  const auto cuts = profile.breakpoints(t1);
  auto rate = [&](double s) { return rate_at(profile, t1, s); };

  out << "t,rate,cumulative_energy" << (stochastic ? ",mean,stderr" : "") << '\n';
  double cumulative = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (i > 0) cumulative += integrate(rate, Interval(grid[i - 1], grid[i]), tol, cuts).value;
    out << detail::fmt(grid[i]) << ',' << detail::fmt(rate(grid[i])) << ',' << detail::fmt(cumulative);
    if (stochastic) {
      out << ',' << detail::fmt(stochastic->mean[i]) << ',' << detail::fmt(stochastic->std_error[i]);
    }
    out << '\n';
  }
}

namespace detail {

inline EnergyDemand demand_of(const RunConfig& cfg) {
  return cfg.Q ? EnergyDemand(*cfg.Q) : latent_heat_demand(*cfg.m, *cfg.Lv);
}

inline SupplyProfile profile_of(const RunConfig& cfg) {
  const auto model = resolved_model(cfg);
  if (model == "exp") return exponential_profile({*cfg.a, *cfg.b, *cfg.t0, *cfg.T});
  if (model == "linear") return linear_profile({*cfg.a, *cfg.t0, *cfg.T});
  return tabulated_profile(read_samples_csv(*cfg.ramp_csv), read_samples_csv(*cfg.decay_csv));
}

inline SimConfig sim_of(const RunConfig& cfg, std::size_t default_paths) {
  SimConfig sim;
  sim.dt = cfg.dt.value_or(1e-3);
  sim.n_paths = static_cast<std::size_t>(cfg.paths.value_or(default_paths));
  sim.seed = cfg.seed.value_or(0);
  return sim;
}

inline NoiseModel noise_of(const RunConfig& cfg) {
  return NoiseModel::uniform(cfg.c3.value_or(0.0), cfg.c4.value_or(0.0));
}

inline PiecewiseAffineSde sde_of(const RunConfig& cfg, double t1) {
  if (resolved_model(cfg) == "exp") {
    return phases_from_profile({*cfg.a, *cfg.b, *cfg.t0, *cfg.T}, t1, noise_of(cfg));
  }
  return phases_from_linear({*cfg.a, *cfg.t0, *cfg.T}, t1, noise_of(cfg));
}

// Flat JSON object echoing every input that was set, ready to be re-ingested.
inline nlohmann::ordered_json inputs_json(const RunConfig& cfg) {
  nlohmann::ordered_json j;
  j["command"] = command_name(cfg.command);
  for (const auto& [name, field] : double_fields()) {
    if (cfg.*field) j[name] = *(cfg.*field);
  }
  for (const auto& [name, field] : count_fields()) {
    if (cfg.*field) j[name] = *(cfg.*field);
  }
  for (const auto& [name, field] : text_fields()) {
    if (name != "out" && cfg.*field) j[name] = *(cfg.*field);
  }
  return j;
}

struct Emitted {
  std::vector<std::pair<std::string, std::string>> text;  // key, formatted value
  nlohmann::ordered_json json;
};

inline void put(Emitted& e, const std::string& key, double v) {
  e.text.emplace_back(key, fmt(v));
  e.json[key] = v;
}
inline void put(Emitted& e, const std::string& key, bool v) {
  e.text.emplace_back(key, v ? "true" : "false");
  e.json[key] = v;
}
inline void put(Emitted& e, const std::string& key, const std::string& v) {
  e.text.emplace_back(key, v);
  e.json[key] = v;
}

inline void write_result(std::ostream& out, const RunConfig& cfg, const Emitted& e) {
  switch (cfg.format) {
    case Format::Text:
      for (std::size_t i = 0; i < e.text.size(); ++i) {
        out << (i ? " " : "") << e.text[i].first << '=' << e.text[i].second;
      }
      out << '\n';
      break;
    case Format::Json: {
      auto doc = inputs_json(cfg);
      doc.update(e.json);
      out << doc.dump() << '\n';
      break;
    }
    case Format::Csv:
      for (std::size_t i = 0; i < e.text.size(); ++i) out << (i ? "," : "") << e.text[i].first;
      out << '\n';
      for (std::size_t i = 0; i < e.text.size(); ++i) out << (i ? "," : "") << e.text[i].second;
      out << '\n';
      break;
  }
}

inline Emitted solution_fields(const SwitchOffSolution& s) {
  Emitted e;
  put(e, "t1_hat", s.t1_hat);
  put(e, "t2", s.t2);
  put(e, "y", s.y);
  put(e, "residual", s.delivered_residual);
  put(e, "method", std::string(to_string(s.method)));
  put(e, "feasible", s.feasible);
  return e;
}

inline double switch_off_for_curve(const RunConfig& cfg, const SupplyProfile& profile) {
  if (cfg.t1) return *cfg.t1;
  return solve_general(profile, demand_of(cfg)).t1_hat;
}

inline void execute(const RunConfig& cfg, std::ostream& out) {
  switch (cfg.command) {
    case Command::SolveExp:
      write_result(out, cfg,
                   solution_fields(solve_exponential({*cfg.a, *cfg.b, *cfg.t0, *cfg.T}, demand_of(cfg))));
      return;
    case Command::SolveLinear:
      write_result(out, cfg, solution_fields(solve_linear({*cfg.a, *cfg.t0, *cfg.T}, demand_of(cfg))));
      return;
    case Command::SolveGeneral:
      write_result(out, cfg, solution_fields(solve_general(profile_of(cfg), demand_of(cfg))));
      return;
    case Command::SolveFamily: {
      const auto profile = profile_of(cfg);
      std::optional<Interval> domain;
      if (cfg.t1_lo) domain = Interval(*cfg.t1_lo, *cfg.t1_hi);
      const auto family = family_from_profile(profile, demand_of(cfg), domain);
      write_result(out, cfg, solution_fields(solve_family(family, demand_of(cfg))));
      return;
    }
    case Command::NoSwitchoff: {
      const auto r = no_switchoff_time(profile_of(cfg), demand_of(cfg));
      Emitted e;
      put(e, "t", r.time);
      put(e, "during_ramp", r.during_ramp);
      write_result(out, cfg, e);
      return;
    }
    case Command::SolveNoisy: {
      const auto r = solve_noisy({*cfg.a, *cfg.b, *cfg.t0, *cfg.T}, noise_of(cfg), demand_of(cfg),
                                 sim_of(cfg, 1000));
      auto e = solution_fields(r.solution);
      put(e, "mc_energy", r.verification.energy_mean);
      put(e, "mc_stderr", r.verification.energy_stderr);
      put(e, "reference_energy", r.verification.reference_energy);
      write_result(out, cfg, e);
      return;
    }
    case Command::Simulate: {
      const auto profile = profile_of(cfg);
      const double t1 = switch_off_for_curve(cfg, profile);
      const auto sde = sde_of(cfg, t1);
      const auto sim = sim_of(cfg, 1000);
      const double t_end = extinction_time(profile, t1);
      if (sim.n_paths == 1) {
        const auto path = simulate_path(sde, sim, 0, t_end);
        out << "t,rate\n";
        for (std::size_t i = 0; i < path.time.size(); ++i) {
          out << fmt(path.time[i]) << ',' << fmt(path.rate[i]) << '\n';
        }
        return;
      }
      const auto est = estimate_mean(sde, sim, uniform_grid(t_end, cfg.points.value_or(101)));
      const auto mean = analytic_mean(sde);
      out << "t,mean,stderr,analytic_mean\n";
      for (std::size_t i = 0; i < est.grid.size(); ++i) {
        out << fmt(est.grid[i]) << ',' << fmt(est.mean[i]) << ',' << fmt(est.std_error[i]) << ','
            << fmt(mean(est.grid[i])) << '\n';
      }
      return;
    }
    case Command::Curve: {
      const auto profile = profile_of(cfg);
      const double t1 = switch_off_for_curve(cfg, profile);
      const auto n_points = static_cast<std::size_t>(cfg.points.value_or(1000));
      if (cfg.paths) {
        if (resolved_model(cfg) == "tabulated") {
          throw UsageError("stochastic curves support --model exp or linear");
        }
        const auto est = estimate_mean(sde_of(cfg, t1), sim_of(cfg, 1000),
                                       uniform_grid(extinction_time(profile, t1), n_points));
        emit_curve(out, profile, t1, n_points, &est);
      } else {
        emit_curve(out, profile, t1, n_points);
      }
      return;
    }
  }
}

inline int exit_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::QTooSmall:
    case ErrorKind::NotBracketed:
      return exit_code::kInfeasible;
    case ErrorKind::InvalidParams:
    case ErrorKind::InvalidProfile:
    case ErrorKind::SwitchOffBeforePeak:
    case ErrorKind::NonMonotoneSamples:
    case ErrorKind::ContinuityMismatch:
    case ErrorKind::EmptySamples:
    case ErrorKind::StepTooLarge:
      return exit_code::kUsage;
    default:
      return exit_code::kFailure;
  }
}

inline void report(std::ostream& out, std::ostream& err, const RunConfig* cfg,
                   const std::string& reason, const std::string& message) {
  std::string one_line = message;
  std::replace(one_line.begin(), one_line.end(), '\n', ' ');
  err << "switchoff: " << one_line << '\n';
  if (cfg && cfg->format == Format::Json) {
    nlohmann::ordered_json j;
    j["error"] = reason;
    j["message"] = one_line;
    out << j.dump() << '\n';
  }
}

}  // namespace detail

/// Runs a parsed configuration. Output goes to --out when set, otherwise `out`.
/// Exit codes: 0 success, 1 numeric or I/O failure, 2 usage, 3 infeasible.
inline int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  std::ofstream file;
  std::ostream* sink = &out;
  if (cfg.output_path) {
    file.open(*cfg.output_path, std::ios::binary);
    if (!file) {
      detail::report(out, err, &cfg, "IoError", "IoError: cannot write '" + *cfg.output_path + "'");
      return exit_code::kFailure;
    }
    sink = &file;
  }
  try {
    detail::execute(cfg, *sink);
    sink->flush();
    if (!*sink) {
      detail::report(out, err, &cfg, "IoError", "IoError: write failed");
      return exit_code::kFailure;
    }
    return exit_code::kOk;
  } catch (const Error& e) {
    detail::report(out, err, &cfg, std::string(to_string(e.kind())), e.what());
    return detail::exit_for(e.kind());
  } catch (const UsageError& e) {
    detail::report(out, err, &cfg, "UsageError", std::string("UsageError: ") + e.what());
    return exit_code::kUsage;
  } catch (const std::exception& e) {
    detail::report(out, err, &cfg, "IoError", std::string("IoError: ") + e.what());
    return exit_code::kFailure;
  }
}

inline int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  try {
    cfg = parse_args(args);
  } catch (const UsageError& e) {
    err << "switchoff: UsageError: " << e.what() << '\n'
        << "usage: switchoff-cli <solve-exp|solve-linear|solve-general|solve-family|no-switchoff|"
           "simulate|solve-noisy|curve> [--a --b --t0 --T --Q --t1 --dt --paths --seed --points "
           "--config --out --format]\n";
    return exit_code::kUsage;
  }
  return run(cfg, out, err);
}

}  // namespace switchoff::cli
