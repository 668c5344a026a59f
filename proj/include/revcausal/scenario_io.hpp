#pragma once

#include <cstdio>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "revcausal/errors.hpp"
#include "revcausal/scm.hpp"

namespace revcausal {

/// 12 significant digits, C locale, no trailing noise. All numeric text the
/// library emits (scenario files, CSV, reports) goes through here so output
/// is byte-stable across runs.
inline std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

namespace detail {

inline std::string trim_ws(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

/// `key = value` lines; `#` comments; blank lines ignored. Duplicate keys are
/// an error.
inline std::map<std::string, std::string> parse_key_values(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim_ws(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ValidationError("scenario", "malformed line (expected key = value): " + line);
    }
    const std::string key = trim_ws(line.substr(0, eq));
    const std::string value = trim_ws(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ValidationError("scenario", "malformed line (expected key = value): " + line);
    }
    if (!out.emplace(key, value).second) {
      throw ValidationError(key, "duplicate key: " + key);
    }
  }
  return out;
}

inline double parse_double(const std::string& key, const std::string& value) {
  std::size_t consumed = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &consumed);
  } catch (const std::exception&) {
    throw ValidationError(key, key + ": not a number: " + value);
  }
  if (consumed != value.size()) throw ValidationError(key, key + ": not a number: " + value);
  return v;
}

inline Scenario scenario_from_map(std::map<std::string, std::string> kv, bool unsafe) {
  auto it = kv.find("family");
  if (it == kv.end()) throw ValidationError("family", "scenario is missing the family key");
  const Family family = family_from_name(it->second);
  kv.erase(it);

  auto take = [&](const std::string& key, double fallback, bool required) {
    auto f = kv.find(key);
    if (f == kv.end()) {
      if (required) throw ValidationError(key, "missing required key: " + key);
      return fallback;
    }
    const double v = parse_double(key, f->second);
    kv.erase(f);
    return v;
  };

  const double vt = take("var_theta", 1.0, false);
  const double ve = take("var_eps", 1.0, false);
  const double vh = take("var_eta", 1.0, false);

  Scenario out = [&] {
    switch (family) {
      case Family::Main:
        return Scenario::main(take("gamma", 0, true), take("lambda", 0, true), vt, ve, vh, unsafe);
      case Family::ReverseOnly:
        return Scenario::reverse_only(take("gamma", 0, true), take("lambda", 0, true), vt, ve, vh,
                                      unsafe);
      case Family::ExogeneityOnly:
        return Scenario::exogeneity_only(take("kappa", 0, true), take("alpha", 0, true),
                                         take("delta", 0, true), vt, ve, vh, unsafe);
    }
    throw Error("unreachable");
  }();

  if (!kv.empty()) {
    const auto& stray = kv.begin()->first;
    throw ValidationError(stray, stray + " not a parameter of family " + family_name(family));
  }
  return out;
}

}  // namespace detail

/// Parse the flat key-value scenario format. Missing variances default to 1.
inline Scenario parse_scenario(const std::string& text, bool unsafe = false) {
  return detail::scenario_from_map(detail::parse_key_values(text), unsafe);
}

inline std::string format_scenario(const Scenario& s) {
  std::ostringstream out;
  out << "family = " << family_name(s.family()) << '\n';
  if (s.family() == Family::ExogeneityOnly) {
    out << "kappa = " << format_number(s.kappa()) << '\n';
    out << "alpha = " << format_number(s.alpha()) << '\n';
    out << "delta = " << format_number(s.delta()) << '\n';
  } else {
    out << "gamma = " << format_number(s.gamma()) << '\n';
    out << "lambda = " << format_number(s.lambda()) << '\n';
  }
  out << "var_theta = " << format_number(s.var_theta()) << '\n';
  out << "var_eps = " << format_number(s.var_eps()) << '\n';
  out << "var_eta = " << format_number(s.var_eta()) << '\n';
  return out.str();
}

/// Named scenario presets. The parameter values are implementation defaults
/// chosen for the documented stories; they are not calibrated estimates.
inline const std::vector<std::pair<std::string, std::string>>& preset_definitions() {
  static const std::vector<std::pair<std::string, std::string>> defs = {
      {"parenting",
       "family = main\ngamma = 0.5\nlambda = 0.25\nvar_theta = 1\nvar_eps = 1\nvar_eta = 1\n"},
      {"quantity-setting",
       "family = main\ngamma = 1\nlambda = 0.5\nvar_theta = 1\nvar_eps = 0.5\nvar_eta = 1\n"},
      {"phillips",  // pure prediction: the forecast has no effect on x
       "family = main\ngamma = 0\nlambda = 0.5\nvar_theta = 1\nvar_eps = 1\nvar_eta = 1\n"},
      {"public-health",
       "family = exogeneity-only\nkappa = 0.5\nalpha = 0.5\ndelta = 0.5\n"
       "var_theta = 1\nvar_eps = 1\nvar_eta = 1\n"},
      {"adolescent",
       "family = reverse-only\ngamma = 0.5\nlambda = 0.5\nvar_theta = 1\nvar_eps = 1\nvar_eta = 1\n"},
  };
  return defs;
}

inline std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& [name, text] : preset_definitions()) names.push_back(name);
  return names;
}

inline Scenario preset(const std::string& name) {
  for (const auto& [preset_name, text] : preset_definitions()) {
    if (preset_name == name) return parse_scenario(text);
  }
  throw ValidationError("preset", "unknown preset: " + name);
}

/// A parameter sweep over a base scenario.
struct SweepSpec {
  Scenario base;
  std::string parameter;             // gamma | lambda | tau | kappa | alpha | delta
  std::vector<double> grid;
  std::vector<std::string> outputs;  // extra CSV columns
};

/// Base scenario with the swept parameter replaced by `value`. Sweeping tau
/// rescales var_eps at fixed var_eta, keeping the y-equation noise as the
/// unit of account.
inline Scenario apply_sweep_value(const Scenario& base, const std::string& parameter,
                                  double value) {
  const bool unsafe = base.unsafe_params();
  const double vt = base.var_theta(), ve = base.var_eps(), vh = base.var_eta();
  const bool exo = base.family() == Family::ExogeneityOnly;

  auto rebuild_offsetting = [&](double gamma, double lambda, double var_eps) {
    return base.family() == Family::Main
               ? Scenario::main(gamma, lambda, vt, var_eps, vh, unsafe)
               : Scenario::reverse_only(gamma, lambda, vt, var_eps, vh, unsafe);
  };

  if (parameter == "tau") {
    if (exo) throw ValidationError("sweep", "tau does not apply to family exogeneity-only");
    if (value < 0.0) throw ValidationError("tau", "tau out of [0,inf)");
    return rebuild_offsetting(base.gamma(), base.lambda(), value * vh);
  }
  if (parameter == "gamma" || parameter == "lambda") {
    if (exo) {
      throw ValidationError("sweep", parameter + " does not apply to family exogeneity-only");
    }
    return rebuild_offsetting(parameter == "gamma" ? value : base.gamma(),
                              parameter == "lambda" ? value : base.lambda(), ve);
  }
  if (parameter == "kappa" || parameter == "alpha" || parameter == "delta") {
    if (!exo) {
      throw ValidationError("sweep",
                            parameter + " does not apply to family " + family_name(base.family()));
    }
    return Scenario::exogeneity_only(parameter == "kappa" ? value : base.kappa(),
                                     parameter == "alpha" ? value : base.alpha(),
                                     parameter == "delta" ? value : base.delta(), vt, ve, vh,
                                     unsafe);
  }
  throw ValidationError("sweep", "unknown sweep parameter: " + parameter);
}

/// Sweep files are scenario files plus `sweep = <param>` and
/// `grid = v1,v2,...`, with an optional `outputs = col1,col2,...`.
inline SweepSpec parse_sweep_spec(const std::string& text, bool unsafe = false) {
  auto kv = detail::parse_key_values(text);
  auto take_string = [&](const std::string& key) {
    auto it = kv.find(key);
    if (it == kv.end()) throw ValidationError(key, "sweep spec is missing the " + key + " key");
    std::string v = it->second;
    kv.erase(it);
    return v;
  };

  SweepSpec spec{parse_scenario("family = main\ngamma = 0\nlambda = 0\n"), "", {}, {}};
  spec.parameter = take_string("sweep");
  const std::string grid_text = take_string("grid");
  if (auto it = kv.find("outputs"); it != kv.end()) {
    std::istringstream cols(it->second);
    std::string col;
    while (std::getline(cols, col, ',')) {
      col = detail::trim_ws(col);
      if (!col.empty()) spec.outputs.push_back(col);
    }
    kv.erase(it);
  }
  spec.base = detail::scenario_from_map(std::move(kv), unsafe);

  std::istringstream cells(grid_text);
  std::string cell;
  while (std::getline(cells, cell, ',')) {
    cell = detail::trim_ws(cell);
    if (cell.empty()) continue;
    spec.grid.push_back(detail::parse_double("grid", cell));
  }
  if (spec.grid.empty()) throw ValidationError("grid", "sweep grid is empty");

  // Validate every grid point up front so a bad grid fails before any output.
  for (double v : spec.grid) apply_sweep_value(spec.base, spec.parameter, v);
  return spec;
}

}  // namespace revcausal
