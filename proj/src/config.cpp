// Copyright 2026 The collapse-lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "collapse_lab/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace collapse_lab {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& why) {
  throw Error(ErrorCode::Config, "field '" + field + "': " + why);
}

std::string join(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

void reject_unknown(const json& j, const std::string& prefix, std::initializer_list<const char*> allowed) {
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items()) {
    if (!keys.contains(key)) fail(join(prefix, key), "unknown key");
  }
}

const json& object_at(const json& j, const std::string& prefix, const char* key) {
  if (!j.contains(key)) fail(join(prefix, key), "missing");
  const json& v = j.at(key);
  if (!v.is_object()) fail(join(prefix, key), "expected an object");
  return v;
}

template <typename T>
T read(const json& j, const std::string& prefix, const char* key) {
  if (!j.contains(key)) fail(join(prefix, key), "missing");
  const json& v = j.at(key);
  if constexpr (std::is_same_v<T, bool>) {
    if (!v.is_boolean()) fail(join(prefix, key), "expected a boolean");
  } else if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_integer()) fail(join(prefix, key), "expected an integer");
  } else if constexpr (std::is_floating_point_v<T>) {
    if (!v.is_number()) fail(join(prefix, key), "expected a number");
  } else {
    if (!v.is_string()) fail(join(prefix, key), "expected a string");
  }
  return v.get<T>();
}

template <typename T>
T read_or(const json& j, const std::string& prefix, const char* key, T fallback) {
  return j.contains(key) ? read<T>(j, prefix, key) : fallback;
}

std::vector<double> read_numbers(const json& j, const std::string& prefix, const char* key) {
  if (!j.contains(key)) fail(join(prefix, key), "missing");
  const json& v = j.at(key);
  if (!v.is_array()) fail(join(prefix, key), "expected an array of numbers");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) fail(join(prefix, key), "expected an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

Grid<double> parse_grid(const json& j, const std::string& p) {
  reject_unknown(j, p, {"x_min", "x_max", "n_points"});
  try {
    return Grid<double>(read<double>(j, p, "x_min"), read<double>(j, p, "x_max"), read<long>(j, p, "n_points"));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Config) throw;
    fail(p, e.what());
  }
}

PotentialSpec<double> parse_potential(const json& j, const std::string& p) {
  const auto kind = read<std::string>(j, p, "kind");
  if (kind == "free") {
    reject_unknown(j, p, {"kind"});
    return FreePotential{};
  }
  if (kind == "harmonic") {
    reject_unknown(j, p, {"kind", "mass", "omega"});
    return HarmonicPotential<double>{read_or(j, p, "mass", 1.0), read_or(j, p, "omega", 1.0)};
  }
  if (kind == "square_well") {
    reject_unknown(j, p, {"kind", "depth", "half_width"});
    return SquareWellPotential<double>{read<double>(j, p, "depth"), read<double>(j, p, "half_width")};
  }
  if (kind == "tabulated") {
    reject_unknown(j, p, {"kind", "values"});
    const auto v = read_numbers(j, p, "values");
    TabulatedPotential<double> t;
    t.values = Eigen::Map<const Eigen::ArrayXd>(v.data(), static_cast<Index>(v.size()));
    return t;
  }
  fail(join(p, "kind"), "unknown potential kind '" + kind + "'");
}

}  // namespace

json grid_to_json(const Grid<double>& grid) {
  return {{"x_min", grid.x_min()}, {"x_max", grid.x_max()}, {"n_points", grid.n_points()}};
}

Grid<double> grid_from_json(const json& j) { return parse_grid(j, "grid"); }

json potential_to_json(const PotentialSpec<double>& potential) {
  return std::visit(
      [](const auto& p) -> json {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, FreePotential>) {
          return {{"kind", "free"}};
        } else if constexpr (std::is_same_v<P, HarmonicPotential<double>>) {
          return {{"kind", "harmonic"}, {"mass", p.mass}, {"omega", p.omega}};
        } else if constexpr (std::is_same_v<P, SquareWellPotential<double>>) {
          return {{"kind", "square_well"}, {"depth", p.depth}, {"half_width", p.half_width}};
        } else {
          return {{"kind", "tabulated"}, {"values", std::vector<double>(p.values.begin(), p.values.end())}};
        }
      },
      potential);
}

PotentialSpec<double> potential_from_json(const json& j) { return parse_potential(j, "potential"); }

ExperimentConfig config_from_json(const json& doc) {
  if (!doc.is_object()) fail("<root>", "expected a JSON object");
  reject_unknown(doc, "",
                 {"grid", "potential", "initial_state", "propagator", "n_steps", "grains", "straggling",
                  "epsilon_factor", "n_trials", "master_seed", "max_time", "resample_thresholds", "significance"});
  ExperimentConfig cfg;
  cfg.grid = parse_grid(object_at(doc, "", "grid"), "grid");
  if (doc.contains("potential")) cfg.potential = parse_potential(object_at(doc, "", "potential"), "potential");

  if (doc.contains("initial_state")) {
    const std::string p = "initial_state";
    const json& j = object_at(doc, "", "initial_state");
    const auto kind = read<std::string>(j, p, "kind");
    if (kind == "gaussian") {
      reject_unknown(j, p, {"kind", "center", "sigma", "momentum"});
      cfg.initial.kind = InitialKind::Gaussian;
      cfg.initial.center = read_or(j, p, "center", 0.0);
      cfg.initial.sigma = read<double>(j, p, "sigma");
      cfg.initial.momentum = read_or(j, p, "momentum", 0.0);
    } else if (kind == "stationary") {
      reject_unknown(j, p, {"kind", "n"});
      cfg.initial.kind = InitialKind::Stationary;
      cfg.initial.n = read_or(j, p, "n", 0);
    } else if (kind == "coherent") {
      reject_unknown(j, p, {"kind", "x0"});
      cfg.initial.kind = InitialKind::Coherent;
      cfg.initial.x0 = read<double>(j, p, "x0");
    } else {
      fail(join(p, "kind"), "unknown initial state kind '" + kind + "'");
    }
  }

  if (doc.contains("propagator")) {
    const std::string p = "propagator";
    const json& j = object_at(doc, "", "propagator");
    reject_unknown(j, p, {"method", "dt", "hbar", "mass", "renorm_each_step", "snapshot_stride"});
    const auto method = read_or<std::string>(j, p, "method", "spectral");
    if (method == "kernel_matrix") {
      cfg.propagator.method = Method::KernelMatrix;
    } else if (method == "spectral") {
      cfg.propagator.method = Method::Spectral;
    } else {
      fail(join(p, "method"), "unknown method '" + method + "'");
    }
    cfg.propagator.dt = read_or(j, p, "dt", cfg.propagator.dt);
    cfg.propagator.hbar = read_or(j, p, "hbar", cfg.propagator.hbar);
    cfg.propagator.mass = read_or(j, p, "mass", cfg.propagator.mass);
    cfg.propagator.renorm_each_step = read_or(j, p, "renorm_each_step", cfg.propagator.renorm_each_step);
    cfg.propagator.snapshot_stride = read_or<long>(j, p, "snapshot_stride", cfg.propagator.snapshot_stride);
  }

  if (doc.contains("grains")) {
    const std::string p = "grains";
    const json& j = object_at(doc, "", "grains");
    reject_unknown(j, p, {"positions", "width", "coupling"});
    cfg.grains.positions = read_numbers(j, p, "positions");
    cfg.grains.width = read<double>(j, p, "width");
    cfg.grains.coupling = read<double>(j, p, "coupling");
  }

  if (doc.contains("straggling")) {
    const std::string p = "straggling";
    const json& j = object_at(doc, "", "straggling");
    reject_unknown(j, p, {"kind", "mean", "sd"});
    const auto kind = read<std::string>(j, p, "kind");
    if (kind == "deterministic") {
      cfg.straggling.kind = StragglingKind::Deterministic;
    } else if (kind == "exponential") {
      cfg.straggling.kind = StragglingKind::Exponential;
    } else if (kind == "truncated_gaussian") {
      cfg.straggling.kind = StragglingKind::TruncatedGaussian;
      cfg.straggling.sd = read<double>(j, p, "sd");
    } else {
      fail(join(p, "kind"), "unknown straggling kind '" + kind + "'");
    }
    cfg.straggling.mean = read<double>(j, p, "mean");
  }

  cfg.n_steps = read_or<long>(doc, "", "n_steps", cfg.n_steps);
  cfg.epsilon_factor = read_or(doc, "", "epsilon_factor", cfg.epsilon_factor);
  cfg.n_trials = read_or<long>(doc, "", "n_trials", cfg.n_trials);
  cfg.master_seed = read_or<std::uint64_t>(doc, "", "master_seed", cfg.master_seed);
  cfg.max_time = read_or(doc, "", "max_time", cfg.max_time);
  cfg.resample_thresholds = read_or(doc, "", "resample_thresholds", cfg.resample_thresholds);
  cfg.significance = read_or(doc, "", "significance", cfg.significance);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Config, "cannot open config file '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Config, "malformed JSON in '" + path.string() + "': " + e.what());
  }
  return config_from_json(doc);
}

json config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["grid"] = grid_to_json(cfg.grid);
  j["potential"] = potential_to_json(cfg.potential);
  switch (cfg.initial.kind) {
    case InitialKind::Gaussian:
      j["initial_state"] = {{"kind", "gaussian"},
                            {"center", cfg.initial.center},
                            {"sigma", cfg.initial.sigma},
                            {"momentum", cfg.initial.momentum}};
      break;
    case InitialKind::Stationary:
      j["initial_state"] = {{"kind", "stationary"}, {"n", cfg.initial.n}};
      break;
    case InitialKind::Coherent:
      j["initial_state"] = {{"kind", "coherent"}, {"x0", cfg.initial.x0}};
      break;
  }
  j["propagator"] = {{"method", cfg.propagator.method == Method::KernelMatrix ? "kernel_matrix" : "spectral"},
                     {"dt", cfg.propagator.dt},
                     {"hbar", cfg.propagator.hbar},
                     {"mass", cfg.propagator.mass},
                     {"renorm_each_step", cfg.propagator.renorm_each_step},
                     {"snapshot_stride", cfg.propagator.snapshot_stride}};
  j["n_steps"] = cfg.n_steps;
  j["grains"] = {{"positions", cfg.grains.positions}, {"width", cfg.grains.width}, {"coupling", cfg.grains.coupling}};
  json s = {{"mean", cfg.straggling.mean}};
  switch (cfg.straggling.kind) {
    case StragglingKind::Deterministic: s["kind"] = "deterministic"; break;
    case StragglingKind::Exponential: s["kind"] = "exponential"; break;
    case StragglingKind::TruncatedGaussian:
      s["kind"] = "truncated_gaussian";
      s["sd"] = cfg.straggling.sd;
      break;
  }
  j["straggling"] = s;
  j["epsilon_factor"] = cfg.epsilon_factor;
  j["n_trials"] = cfg.n_trials;
  j["master_seed"] = cfg.master_seed;
  j["max_time"] = cfg.max_time;
  j["resample_thresholds"] = cfg.resample_thresholds;
  j["significance"] = cfg.significance;
  return j;
}

json event_to_json(const CollapseEvent& event) {
  return {{"trial", event.trial_id},
          {"grain", event.grain_id},
          {"t", event.trigger_time},
          {"epsilon", event.epsilon},
          {"exponent", event.exponent},
          {"pre_weights", event.pre_weights},
          {"pre_mass_omega1", event.pre_mass_omega1}};
}

json trial_to_json(const TrialResult& trial) {
  if (!trial.event) return {{"trial", trial.trial}, {"timeout", true}};
  return event_to_json(*trial.event);
}

json statistics_to_json(const RunStatistics& stats) {
  json j = {{"n_trials", stats.n_trials},
            {"counts", stats.counts},
            {"n_timeouts", stats.n_timeouts},
            {"frequencies", stats.frequencies},
            {"born_weights", stats.born_weights},
            {"df", stats.df}};
  j["chi_square"] = stats.chi_square ? json(*stats.chi_square) : json(nullptr);
  j["chi_square_quantile"] = stats.chi_square_quantile ? json(*stats.chi_square_quantile) : json(nullptr);
  j["born_consistent"] = stats.born_consistent ? json(*stats.born_consistent) : json(nullptr);
  return j;
}

}  // namespace collapse_lab
