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

#include "collapse_lab/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "collapse_lab/config.hpp"
#include "collapse_lab/experiment.hpp"
#include "collapse_lab/io.hpp"
#include "collapse_lab/validate.hpp"

namespace collapse_lab {

using nlohmann::json;

namespace {

/// Tracks emitted files so the manifest can list them with checksums.
class OutputSet {
 public:
  OutputSet(std::filesystem::path dir, std::string subcommand, const CliOptions& options)
      : dir_(std::move(dir)) {
    manifest_.subcommand = std::move(subcommand);
    manifest_.config_path = options.config.string();
    manifest_.out_dir = dir_.string();
    manifest_.verbosity = options.verbose ? 1 : 0;
  }

  void write(const std::string& relative, std::string_view content) {
    write_file_atomic(dir_ / relative, content);
    manifest_.files.push_back({relative, sha256_hex(content)});
  }

  void finish() {
    json files = json::array();
    for (const auto& f : manifest_.files) files.push_back({{"path", f.path}, {"sha256", f.sha256}});
    const json doc = {{"subcommand", manifest_.subcommand},
                      {"config", manifest_.config_path},
                      {"out_dir", manifest_.out_dir},
                      {"verbosity", manifest_.verbosity},
                      {"files", files}};
    write_file_atomic(dir_ / "manifest.json", doc.dump(2) + "\n");
  }

 private:
  std::filesystem::path dir_;
  RunManifest manifest_;
};

bool all_finite(const Field& wf) { return wf.amplitudes.allFinite(); }

ExperimentConfig load(const CliOptions& options, bool require_grains) {
  auto cfg = load_config(options.config);
  if (options.seed) cfg.master_seed = *options.seed;
  cfg.validate(require_grains);
  return cfg;
}

/// Maps library errors to exit codes; config problems are 2, numerical ones 3.
template <typename F>
int guarded(F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    switch (e.code()) {
      case ErrorCode::Config:
      case ErrorCode::InvalidGrid:
      case ErrorCode::InvalidArgument:
      case ErrorCode::GridTooCoarse:
      case ErrorCode::SupportClipped:
      case ErrorCode::Unsupported:
      case ErrorCode::FresnelUnresolved:
      case ErrorCode::KernelAliased:
      case ErrorCode::NonPowerOfTwoGrid:
      case ErrorCode::OverlappingGrains:
      case ErrorCode::GrainTooNarrow:
      case ErrorCode::GrainNotFlat:
      case ErrorCode::OutOfDomain:
        return kExitConfig;
      default:
        return kExitNumerical;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

std::string trials_csv(const std::vector<TrialResult>& trials) {
  std::string out = "trial,winner,trigger_time\n";
  for (const auto& t : trials) {
    out += std::to_string(t.trial);
    out += ',';
    if (t.event) {
      out += std::to_string(t.event->grain_id);
      out += ',';
      out += format_double(t.event->trigger_time);
    } else {
      out += "-1,";
    }
    out += '\n';
  }
  return out;
}

}  // namespace

std::filesystem::path resolve_out_dir(const CliOptions& options) {
  if (const char* env = std::getenv("COLLAPSE_LAB_OUT"); env != nullptr && *env != '\0') return env;
  return options.out_dir;
}

bool verify_manifest(const std::filesystem::path& out_dir) {
  std::ifstream in(out_dir / "manifest.json");
  if (!in) return false;
  try {
    const json doc = json::parse(in);
    for (const auto& f : doc.at("files")) {
      const auto path = out_dir / f.at("path").get<std::string>();
      if (!std::filesystem::exists(path)) return false;
      if (sha256_file(path) != f.at("sha256").get<std::string>()) return false;
    }
  } catch (const std::exception&) {
    return false;
  }
  return true;
}

int cmd_evolve(const CliOptions& options) {
  return guarded([&] {
    const auto cfg = load(options, false);
    const auto psi0 = initial_field(cfg);
    const auto traj = evolve(psi0, cfg.potential, cfg.propagator, cfg.n_steps);
    const double hbar = cfg.propagator.hbar;

    OutputSet out(resolve_out_dir(options), "evolve", options);
    std::string series = "t,norm2,mean_x,mean_p,sigma_x\n";
    for (std::size_t i = 0; i < traj.size(); ++i) {
      if (!all_finite(traj[i])) {
        std::cerr << "error: non-finite amplitudes at t=" << traj[i].time << "\n";
        return static_cast<int>(kExitNumerical);
      }
      const auto obs = observables(traj[i], cfg.potential, hbar);
      series += format_double(traj[i].time) + ',' + format_double(obs.norm2) + ',' + format_double(obs.mean_x) +
                ',' + format_double(obs.mean_p) + ',' + format_double(obs.sigma_x) + '\n';
      char name[48];
      std::snprintf(name, sizeof name, "snapshots/snapshot_%05zu.csv", i);
      out.write(name, field_csv(traj[i]));
    }
    out.write("timeseries.csv", series);

    json summary = {{"n_steps", cfg.n_steps}, {"snapshots", traj.size()}};
    int code = kExitOk;
    const bool pow2 = (cfg.grid.n_points() & (cfg.grid.n_points() - 1)) == 0;
    if (cfg.propagator.method == Method::KernelMatrix && pow2 && cfg.n_steps > 0) {
      // The spectral method is the accuracy reference for the kernel run.
      auto ref_cfg = cfg.propagator;
      ref_cfg.method = Method::Spectral;
      const auto ref = evolve(psi0, cfg.potential, ref_cfg, cfg.n_steps).back();
      const double distance = density_distance(traj.back(), ref);
      summary["cross_check_density_l2"] = distance;
      summary["cross_check_tolerance"] = 1e-3;
      if (!(distance < 1e-3)) {
        std::cerr << "error: kernel and spectral densities differ by " << distance << "\n";
        code = kExitNumerical;
      }
    }
    out.write("summary.json", summary.dump(2) + "\n");
    out.finish();
    return code;
  });
}

int cmd_measure(const CliOptions& options) {
  return guarded([&] {
    const auto cfg = load(options, true);
    TrialOptions topts;
    topts.keep_fields = true;
    topts.threads = 1;
    std::string energies;
    if (options.verbose) {
      energies = "t";
      for (std::size_t j = 0; j < cfg.grains.positions.size(); ++j) energies += ",E_" + std::to_string(j);
      energies += '\n';
      topts.energy_observer = [&energies](double t, std::span<const Grain> grains) {
        energies += format_double(t);
        for (const auto& g : grains) energies += ',' + format_double(g.energy);
        energies += '\n';
      };
    }
    const auto result = run_trial(cfg, 0, topts);

    OutputSet out(resolve_out_dir(options), "measure", options);
    if (options.verbose) out.write("energies.csv", energies);
    json doc = trial_to_json(result);
    doc["master_seed"] = cfg.master_seed;
    doc["thresholds"] = result.thresholds;
    doc["final_energies"] = result.final_energies;
    if (result.timeout()) {
      out.write("event.json", doc.dump(2) + "\n");
      out.finish();
      std::cerr << "no collapse within max_time\n";
      return static_cast<int>(kExitTimeout);
    }
    doc["post_mass_omega1"] = result.post_mass_omega1;
    doc["final_mean_x"] = result.final_mean_x;
    out.write("event.json", doc.dump(2) + "\n");
    out.write("pre_collapse.csv", field_csv(*result.pre_field));
    out.write("amplified.csv", field_csv(*result.amplified_field));
    out.write("post_collapse.csv", field_csv(*result.post_field));
    out.finish();
    return static_cast<int>(kExitOk);
  });
}

int cmd_ensemble(const CliOptions& options) {
  return guarded([&] {
    const auto cfg = load(options, true);
    const auto result = run_ensemble_detailed(cfg, options.threads);

    json events = json::array();
    for (const auto& t : result.trials) events.push_back(trial_to_json(t));
    const json doc = {{"config", config_to_json(cfg)},
                      {"master_seed", cfg.master_seed},
                      {"warnings", result.warnings},
                      {"events", events},
                      {"statistics", statistics_to_json(result.statistics)}};

    OutputSet out(resolve_out_dir(options), "ensemble", options);
    out.write("results.json", doc.dump(2) + "\n");
    out.write("trials.csv", trials_csv(result.trials));
    out.write("born_chart.svg",
              frequency_chart_svg(result.statistics.frequencies, result.statistics.born_weights));
    out.finish();

    const auto& stats = result.statistics;
    std::cout << "trials " << stats.n_trials << ", timeouts " << stats.n_timeouts;
    if (stats.chi_square) std::cout << ", chi2 " << *stats.chi_square << " (0.99 quantile " << *stats.chi_square_quantile << ")";
    std::cout << "\n";
    if (options.enforce_born && !(stats.born_consistent && *stats.born_consistent)) {
      std::cerr << "Born-rule check failed or could not be evaluated\n";
      return static_cast<int>(kExitBornRejected);
    }
    return static_cast<int>(kExitOk);
  });
}

int cmd_validate(const CliOptions& options) {
  return guarded([&] {
    ValidationOptions vopts;
    vopts.corrupt_kernel = options.inject_fault == "kernel";
    const auto checks = run_validation(vopts);
    OutputSet out(resolve_out_dir(options), "validate", options);
    out.write("validation_report.json", validation_report(checks).dump(2) + "\n");
    out.finish();
    bool ok = true;
    for (const auto& c : checks) {
      std::cout << (c.pass ? "PASS " : "FAIL ") << c.test << "  got=" << c.got << " expected=" << c.expected
                << " tol=" << c.tolerance << "\n";
      ok = ok && c.pass;
    }
    return static_cast<int>(ok ? kExitOk : kExitNumerical);
  });
}

int run_cli(int argc, char** argv) {
  CLI::App app{"collapse_lab: measurement-dynamics simulator"};
  app.require_subcommand(1);
  CliOptions options;
  std::uint64_t seed = 0;

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* cfg = sub->add_option("--config", options.config, "experiment config (JSON)");
    if (needs_config) cfg->required();
    sub->add_option("--out", options.out_dir, "output directory (COLLAPSE_LAB_OUT overrides)");
    sub->add_option("--seed", seed, "master seed override");
    sub->add_option("--threads", options.threads, "worker threads, 0 = all cores");
    sub->add_flag("--verbose", options.verbose, "write per-step grain energies");
  };
  auto* evolve_cmd = app.add_subcommand("evolve", "evolve the initial state and write a time series");
  add_common(evolve_cmd, true);
  auto* measure_cmd = app.add_subcommand("measure", "run one measurement trial");
  add_common(measure_cmd, true);
  auto* ensemble_cmd = app.add_subcommand("ensemble", "run a Monte Carlo ensemble of trials");
  add_common(ensemble_cmd, true);
  ensemble_cmd->add_flag("--enforce-born", options.enforce_born, "exit 5 when the chi-square test rejects");
  auto* validate_cmd = app.add_subcommand("validate", "run the oracle suite");
  add_common(validate_cmd, false);
  validate_cmd->add_option("--inject-fault", options.inject_fault)->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(kExitConfig);
  }
  for (auto* sub : app.get_subcommands()) {
    if (sub->count("--seed") > 0) options.seed = seed;
  }
  if (evolve_cmd->parsed()) return cmd_evolve(options);
  if (measure_cmd->parsed()) return cmd_measure(options);
  if (ensemble_cmd->parsed()) return cmd_ensemble(options);
  return cmd_validate(options);
}

}  // namespace collapse_lab
