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

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "collapse_lab/collapse.hpp"
#include "collapse_lab/detector.hpp"
#include "collapse_lab/propagator.hpp"
#include "collapse_lab/wavefield.hpp"

namespace collapse_lab {

using Field = WaveField<double>;

enum class InitialKind { Gaussian, Stationary, Coherent };

struct InitialStateSpec {
  InitialKind kind = InitialKind::Stationary;
  double center = 0;    // gaussian
  double sigma = 1;     // gaussian
  double momentum = 0;  // gaussian
  int n = 0;            // stationary
  double x0 = 0;        // coherent
};

struct GrainLayout {
  std::vector<double> positions;
  double width = 0.02;
  double coupling = 1;
};

struct ExperimentConfig {
  Grid<double> grid{-20.0, 20.0, 1024};
  PotentialSpec<double> potential = HarmonicPotential<double>{};
  InitialStateSpec initial;
  PropagatorConfig<double> propagator;
  long n_steps = 0;  ///< used by the evolve command only
  GrainLayout grains;
  StragglingModel straggling;
  double epsilon_factor = 25;
  long n_trials = 1;
  std::uint64_t master_seed = 0;
  double max_time = 10;
  bool resample_thresholds = true;
  double significance = 0.01;

  /// Throws Error(Config) naming the offending field.
  void validate(bool require_grains) const;
};

Field initial_field(const ExperimentConfig& cfg);

/// Stable per-trial seed (splitmix64 mix of master seed and trial index).
std::uint64_t trial_seed(std::uint64_t master_seed, long trial_index);

/// p_j = w_j / sum_k w_k
std::vector<double> born_weights(const Field& wf, std::span<const Grain> grains);

struct TrialResult {
  long trial = 0;
  std::optional<CollapseEvent> event;  ///< empty on timeout
  double final_mean_x = 0;             ///< <x> of the localized post-collapse state
  double post_mass_omega1 = 0;         ///< omega I mass right after amplification
  std::vector<double> thresholds;
  std::vector<double> final_energies;
  std::vector<std::optional<double>> trigger_times;

  // Populated only when TrialOptions::keep_fields is set.
  std::optional<Field> pre_field;
  std::optional<Field> amplified_field;
  std::optional<Field> post_field;

  bool timeout() const { return !event.has_value(); }
};

struct TrialOptions {
  bool keep_fields = false;
  unsigned threads = 1;
  /// Called after every step with (time at end of step, grain bank) for single-trial runs.
  std::function<void(double, std::span<const Grain>)> energy_observer;
};

TrialResult run_trial(const ExperimentConfig& cfg, long trial_index, const TrialOptions& options = {});

/// Runs the given trials against one shared pre-collapse evolution.
std::vector<TrialResult> run_trials(const ExperimentConfig& cfg, std::span<const long> trial_indices,
                                    const TrialOptions& options = {});

struct RunStatistics {
  long n_trials = 0;
  std::vector<long> counts;
  long n_timeouts = 0;
  std::vector<double> frequencies;
  std::vector<double> born_weights;
  std::optional<double> chi_square;
  int df = 0;
  std::optional<double> chi_square_quantile;
  std::optional<bool> born_consistent;
};

struct EnsembleResult {
  RunStatistics statistics;
  std::vector<TrialResult> trials;
  std::vector<std::string> warnings;
};

EnsembleResult run_ensemble_detailed(const ExperimentConfig& cfg, unsigned threads = 1);
RunStatistics run_ensemble(const ExperimentConfig& cfg, unsigned threads = 1);

struct ChiSquare {
  double statistic;
  int df;
};

/// Pearson statistic of counts against born_weights over non-timeout trials.
ChiSquare chi_square(const RunStatistics& stats);

/// Regularized lower incomplete gamma P(a, x).
double regularized_gamma_p(double a, double x);
double chi_square_cdf(double x, int df);
/// Inverse of chi_square_cdf by bisection.
double chi_square_quantile(double probability, int df);

}  // namespace collapse_lab
