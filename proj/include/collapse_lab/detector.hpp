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
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "collapse_lab/wavefield.hpp"

namespace collapse_lab {

/// A detector element: accumulates oscillation energy at a rate set by the
/// local density and registers once the energy reaches its threshold.
struct Grain {
  int id = 0;
  double position = 0;
  double width = 0;
  double threshold = 1;  ///< U_A
  double energy = 0;     ///< accumulated E
  double coupling = 0;   ///< kappa: dE/dt = kappa * w
  bool triggered = false;
  std::optional<double> trigger_time;
};

enum class StragglingKind { Deterministic, Exponential, TruncatedGaussian };

/// Distribution of grain thresholds. Deterministic uses `mean` as the fixed value.
struct StragglingModel {
  StragglingKind kind = StragglingKind::Exponential;
  double mean = 1;
  double sd = 0;

  void validate() const;
  double sample(std::mt19937_64& rng) const;
};

std::vector<Grain> place_grains(const Grid<double>& grid, std::span<const double> positions, double width,
                                const StragglingModel& straggling, double coupling, std::uint64_t seed);

/// Mean of the interpolated density over [Y - width/2, Y + width/2].
double forcing_weight(const WaveField<double>& wf, const Grain& grain);

/// max/min density ratio over the grain span (1 for an empty region).
double flatness_ratio(const WaveField<double>& wf, const Grain& grain);

inline constexpr double kMaxFlatnessRatio = 1.05;

/// Advances E by kappa*w*dt over [t_start, t_start + dt]; on crossing the
/// trigger time is linearly interpolated in E.
Grain accumulate(Grain grain, double w, double dt, double t_start = 0);

struct Trigger {
  int grain_id;
  double time;
};

/// Earliest interpolated crossing among triggered grains; ties go to the lowest id.
std::optional<Trigger> first_trigger(std::span<const Grain> grains);

}  // namespace collapse_lab
