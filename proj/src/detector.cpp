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

#include "collapse_lab/detector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace collapse_lab {

void StragglingModel::validate() const {
  switch (kind) {
    case StragglingKind::Deterministic:
    case StragglingKind::Exponential:
      if (!(mean > 0)) throw Error(ErrorCode::InvalidArgument, "straggling mean must be positive");
      break;
    case StragglingKind::TruncatedGaussian:
      if (!(sd >= 0)) throw Error(ErrorCode::InvalidArgument, "straggling sd must be non-negative");
      if (!(mean > 0) && sd == 0) throw Error(ErrorCode::InvalidArgument, "degenerate non-positive threshold");
      break;
  }
}

double StragglingModel::sample(std::mt19937_64& rng) const {
  switch (kind) {
    case StragglingKind::Deterministic:
      return mean;
    case StragglingKind::Exponential: {
      std::exponential_distribution<double> dist(1.0 / mean);
      double u = 0;
      while (!(u > 0)) u = dist(rng);
      return u;
    }
    case StragglingKind::TruncatedGaussian: {
      if (sd == 0) return mean;
      std::normal_distribution<double> dist(mean, sd);
      double u = 0;
      while (!(u > 0)) u = dist(rng);
      return u;
    }
  }
  return mean;
}

std::vector<Grain> place_grains(const Grid<double>& grid, std::span<const double> positions, double width,
                                const StragglingModel& straggling, double coupling, std::uint64_t seed) {
  straggling.validate();
  if (!(width >= 2 * grid.dx() * (1 - 1e-12))) throw Error(ErrorCode::GrainTooNarrow, "grain width below 2*dx");
  if (!(coupling >= 0)) throw Error(ErrorCode::InvalidArgument, "coupling must be non-negative");
  for (double y : positions) {
    if (!grid.contains(y - width / 2) || !grid.contains(y + width / 2)) {
      throw Error(ErrorCode::OutOfDomain, "grain extends outside the grid");
    }
  }
  std::vector<double> sorted(positions.begin(), positions.end());
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (!(sorted[i] - sorted[i - 1] > width)) throw Error(ErrorCode::OverlappingGrains, "grains overlap");
  }
  std::mt19937_64 rng(seed);
  std::vector<Grain> grains;
  grains.reserve(positions.size());
  for (std::size_t i = 0; i < positions.size(); ++i) {
    Grain g;
    g.id = static_cast<int>(i);
    g.position = positions[i];
    g.width = width;
    g.threshold = straggling.sample(rng);
    g.coupling = coupling;
    grains.push_back(g);
  }
  return grains;
}

namespace {

// Linear interpolation makes psi affine on each cell, so |psi|^2 is quadratic
// there and Simpson's rule integrates it exactly.
double cell_integral(const WaveField<double>& wf, double a, double b) {
  const double mid = 0.5 * (a + b);
  return (b - a) / 6.0 * (density_at(wf, a) + 4.0 * density_at(wf, mid) + density_at(wf, b));
}

}  // namespace

double forcing_weight(const WaveField<double>& wf, const Grain& grain) {
  const auto& grid = wf.grid;
  const double lo = grain.position - grain.width / 2;
  const double hi = grain.position + grain.width / 2;
  if (!grid.contains(lo) || !grid.contains(hi)) throw Error(ErrorCode::OutOfDomain, "grain outside grid");
  double total = 0;
  double a = lo;
  Index k = static_cast<Index>(std::floor((lo - grid.x_min()) / grid.dx())) + 1;
  for (; k < grid.n_points() && grid.x(k) < hi; ++k) {
    if (grid.x(k) > a) {
      total += cell_integral(wf, a, grid.x(k));
      a = grid.x(k);
    }
  }
  total += cell_integral(wf, a, hi);
  return total / grain.width;
}

double flatness_ratio(const WaveField<double>& wf, const Grain& grain) {
  const auto& grid = wf.grid;
  const double lo = grain.position - grain.width / 2;
  const double hi = grain.position + grain.width / 2;
  double mx = std::max(density_at(wf, lo), density_at(wf, hi));
  double mn = std::min(density_at(wf, lo), density_at(wf, hi));
  for (Index i = 0; i < grid.n_points(); ++i) {
    const double x = grid.x(i);
    if (x > lo && x < hi) {
      const double r = std::norm(wf.amplitudes[i]);
      mx = std::max(mx, r);
      mn = std::min(mn, r);
    }
  }
  if (mx == 0) return 1.0;
  return mn > 0 ? mx / mn : std::numeric_limits<double>::infinity();
}

Grain accumulate(Grain grain, double w, double dt, double t_start) {
  if (grain.triggered) throw Error(ErrorCode::AlreadyTriggered, "grain " + std::to_string(grain.id));
  if (!(w >= 0) || !(dt > 0)) throw Error(ErrorCode::InvalidArgument, "need w >= 0 and dt > 0");
  const double rate = grain.coupling * w;
  const double next = grain.energy + rate * dt;
  if (next >= grain.threshold && rate > 0) {
    const double fraction = std::clamp((grain.threshold - grain.energy) / (rate * dt), 0.0, 1.0);
    grain.triggered = true;
    grain.trigger_time = t_start + fraction * dt;
  }
  grain.energy = next;
  return grain;
}

std::optional<Trigger> first_trigger(std::span<const Grain> grains) {
  std::optional<Trigger> best;
  for (const auto& g : grains) {
    if (!g.triggered || !g.trigger_time) continue;
    if (!best || *g.trigger_time < best->time || (*g.trigger_time == best->time && g.id < best->grain_id)) {
      best = Trigger{g.id, *g.trigger_time};
    }
  }
  return best;
}

}  // namespace collapse_lab
