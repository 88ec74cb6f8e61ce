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

#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "collapse_lab/detector.hpp"

using namespace collapse_lab;

namespace {

constexpr double kPi = std::numbers::pi;

StragglingModel deterministic(double u) { return {StragglingKind::Deterministic, u, 0.0}; }
StragglingModel exponential(double mean) { return {StragglingKind::Exponential, mean, 0.0}; }

Grain make_grain(int id, double threshold, double coupling) {
  Grain g;
  g.id = id;
  g.threshold = threshold;
  g.coupling = coupling;
  return g;
}

/// Steps a constant-weight grain until it triggers; returns the interpolated time.
double ramp_trigger_time(Grain g, double w, double dt) {
  double t = 0;
  while (!g.triggered) {
    g = accumulate(g, w, dt, t);
    t += dt;
  }
  return *g.trigger_time;
}

}  // namespace

TEST_CASE("place_grains") {
  const Grid<double> grid(-10.0, 10.0, 2048);
  const std::vector<double> pos = {-2.0, 0.0, 1.5};

  SUBCASE("deterministic thresholds") {
    const auto grains = place_grains(grid, pos, 0.05, deterministic(1.0), 2.0, 1);
    REQUIRE(grains.size() == 3);
    for (std::size_t i = 0; i < grains.size(); ++i) {
      CHECK(grains[i].threshold == 1.0);
      CHECK(grains[i].energy == 0.0);
      CHECK_FALSE(grains[i].triggered);
      CHECK(grains[i].id == static_cast<int>(i));
      CHECK(grains[i].coupling == 2.0);
    }
  }
  SUBCASE("seeded exponential thresholds are reproducible") {
    const auto a = place_grains(grid, pos, 0.05, exponential(1.0), 1.0, 99);
    const auto b = place_grains(grid, pos, 0.05, exponential(1.0), 1.0, 99);
    const auto c = place_grains(grid, pos, 0.05, exponential(1.0), 1.0, 100);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].threshold == b[i].threshold);
    CHECK(a[0].threshold != c[0].threshold);
  }
  SUBCASE("exponential sample mean") {
    std::mt19937_64 rng(5);
    const auto model = exponential(1.0);
    double sum = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
      const double u = model.sample(rng);
      REQUIRE(u > 0);
      sum += u;
    }
    CHECK(std::abs(sum / n - 1.0) < 0.01);
  }
  SUBCASE("truncated gaussian stays positive") {
    std::mt19937_64 rng(6);
    const StragglingModel model{StragglingKind::TruncatedGaussian, 0.2, 0.5};
    for (int i = 0; i < 10000; ++i) REQUIRE(model.sample(rng) > 0);
  }
  SUBCASE("errors") {
    auto code = [&](auto&& f) {
      try {
        f();
      } catch (const Error& e) {
        return e.code();
      }
      return ErrorCode::Config;
    };
    const std::vector<double> close = {0.0, 0.04};
    CHECK(code([&] { place_grains(grid, close, 0.05, deterministic(1), 1, 0); }) == ErrorCode::OverlappingGrains);
    const std::vector<double> outside = {9.99};
    CHECK(code([&] { place_grains(grid, outside, 0.05, deterministic(1), 1, 0); }) == ErrorCode::OutOfDomain);
    CHECK(code([&] { place_grains(grid, pos, grid.dx(), deterministic(1), 1, 0); }) == ErrorCode::GrainTooNarrow);
    CHECK(code([&] { place_grains(grid, pos, 0.05, exponential(0.0), 1, 0); }) == ErrorCode::InvalidArgument);
  }
}

TEST_CASE("forcing_weight") {
  const Grid<double> grid(-10.0, 10.0, 2048);

  SUBCASE("zero amplitude near the grain") {
    auto wf = new_gaussian(grid, -5.0, 0.3, 0.0);
    for (Eigen::Index i = 0; i < grid.n_points(); ++i)
      if (grid.x(i) > 0) wf.amplitudes[i] = 0;
    Grain g = make_grain(0, 1, 1);
    g.position = 6.0;
    g.width = 0.05;
    CHECK(forcing_weight(wf, g) == 0.0);
  }
  SUBCASE("symmetric grains see equal weights") {
    const auto wf = new_gaussian(grid, 0.0, 1.0, 0.0);
    const auto grains = place_grains(grid, std::vector<double>{-0.8, 0.8}, 0.05, deterministic(1), 1, 0);
    CHECK(forcing_weight(wf, grains[0]) == doctest::Approx(forcing_weight(wf, grains[1])).epsilon(1e-12));
  }
  SUBCASE("grain at the packet center matches peak density") {
    const double sigma = 1.0;
    const auto wf = new_gaussian(grid, 0.0, sigma, 0.0);
    Grain g = make_grain(0, 1, 1);
    g.position = 0.0;
    g.width = sigma / 4;
    // Average of the closed-form density over the grain, by fine trapezoid.
    const int n = 20000;
    double avg = 0;
    for (int i = 0; i <= n; ++i) {
      const double x = -g.width / 2 + g.width * i / n;
      const double rho = std::exp(-x * x / (2 * sigma * sigma)) / std::sqrt(2 * kPi * sigma * sigma);
      avg += (i == 0 || i == n ? 0.5 : 1.0) * rho;
    }
    avg /= n;
    const double peak = 1.0 / std::sqrt(2 * kPi * sigma * sigma);
    CHECK(std::abs(avg / peak - 1) < 0.005);
    CHECK(forcing_weight(wf, g) == doctest::Approx(avg).epsilon(1e-4));
  }
  SUBCASE("flatness ratio") {
    const auto wf = new_gaussian(grid, 0.0, 1.0, 0.0);
    Grain g = make_grain(0, 1, 1);
    g.width = 0.02;
    g.position = 0.0;
    CHECK(flatness_ratio(wf, g) < 1.001);
    g.position = 3.0;
    g.width = 0.5;
    CHECK(flatness_ratio(wf, g) > kMaxFlatnessRatio);
  }
}

TEST_CASE("accumulate") {
  SUBCASE("zero weight leaves the energy unchanged") {
    const auto g = accumulate(make_grain(0, 1, 1), 0.0, 0.01);
    CHECK(g.energy == 0.0);
    CHECK_FALSE(g.triggered);
  }
  SUBCASE("linear rule") {
    CHECK(accumulate(make_grain(0, 1, 1), 0.5, 0.01).energy == doctest::Approx(0.005).epsilon(1e-15));
  }
  SUBCASE("ramp first passage") {
    const double dt = 0.01;
    for (double w : {0.1, 0.37, 2.0}) {
      const double t = ramp_trigger_time(make_grain(0, 1.3, 0.8), w, dt);
      CHECK(std::abs(t - 1.3 / (0.8 * w)) <= dt);
      // Interpolation within the step recovers the crossing exactly for a linear ramp.
      CHECK(t == doctest::Approx(1.3 / (0.8 * w)).epsilon(1e-9));
    }
  }
  SUBCASE("doubling the coupling halves the trigger time") {
    const double t1 = ramp_trigger_time(make_grain(0, 1.0, 1.0), 0.3, 0.01);
    const double t2 = ramp_trigger_time(make_grain(0, 1.0, 2.0), 0.3, 0.01);
    CHECK(t2 == doctest::Approx(t1 / 2).epsilon(1e-9));
  }
  SUBCASE("energy is monotone and untriggered grains stay below threshold") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Grain g = make_grain(0, 5.0, 1.0);
    double t = 0;
    while (!g.triggered) {
      const double before = g.energy;
      const double w = u(rng) < 0.2 ? 0.0 : u(rng);
      g = accumulate(g, w, 0.05, t);
      t += 0.05;
      CHECK(g.energy >= before);
      if (w > 0) CHECK(g.energy > before);
      if (!g.triggered) CHECK(g.energy < g.threshold);
    }
    try {
      accumulate(g, 1.0, 0.05, t);
      FAIL("expected AlreadyTriggered");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::AlreadyTriggered);
    }
  }
}

TEST_CASE("first_trigger") {
  std::vector<Grain> grains = {make_grain(0, 1, 1), make_grain(1, 1, 1), make_grain(2, 1, 1)};
  CHECK_FALSE(first_trigger(grains).has_value());

  grains[1].triggered = true;
  grains[1].trigger_time = 0.7;
  REQUIRE(first_trigger(grains).has_value());
  CHECK(first_trigger(grains)->grain_id == 1);

  // Two crossings in one step: E from 0.9 with rates 0.5 and 0.3 over dt = 0.5 cross
  // threshold 1 at 0.2 and 1/3 into the step.
  std::vector<Grain> race = {make_grain(0, 1, 0.3), make_grain(1, 1, 0.5)};
  race[0].energy = race[1].energy = 0.9;
  race[0] = accumulate(race[0], 1.0, 0.5, 2.0);
  race[1] = accumulate(race[1], 1.0, 0.5, 2.0);
  REQUIRE(race[0].triggered);
  REQUIRE(race[1].triggered);
  CHECK(*race[1].trigger_time == doctest::Approx(2.2));
  CHECK(*race[0].trigger_time == doctest::Approx(2.0 + 1.0 / 3.0));
  CHECK(first_trigger(race)->grain_id == 1);

  grains[2].triggered = true;
  grains[2].trigger_time = 0.7;
  grains[0].triggered = true;
  grains[0].trigger_time = 0.7;
  CHECK(first_trigger(grains)->grain_id == 0);
}

TEST_CASE("competing exponential clocks: direct race oracle") {
  // Thresholds U_j ~ Exp(1) with constant rates kappa*w_j give trigger times
  // U_j/(kappa w_j); the earliest wins with probability w_j / sum w.
  const std::vector<double> w = {0.5, 0.3, 0.15, 0.05};
  const int n = 100000;
  std::mt19937_64 rng(123);
  const auto model = exponential(1.0);
  std::vector<int> wins(w.size(), 0);
  for (int i = 0; i < n; ++i) {
    int best = 0;
    double best_t = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < w.size(); ++j) {
      const double t = model.sample(rng) / (2.0 * w[j]);
      if (t < best_t) {
        best_t = t;
        best = static_cast<int>(j);
      }
    }
    ++wins[static_cast<std::size_t>(best)];
  }
  for (std::size_t j = 0; j < w.size(); ++j) {
    const double f = static_cast<double>(wins[j]) / n;
    const double sd = std::sqrt(w[j] * (1 - w[j]) / n);
    CHECK(std::abs(f - w[j]) < 4 * sd);
  }
}

TEST_CASE("competing clocks through accumulate and first_trigger") {
  const std::vector<double> w = {0.8, 0.2};
  const int n = 20000;
  const double dt = 0.05;
  int wins0 = 0;
  std::mt19937_64 rng(77);
  const auto model = exponential(1.0);
  for (int i = 0; i < n; ++i) {
    std::vector<Grain> grains = {make_grain(0, model.sample(rng), 1.0), make_grain(1, model.sample(rng), 1.0)};
    double t = 0;
    std::optional<Trigger> trig;
    while (!trig) {
      for (std::size_t j = 0; j < 2; ++j) grains[j] = accumulate(grains[j], w[j], dt, t);
      trig = first_trigger(grains);
      t += dt;
    }
    wins0 += trig->grain_id == 0 ? 1 : 0;
  }
  const double f = static_cast<double>(wins0) / n;
  CHECK(std::abs(f - 0.8) < 4 * std::sqrt(0.8 * 0.2 / n));
}
