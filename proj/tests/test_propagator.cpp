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

#include "collapse_lab/propagator.hpp"

using namespace collapse_lab;
using Pot = PotentialSpec<double>;

namespace {

constexpr double kPi = std::numbers::pi;

PropagatorConfig<double> make_cfg(Method method, double dt, bool renorm) {
  PropagatorConfig<double> cfg;
  cfg.method = method;
  cfg.dt = dt;
  cfg.renorm_each_step = renorm;
  return cfg;
}

// Free packet width: sigma0 sqrt(1 + (hbar t / (2 m sigma0^2))^2).
double free_width(double sigma0, double t) { return sigma0 * std::sqrt(1 + std::pow(t / (2 * sigma0 * sigma0), 2)); }

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("build_kernel") {
  SUBCASE("free kernel is Toeplitz with the prefactor on the diagonal") {
    const Grid<double> grid(-20.0, 20.0, 256);
    const auto k = build_kernel(grid, Pot{FreePotential{}}, make_cfg(Method::KernelMatrix, 4.0, false));
    for (Index i = 1; i < 256; ++i) {
      for (Index j = 1; j < 256; ++j) CHECK_EQ(k.entries(i, j), k.entries(i - 1, j - 1));
    }
    CHECK_EQ(k.entries(17, 17), k.prefactor);
    const auto expected = std::sqrt(1.0 / (2 * kPi * 4.0)) * std::polar(1.0, -kPi / 4);
    CHECK(std::abs(k.prefactor - expected) < 1e-15);
  }
  SUBCASE("harmonic phase on the diagonal at x = 1") {
    const Grid<double> grid(0.68, 1.32, 17);
    REQUIRE(std::abs(grid.x(8) - 1.0) < 1e-12);
    const Pot ho = HarmonicPotential<double>{1.0, 1.0};
    const auto k = build_kernel(grid, ho, make_cfg(Method::KernelMatrix, 0.01, false));
    CHECK(std::arg(k.entries(8, 8) / k.prefactor) == doctest::Approx(-0.005).epsilon(1e-9));
    CHECK(std::abs(kernel_entry(0.0, 0.5, 0.01, 1.0, 1.0) / k.prefactor - std::polar(1.0, -0.005)) < 1e-14);
  }
  SUBCASE("resolution and aliasing limits") {
    const Grid<double> grid(-20.0, 20.0, 1024);
    CHECK(code_of([&] { build_kernel(grid, Pot{FreePotential{}}, make_cfg(Method::KernelMatrix, 1e-3, false)); }) ==
          ErrorCode::FresnelUnresolved);
    // Resolved (sqrt(dt) >= 2 dx) but the first aliasing image lies inside the grid.
    const Grid<double> narrow(-16.0, 16.0, 1024);
    REQUIRE(std::sqrt(5e-3) >= 2 * narrow.dx());
    CHECK(code_of([&] { build_kernel(narrow, Pot{FreePotential{}}, make_cfg(Method::KernelMatrix, 5e-3, false)); }) ==
          ErrorCode::KernelAliased);
    CHECK(min_kernel_dt(grid, 1.0, 1.0) == doctest::Approx(40.0 * grid.dx() / (2 * kPi)));
  }
}

TEST_CASE("step") {
  const Grid<double> grid(-20.0, 20.0, 1024);
  const Pot free = FreePotential{};
  const auto psi0 = new_gaussian(grid, 0.0, 1.0, 0.0);

  SUBCASE("zero steps is the identity") {
    const auto traj = evolve(psi0, free, make_cfg(Method::KernelMatrix, 0.25, false), 0);
    REQUIRE(traj.size() == 1);
    CHECK((traj[0].amplitudes - psi0.amplitudes).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("free spreading to t = 2") {
    const auto k = build_kernel(grid, free, make_cfg(Method::KernelMatrix, 0.25, false));
    auto wf = psi0;
    for (int s = 0; s < 8; ++s) wf = step(wf, k);
    CHECK(wf.time == doctest::Approx(2.0));
    CHECK(observables(wf, free).sigma_x == doctest::Approx(free_width(1.0, 2.0)).epsilon(0.01));
    CHECK(free_width(1.0, 2.0) == doctest::Approx(std::sqrt(2.0)));
  }
  SUBCASE("grid mismatch") {
    const Grid<double> other(-20.0, 20.0, 512);
    const auto k = build_kernel(other, free, make_cfg(Method::KernelMatrix, 1.0, false));
    CHECK(code_of([&] { step(psi0, k); }) == ErrorCode::GridMismatch);
  }
}

TEST_CASE("harmonic coherent state returns after one period") {
  const Grid<double> grid(-9.0, 9.0, 2048);
  const Pot ho = HarmonicPotential<double>{1.0, 1.0};
  const auto psi = coherent_state(grid, ho, 2.0);
  for (auto [method, steps] : {std::pair{Method::KernelMatrix, 240}, std::pair{Method::Spectral, 1200}}) {
    const auto traj = evolve(psi, ho, make_cfg(method, 2 * kPi / steps, true), steps);
    const auto obs = observables(traj.back(), ho);
    CHECK(obs.mean_x == doctest::Approx(2.0).epsilon(1e-2 / 2.0));
    CHECK(traj.back().time == doctest::Approx(2 * kPi));
  }
}

TEST_CASE("spectral_step") {
  const Grid<double> grid(-20.0, 20.0, 1024);
  const Pot free = FreePotential{};

  SUBCASE("group velocity") {
    const auto wf = new_gaussian(grid, -3.0, 1.0, 3.0);
    const auto out = spectral_step(wf, free, make_cfg(Method::Spectral, 0.01, false));
    CHECK(observables(out, free).mean_x - observables(wf, free).mean_x == doctest::Approx(0.03).epsilon(1e-6));
  }
  SUBCASE("two half steps agree with one full step to O(dt^2)") {
    const Pot ho = HarmonicPotential<double>{1.0, 1.0};
    const auto wf = new_gaussian(grid, 1.0, 1.0, 0.5);
    for (double dt : {0.1, 0.05}) {
      const auto full = spectral_step(wf, ho, make_cfg(Method::Spectral, dt, false));
      const auto half = spectral_step(spectral_step(wf, ho, make_cfg(Method::Spectral, dt / 2, false)), ho,
                                      make_cfg(Method::Spectral, dt / 2, false));
      CHECK(density_distance(half, full) < dt * dt);
    }
  }
  SUBCASE("free spreading to t = 2") {
    const auto traj = evolve(new_gaussian(grid, 0.0, 1.0, 0.0), free, make_cfg(Method::Spectral, 5e-3, false), 400);
    CHECK(observables(traj.back(), free).sigma_x == doctest::Approx(std::sqrt(2.0)).epsilon(0.01));
  }
  SUBCASE("non power of two") {
    const Grid<double> odd(-20.0, 20.0, 1000);
    CHECK(code_of([&] { spectral_step(new_gaussian(odd, 0.0, 1.0, 0.0), free, make_cfg(Method::Spectral, 0.01, false)); }) ==
          ErrorCode::NonPowerOfTwoGrid);
  }
}

TEST_CASE("evolve") {
  SUBCASE("snapshot stride and time stamps") {
    const Grid<double> grid(-20.0, 20.0, 1024);
    auto cfg = make_cfg(Method::Spectral, 0.01, true);
    cfg.snapshot_stride = 5;
    const auto traj = evolve(new_gaussian(grid, 0.0, 1.0, 0.0), Pot{FreePotential{}}, cfg, 23);
    REQUIRE(traj.size() == 6);  // 0, 5, 10, 15, 20, 23
    CHECK(traj[4].time == doctest::Approx(0.20));
    CHECK(traj.back().time == doctest::Approx(0.23));
  }
  SUBCASE("ground state is stationary for 1000 steps") {
    const Grid<double> grid(-9.0, 9.0, 2048);
    const Pot ho = HarmonicPotential<double>{1.0, 1.0};
    const auto ground = stationary_state(grid, ho, 0).field;
    for (auto [method, dt] : {std::pair{Method::KernelMatrix, 2 * kPi / 240}, std::pair{Method::Spectral, 5e-3}}) {
      auto cfg = make_cfg(method, dt, true);
      cfg.snapshot_stride = 1000;
      const auto end = evolve(ground, ho, cfg, 1000).back();
      CHECK((density(end) - density(ground)).abs().maxCoeff() < 1e-3);
    }
  }
  SUBCASE("kernel and spectral agree on the free packet at t = 1") {
    const Grid<double> grid(-20.0, 20.0, 1024);
    const Pot free = FreePotential{};
    const auto psi = new_gaussian(grid, 0.0, 1.0, 1.0);
    const auto a = evolve(psi, free, make_cfg(Method::KernelMatrix, 0.25, true), 4).back();
    const auto b = evolve(psi, free, make_cfg(Method::Spectral, 5e-3, true), 200).back();
    CHECK(density_distance(a, b) < 1e-3);
  }
}

TEST_CASE("ehrenfest_residual") {
  SUBCASE("free packet conserves momentum") {
    const Grid<double> grid(-20.0, 20.0, 1024);
    const Pot free = FreePotential{};
    const auto traj = evolve(new_gaussian(grid, -2.0, 1.0, 1.0), free, make_cfg(Method::Spectral, 0.01, true), 50);
    CHECK(ehrenfest_residual(traj, free) < 1e-9);
  }
  SUBCASE("harmonic coherent state") {
    const Grid<double> grid(-9.0, 9.0, 2048);
    const Pot ho = HarmonicPotential<double>{1.0, 1.0};
    const auto traj = evolve(coherent_state(grid, ho, 2.0), ho, make_cfg(Method::KernelMatrix, 2 * kPi / 240, true), 240);
    CHECK(ehrenfest_residual(traj, ho) < 1e-2);
    const auto terms = ehrenfest_terms(traj, ho);
    // d<p>/dt = -m omega^2 <x> with <x> = 2 cos t.
    for (std::size_t i = 0; i < terms.times.size(); i += 40) {
      CHECK(terms.dp_dt[i] == doctest::Approx(-2.0 * std::cos(terms.times[i])).epsilon(1e-2));
    }
  }
  SUBCASE("stationary state: both terms vanish") {
    const Grid<double> grid(-9.0, 9.0, 2048);
    const Pot ho = HarmonicPotential<double>{1.0, 1.0};
    auto cfg = make_cfg(Method::Spectral, 0.01, true);
    cfg.snapshot_stride = 10;
    const auto terms = ehrenfest_terms(evolve(stationary_state(grid, ho, 1).field, ho, cfg, 200), ho);
    for (std::size_t i = 0; i < terms.dp_dt.size(); ++i) {
      CHECK(std::abs(terms.dp_dt[i]) < 1e-3);
      CHECK(std::abs(terms.mean_force[i]) < 1e-3);
    }
  }
  SUBCASE("too few snapshots") {
    const Grid<double> grid(-20.0, 20.0, 1024);
    const auto traj = evolve(new_gaussian(grid, 0.0, 1.0, 0.0), Pot{FreePotential{}}, make_cfg(Method::Spectral, 0.01, true), 1);
    CHECK(code_of([&] { ehrenfest_residual(traj, Pot{FreePotential{}}); }) == ErrorCode::TooFewSnapshots);
  }
}

TEST_CASE("propagation properties") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const Grid<double> grid(-20.0, 20.0, 1024);
  const Pot ho = HarmonicPotential<double>{1.0, 0.2};

  SUBCASE("linearity without renormalization") {
    for (Method method : {Method::KernelMatrix, Method::Spectral}) {
      Propagator<double> prop(grid, ho, make_cfg(method, 0.25, false));
      for (int trial = 0; trial < 5; ++trial) {
        const auto p1 = new_gaussian(grid, 3 * u(rng), 1.0 + 0.5 * std::abs(u(rng)), 2 * u(rng));
        const auto p2 = new_gaussian(grid, 3 * u(rng), 1.0 + 0.5 * std::abs(u(rng)), 2 * u(rng));
        const std::complex<double> a(u(rng), u(rng)), b(u(rng), u(rng));
        WaveField<double> mix{grid, a * p1.amplitudes + b * p2.amplitudes, 0.0};
        const auto lhs = prop.advance(mix).amplitudes;
        const auto rhs = a * prop.advance(p1).amplitudes + b * prop.advance(p2).amplitudes;
        CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-10);
      }
    }
  }
  SUBCASE("norm drift per step") {
    const Pot free = FreePotential{};
    const auto psi = new_gaussian(grid, 1.0, 1.0, 1.5);
    CHECK(std::abs(norm_squared(spectral_step(psi, ho, make_cfg(Method::Spectral, 5e-3, false))) - 1) < 1e-12);
    const auto k = build_kernel(grid, free, make_cfg(Method::KernelMatrix, 0.25, false));
    CHECK(std::abs(norm_squared(step(psi, k)) - 1) < 1e-4);
    const Grid<double> fine(-7.0, 7.0, 2048);
    const Pot unit = HarmonicPotential<double>{1.0, 1.0};
    const auto kh = build_kernel(fine, unit, make_cfg(Method::KernelMatrix, 0.016, false));
    auto wf = stationary_state(fine, unit, 0).field;
    for (int s = 0; s < 3; ++s) {
      const auto next = step(wf, kh);
      CHECK(std::abs(norm_squared(next) / norm_squared(wf) - 1) < 1e-4);
      wf = next;
    }
  }
  SUBCASE("free kernel is translation covariant") {
    const Pot free = FreePotential{};
    const auto k = build_kernel(grid, free, make_cfg(Method::KernelMatrix, 0.25, false));
    const auto psi = new_gaussian(grid, -1.0, 1.0, 0.5);
    const Index shift = 37;
    WaveField<double> moved{grid, WaveField<double>::Vector::Zero(grid.n_points()), 0.0};
    moved.amplitudes.tail(grid.n_points() - shift) = psi.amplitudes.head(grid.n_points() - shift);
    const auto out = step(psi, k).amplitudes;
    const auto out_moved = step(moved, k).amplitudes;
    const auto diff = (out_moved.tail(grid.n_points() - shift) - out.head(grid.n_points() - shift)).cwiseAbs().maxCoeff();
    CHECK(diff < 1e-10 * out.cwiseAbs().maxCoeff());
  }
}
