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

#include "collapse_lab/validate.hpp"

#include <cmath>
#include <numbers>

#include "collapse_lab/collapse.hpp"
#include "collapse_lab/propagator.hpp"

namespace collapse_lab {

namespace {

using Pot = PotentialSpec<double>;
constexpr double kPi = std::numbers::pi;

ValidationCheck check(std::string name, double expected, double got, double tolerance) {
  const bool pass = std::isfinite(got) && std::abs(got - expected) <= tolerance;
  return {std::move(name), expected, got, tolerance, pass};
}

Propagator<double> make_propagator(const Grid<double>& grid, const Pot& pot, const PropagatorConfig<double>& cfg,
                                   const ValidationOptions& options) {
  if (cfg.method != Method::KernelMatrix || !options.corrupt_kernel) return {grid, pot, cfg};
  auto kernel = build_kernel(grid, pot, cfg);
  kernel.entries *= 1.01;
  return Propagator<double>(std::move(kernel));
}

PropagatorConfig<double> kernel_cfg(double dt, bool renorm) {
  PropagatorConfig<double> cfg;
  cfg.method = Method::KernelMatrix;
  cfg.dt = dt;
  cfg.renorm_each_step = renorm;
  return cfg;
}

PropagatorConfig<double> spectral_cfg(double dt, bool renorm) {
  PropagatorConfig<double> cfg;
  cfg.method = Method::Spectral;
  cfg.dt = dt;
  cfg.renorm_each_step = renorm;
  return cfg;
}

double max_density_change(const WaveField<double>& a, const WaveField<double>& b) {
  return (density(a) - density(b)).abs().maxCoeff();
}

}  // namespace

std::vector<ValidationCheck> run_validation(const ValidationOptions& options) {
  std::vector<ValidationCheck> out;

  // Free spreading: sigma(t) = sigma0 sqrt(1 + (t / (2 sigma0^2))^2) = sqrt(2) at t = 2.
  {
    const Grid<double> grid(-20.0, 20.0, 1024);
    const Pot free = FreePotential{};
    const auto psi0 = new_gaussian(grid, 0.0, 1.0, 0.0);
    const double expected = std::sqrt(2.0);

    auto kcfg = kernel_cfg(0.25, false);
    auto kprop = make_propagator(grid, free, kcfg, options);
    const auto one = kprop.advance(psi0);
    out.push_back(check("kernel_norm_drift_one_step", 0.0, norm_squared(one) - 1.0, 1e-4));
    const auto kend = evolve(psi0, kprop, 8, 8).back();
    out.push_back(check("free_spreading_kernel", expected, observables(kend, free).sigma_x, 0.01 * expected));

    auto sprop = make_propagator(grid, free, spectral_cfg(5e-3, false), options);
    const auto send = evolve(psi0, sprop, 400, 400).back();
    out.push_back(check("free_spreading_spectral", expected, observables(send, free).sigma_x, 0.01 * expected));
    out.push_back(check("spectral_norm_drift", 0.0, norm_squared(send) - 1.0, 1e-10));
    out.push_back(check("cross_method_density_l2", 0.0, density_distance(kend, send), 1e-3));
  }

  // Harmonic oscillator: coherent-state period, ground-state stationarity, Ehrenfest.
  {
    const Grid<double> grid(-9.0, 9.0, 2048);
    const Pot ho = HarmonicPotential<double>{1.0, 1.0};
    const double period = 2 * kPi;
    struct Run {
      const char* name;
      PropagatorConfig<double> cfg;
      long steps_per_period;
    };
    const Run runs[] = {{"kernel", kernel_cfg(period / 240, true), 240},
                        {"spectral", spectral_cfg(period / 1200, true), 1200}};
    for (const auto& run : runs) {
      auto prop = make_propagator(grid, ho, run.cfg, options);
      const auto coherent = coherent_state(grid, ho, 2.0);
      const auto traj = evolve(coherent, prop, run.steps_per_period, 1);
      out.push_back(check(std::string("coherent_period_") + run.name, 2.0,
                          observables(traj.back(), ho).mean_x, 1e-2));
      out.push_back(check(std::string("ehrenfest_") + run.name, 0.0, ehrenfest_residual(traj, ho), 1e-2));

      const auto ground = stationary_state(grid, ho, 0).field;
      const auto end = evolve(ground, prop, 1000, 1000).back();
      out.push_back(check(std::string("stationarity_") + run.name, 0.0, max_density_change(ground, end), 1e-3));
    }
    // Unrenormalized kernel drift on a harmonic problem with a small enough slice.
    const Grid<double> fine(-7.0, 7.0, 2048);
    auto prop = make_propagator(fine, ho, kernel_cfg(0.016, false), options);
    const auto ground = stationary_state(fine, ho, 0).field;
    out.push_back(check("kernel_norm_drift_harmonic", 0.0, norm_squared(prop.advance(ground)) - 1.0, 1e-4));
  }

  // Collapse mass law m1 e^E / (m1 e^E + 1 - m1).
  {
    const Grid<double> grid(-10.0, 10.0, 1024);
    double worst = 0;
    for (double m1 : {0.01, 0.1, 0.3, 0.5, 0.9}) {
      for (double e : {0.0, 1.0, 2.0, 10.0, 50.0}) {
        // Flat field with omega I holding a fraction m1 of the mass.
        const auto part = make_partition(grid, 0.0, 1.0);
        WaveField<double> wf{grid, WaveField<double>::Vector::Zero(grid.n_points()), 0.0};
        const double n1 = static_cast<double>(part.size_omega1());
        const double n2 = static_cast<double>(grid.n_points()) - n1;
        for (Index i = 0; i < grid.n_points(); ++i) {
          wf.amplitudes[i] = std::sqrt(part.in_omega1(i) ? m1 / n1 : (1 - m1) / n2);
        }
        wf = normalize(wf);
        const double got = omega1_mass(apply_collapse(wf, part, e), part);
        worst = std::max(worst, std::abs(got - collapsed_mass(m1, e)));
      }
    }
    out.push_back(check("collapse_mass_law_max_error", 0.0, worst, 1e-9));
    const auto amp = amplification_exponent(1.0, 1.0, 25.0);
    out.push_back(check("amplification_exponent", 50.0, amp.exponent, 1e-12));
  }
  return out;
}

nlohmann::json validation_report(const std::vector<ValidationCheck>& checks) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : checks) {
    arr.push_back({{"test", c.test}, {"expected", c.expected}, {"got", c.got}, {"tolerance", c.tolerance},
                   {"pass", c.pass}});
  }
  return arr;
}

}  // namespace collapse_lab
