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

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <vector>

#include "collapse_lab/error.hpp"
#include "collapse_lab/wavefield.hpp"

namespace collapse_lab {

enum class Method { KernelMatrix, Spectral };

template <typename Real>
struct PropagatorConfig {
  Real dt = Real(5e-3);
  Real hbar = 1;
  Real mass = 1;
  Method method = Method::Spectral;
  bool renorm_each_step = true;
  Index snapshot_stride = 1;
};

/// Fresnel length sqrt(hbar dt / m) of one time slice.
template <typename Real>
Real fresnel_length(Real dt, Real hbar, Real mass) {
  return std::sqrt(hbar * dt / mass);
}

/// Distance by which the sampled kernel's first aliasing image is displaced,
/// 2 pi hbar dt / (m dx). The image must land outside the grid.
template <typename Real>
Real alias_displacement(const Grid<Real>& grid, Real dt, Real hbar, Real mass) {
  return 2 * std::numbers::pi_v<Real> * hbar * dt / (mass * grid.dx());
}

/// Smallest time step for which the sampled kernel is both resolved and alias free.
template <typename Real>
Real min_kernel_dt(const Grid<Real>& grid, Real hbar, Real mass) {
  const Real dx = grid.dx();
  const Real fresnel = 4 * dx * dx * mass / hbar;
  const Real alias = grid.span() * dx * mass / (2 * std::numbers::pi_v<Real> * hbar);
  return std::max(fresnel, alias);
}

template <typename Real>
void validate_config(const PropagatorConfig<Real>& cfg, const Grid<Real>& grid) {
  if (!(cfg.dt > 0) || !(cfg.hbar > 0) || !(cfg.mass > 0)) {
    throw Error(ErrorCode::InvalidArgument, "dt, hbar and mass must be positive");
  }
  if (cfg.snapshot_stride < 1) throw Error(ErrorCode::InvalidArgument, "snapshot_stride must be >= 1");
  if (cfg.method == Method::KernelMatrix) {
    if (fresnel_length(cfg.dt, cfg.hbar, cfg.mass) < 2 * grid.dx()) {
      throw Error(ErrorCode::FresnelUnresolved, "sqrt(hbar dt/m) < 2 dx");
    }
    if (alias_displacement(grid, cfg.dt, cfg.hbar, cfg.mass) < grid.span()) {
      throw Error(ErrorCode::KernelAliased,
                  "2 pi hbar dt/(m dx) is shorter than the grid span; need dt >= " +
                      std::to_string(min_kernel_dt(grid, cfg.hbar, cfg.mass)));
    }
  } else if ((grid.n_points() & (grid.n_points() - 1)) != 0) {
    throw Error(ErrorCode::NonPowerOfTwoGrid, "spectral method needs a power-of-two grid");
  }
}

/// One short-time slice of the path integral: K = A exp((i/hbar)[m d^2/(2 dt) - U_mid dt]).
template <typename Real>
std::complex<Real> kernel_entry(Real displacement, Real u_mid, Real dt, Real hbar, Real mass) {
  const std::complex<Real> prefactor =
      std::sqrt(std::complex<Real>(mass / (2 * std::numbers::pi_v<Real> * hbar * dt)) /
                std::complex<Real>(0, 1));
  const Real phase = (mass * displacement * displacement / (2 * dt) - u_mid * dt) / hbar;
  return prefactor * std::polar(Real(1), phase);
}

template <typename Real>
struct KernelMatrix {
  using Matrix = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;

  Grid<Real> grid;
  Matrix entries;
  Real dt;
  std::complex<Real> prefactor;
  bool renormalize = false;
};

template <typename Real>
KernelMatrix<Real> build_kernel(const Grid<Real>& grid, const PotentialSpec<Real>& potential,
                                const PropagatorConfig<Real>& cfg) {
  PropagatorConfig<Real> kcfg = cfg;
  kcfg.method = Method::KernelMatrix;
  validate_config(kcfg, grid);
  validate_potential(potential, grid);
  const Index n = grid.n_points();
  const Real dx = grid.dx();
  KernelMatrix<Real> k{grid, typename KernelMatrix<Real>::Matrix(n, n), cfg.dt,
                       kernel_entry(Real(0), Real(0), cfg.dt, cfg.hbar, cfg.mass), cfg.renorm_each_step};
  // Midpoint samples of U at (x_i + x_j)/2, i.e. on the half-grid.
  Eigen::Array<Real, Eigen::Dynamic, 1> u_half(2 * n - 1);
  for (Index s = 0; s < 2 * n - 1; ++s) {
    u_half[s] = potential_at(potential, grid, grid.x_min() + Real(s) * dx / 2);
  }
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) {
      k.entries(i, j) = kernel_entry(Real(i - j) * dx, u_half[i + j], cfg.dt, cfg.hbar, cfg.mass);
    }
  }
  return k;
}

/// psi'(x_i) = sum_j K(i,j) psi(x_j) dx
template <typename Real>
WaveField<Real> step(const WaveField<Real>& wf, const KernelMatrix<Real>& kernel) {
  check_shape(wf);
  if (!(wf.grid == kernel.grid)) throw Error(ErrorCode::GridMismatch, "kernel built on a different grid");
  WaveField<Real> out{wf.grid, kernel.entries * wf.amplitudes * wf.grid.dx(), wf.time + kernel.dt};
  return kernel.renormalize ? normalize(std::move(out)) : out;
}

/// Strang split-operator stepper; caches the phase factors and FFT plan.
template <typename Real>
class SpectralStepper {
 public:
  SpectralStepper(const Grid<Real>& grid, const PotentialSpec<Real>& potential,
                  const PropagatorConfig<Real>& cfg)
      : grid_(grid), dt_(cfg.dt), renormalize_(cfg.renorm_each_step) {
    PropagatorConfig<Real> scfg = cfg;
    scfg.method = Method::Spectral;
    validate_config(scfg, grid);
    const Index n = grid.n_points();
    const auto u = sample_potential(potential, grid);
    half_potential_.resize(n);
    kinetic_.resize(n);
    const Real two_pi = 2 * std::numbers::pi_v<Real>;
    for (Index i = 0; i < n; ++i) {
      half_potential_[i] = std::polar(Real(1), -u[i] * cfg.dt / (2 * cfg.hbar));
      const Index freq = i < n / 2 ? i : i - n;
      const Real k = two_pi * Real(freq) / (Real(n) * grid.dx());
      kinetic_[i] = std::polar(Real(1), -cfg.hbar * k * k * cfg.dt / (2 * cfg.mass));
    }
  }

  WaveField<Real> operator()(const WaveField<Real>& wf) {
    check_shape(wf);
    if (!(wf.grid == grid_)) throw Error(ErrorCode::GridMismatch, "stepper built on a different grid");
    Vector a = (wf.amplitudes.array() * half_potential_).matrix();
    Vector spectrum(a.size());
    fft_.fwd(spectrum, a);
    spectrum.array() *= kinetic_;
    fft_.inv(a, spectrum);
    a.array() *= half_potential_;
    WaveField<Real> out{wf.grid, std::move(a), wf.time + dt_};
    return renormalize_ ? normalize(std::move(out)) : out;
  }

 private:
  using Vector = typename WaveField<Real>::Vector;
  Grid<Real> grid_;
  Real dt_;
  bool renormalize_;
  Eigen::Array<std::complex<Real>, Eigen::Dynamic, 1> half_potential_;
  Eigen::Array<std::complex<Real>, Eigen::Dynamic, 1> kinetic_;
  Eigen::FFT<Real> fft_;
};

template <typename Real>
WaveField<Real> spectral_step(const WaveField<Real>& wf, const PotentialSpec<Real>& potential,
                              const PropagatorConfig<Real>& cfg) {
  SpectralStepper<Real> stepper(wf.grid, potential, cfg);
  return stepper(wf);
}

/// Either method behind one interface, built once per potential.
template <typename Real>
class Propagator {
 public:
  Propagator(const Grid<Real>& grid, const PotentialSpec<Real>& potential, const PropagatorConfig<Real>& cfg) {
    if (cfg.method == Method::KernelMatrix) {
      kernel_ = build_kernel(grid, potential, cfg);
    } else {
      spectral_.emplace(grid, potential, cfg);
    }
  }

  explicit Propagator(KernelMatrix<Real> kernel) : kernel_(std::move(kernel)) {}

  WaveField<Real> advance(const WaveField<Real>& wf) {
    return kernel_ ? step(wf, *kernel_) : (*spectral_)(wf);
  }

 private:
  std::optional<KernelMatrix<Real>> kernel_;
  std::optional<SpectralStepper<Real>> spectral_;
};

template <typename Real>
using Trajectory = std::vector<WaveField<Real>>;

/// Snapshots at every `snapshot_stride` steps, starting with the initial field.
/// The final field is appended when n_steps is not a multiple of the stride.
template <typename Real>
Trajectory<Real> evolve(WaveField<Real> wf, Propagator<Real>& propagator, Index n_steps, Index stride) {
  if (n_steps < 0) throw Error(ErrorCode::InvalidArgument, "n_steps must be non-negative");
  if (stride < 1) throw Error(ErrorCode::InvalidArgument, "snapshot stride must be >= 1");
  Trajectory<Real> out;
  out.reserve(static_cast<std::size_t>(n_steps / stride + 2));
  out.push_back(wf);
  for (Index s = 1; s <= n_steps; ++s) {
    wf = propagator.advance(wf);
    if (s % stride == 0) out.push_back(wf);
  }
  if (n_steps % stride != 0) out.push_back(std::move(wf));
  return out;
}

template <typename Real>
Trajectory<Real> evolve(const WaveField<Real>& wf, const PotentialSpec<Real>& potential,
                        const PropagatorConfig<Real>& cfg, Index n_steps) {
  Propagator<Real> propagator(wf.grid, potential, cfg);
  return evolve(wf, propagator, n_steps, cfg.snapshot_stride);
}

template <typename Real>
struct EhrenfestTerms {
  std::vector<Real> times;
  std::vector<Real> dp_dt;       ///< centered difference of <p>
  std::vector<Real> mean_force;  ///< <dU/dx>
};

/// d<p>/dt and <dU/dx> at every interior snapshot.
template <typename Real>
EhrenfestTerms<Real> ehrenfest_terms(const Trajectory<Real>& trajectory, const PotentialSpec<Real>& potential,
                                     Real hbar = 1) {
  if (trajectory.size() < 3) throw Error(ErrorCode::TooFewSnapshots, "need at least 3 snapshots");
  const Real stride = trajectory[1].time - trajectory[0].time;
  std::vector<Observables<Real>> obs;
  obs.reserve(trajectory.size());
  for (std::size_t i = 0; i < trajectory.size(); ++i) {
    if (i > 0 && std::abs((trajectory[i].time - trajectory[i - 1].time) - stride) > Real(1e-9) * (1 + stride)) {
      throw Error(ErrorCode::NonUniformStride, "snapshots are not uniformly spaced");
    }
    obs.push_back(observables(trajectory[i], potential, hbar));
  }
  EhrenfestTerms<Real> terms;
  for (std::size_t i = 1; i + 1 < obs.size(); ++i) {
    terms.times.push_back(trajectory[i].time);
    terms.dp_dt.push_back((obs[i + 1].mean_p - obs[i - 1].mean_p) / (2 * stride));
    terms.mean_force.push_back(obs[i].mean_force);
  }
  return terms;
}

/// max over interior snapshots of |d<p>/dt + <dU/dx>|
template <typename Real>
Real ehrenfest_residual(const Trajectory<Real>& trajectory, const PotentialSpec<Real>& potential,
                        Real hbar = 1) {
  const auto terms = ehrenfest_terms(trajectory, potential, hbar);
  Real worst = 0;
  for (std::size_t i = 0; i < terms.dp_dt.size(); ++i) {
    worst = std::max(worst, std::abs(terms.dp_dt[i] + terms.mean_force[i]));
  }
  return worst;
}

/// ||rho_a - rho_b||_2 / ||rho_b||_2
template <typename Real>
Real density_distance(const WaveField<Real>& a, const WaveField<Real>& b) {
  if (!(a.grid == b.grid)) throw Error(ErrorCode::GridMismatch, "fields live on different grids");
  const auto ra = density(a);
  const auto rb = density(b);
  return std::sqrt((ra - rb).square().sum() / rb.square().sum());
}

}  // namespace collapse_lab
