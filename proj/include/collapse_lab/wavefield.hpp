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

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <variant>

#include "collapse_lab/error.hpp"

namespace collapse_lab {

using Eigen::Index;

/// Uniform 1D grid including both end points.
template <typename Real>
class Grid {
 public:
  Grid(Real x_min, Real x_max, Index n_points) : x_min_(x_min), x_max_(x_max), n_(n_points) {
    if (!(x_max > x_min) || !std::isfinite(x_min) || !std::isfinite(x_max)) {
      throw Error(ErrorCode::InvalidGrid, "x_max must exceed x_min");
    }
    if (n_points < 16) {
      throw Error(ErrorCode::InvalidGrid, "n_points must be at least 16");
    }
  }

  Real x_min() const { return x_min_; }
  Real x_max() const { return x_max_; }
  Index n_points() const { return n_; }
  Real span() const { return x_max_ - x_min_; }
  Real dx() const { return span() / Real(n_ - 1); }
  Real x(Index i) const { return x_min_ + Real(i) * dx(); }
  bool contains(Real y) const { return y >= x_min_ && y <= x_max_; }

  Eigen::Array<Real, Eigen::Dynamic, 1> coordinates() const {
    Eigen::Array<Real, Eigen::Dynamic, 1> xs(n_);
    for (Index i = 0; i < n_; ++i) xs[i] = x(i);
    return xs;
  }

  bool operator==(const Grid&) const = default;

 private:
  Real x_min_;
  Real x_max_;
  Index n_;
};

// ---------------------------------------------------------------------------
// Potentials

struct FreePotential {
  bool operator==(const FreePotential&) const = default;
};

template <typename Real>
struct HarmonicPotential {
  Real mass = 1;
  Real omega = 1;
  bool operator==(const HarmonicPotential&) const = default;
};

/// U = -depth inside |x| < half_width, zero outside.
template <typename Real>
struct SquareWellPotential {
  Real depth = 1;
  Real half_width = 1;
  bool operator==(const SquareWellPotential&) const = default;
};

/// Values sampled on the grid nodes; linearly interpolated in between.
template <typename Real>
struct TabulatedPotential {
  Eigen::Array<Real, Eigen::Dynamic, 1> values;
  bool operator==(const TabulatedPotential& other) const {
    return values.size() == other.values.size() && (values == other.values).all();
  }
};

template <typename Real>
using PotentialSpec = std::variant<FreePotential, HarmonicPotential<Real>, SquareWellPotential<Real>,
                                   TabulatedPotential<Real>>;

template <typename Real>
void validate_potential(const PotentialSpec<Real>& potential, const Grid<Real>& grid) {
  if (const auto* h = std::get_if<HarmonicPotential<Real>>(&potential)) {
    if (!(h->mass > 0) || !(h->omega > 0)) {
      throw Error(ErrorCode::InvalidArgument, "harmonic potential requires mass > 0 and omega > 0");
    }
  } else if (const auto* w = std::get_if<SquareWellPotential<Real>>(&potential)) {
    if (!(w->half_width > 0)) {
      throw Error(ErrorCode::InvalidArgument, "square well requires half_width > 0");
    }
  } else if (const auto* t = std::get_if<TabulatedPotential<Real>>(&potential)) {
    if (t->values.size() != grid.n_points()) {
      throw Error(ErrorCode::InvalidArgument, "tabulated potential length must equal n_points");
    }
  }
}

/// Potential at an arbitrary position inside the grid.
template <typename Real>
Real potential_at(const PotentialSpec<Real>& potential, const Grid<Real>& grid, Real x) {
  return std::visit(
      [&](const auto& p) -> Real {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, FreePotential>) {
          return Real(0);
        } else if constexpr (std::is_same_v<P, HarmonicPotential<Real>>) {
          return Real(0.5) * p.mass * p.omega * p.omega * x * x;
        } else if constexpr (std::is_same_v<P, SquareWellPotential<Real>>) {
          return std::abs(x) < p.half_width ? -p.depth : Real(0);
        } else {
          const Real t = std::clamp((x - grid.x_min()) / grid.dx(), Real(0), Real(grid.n_points() - 1));
          const Index i = std::min<Index>(static_cast<Index>(std::floor(t)), grid.n_points() - 2);
          const Real f = t - Real(i);
          return (1 - f) * p.values[i] + f * p.values[i + 1];
        }
      },
      potential);
}

template <typename Real>
Eigen::Array<Real, Eigen::Dynamic, 1> sample_potential(const PotentialSpec<Real>& potential,
                                                       const Grid<Real>& grid) {
  validate_potential(potential, grid);
  if (const auto* t = std::get_if<TabulatedPotential<Real>>(&potential)) return t->values;
  Eigen::Array<Real, Eigen::Dynamic, 1> u(grid.n_points());
  for (Index i = 0; i < grid.n_points(); ++i) u[i] = potential_at(potential, grid, grid.x(i));
  return u;
}

/// dU/dx on the grid nodes. Analytic where available, centered differences otherwise.
template <typename Real>
Eigen::Array<Real, Eigen::Dynamic, 1> potential_gradient(const PotentialSpec<Real>& potential,
                                                         const Grid<Real>& grid) {
  const Index n = grid.n_points();
  Eigen::Array<Real, Eigen::Dynamic, 1> g = Eigen::Array<Real, Eigen::Dynamic, 1>::Zero(n);
  if (std::holds_alternative<FreePotential>(potential)) return g;
  if (const auto* h = std::get_if<HarmonicPotential<Real>>(&potential)) {
    for (Index i = 0; i < n; ++i) g[i] = h->mass * h->omega * h->omega * grid.x(i);
    return g;
  }
  const auto u = sample_potential(potential, grid);
  const Real dx = grid.dx();
  for (Index i = 1; i + 1 < n; ++i) g[i] = (u[i + 1] - u[i - 1]) / (2 * dx);
  g[0] = (u[1] - u[0]) / dx;
  g[n - 1] = (u[n - 1] - u[n - 2]) / dx;
  return g;
}

// ---------------------------------------------------------------------------
// Wave field

template <typename Real>
struct WaveField {
  using Scalar = std::complex<Real>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Grid<Real> grid;
  Vector amplitudes;
  Real time = 0;
};

template <typename Real>
void check_shape(const WaveField<Real>& wf) {
  if (wf.amplitudes.size() != wf.grid.n_points()) {
    throw Error(ErrorCode::InvalidArgument, "amplitude count does not match grid");
  }
}

template <typename Real>
Eigen::Array<Real, Eigen::Dynamic, 1> density(const WaveField<Real>& wf) {
  return wf.amplitudes.array().abs2();
}

/// Sum of |psi|^2 dx over the grid.
template <typename Real>
Real norm_squared(const WaveField<Real>& wf) {
  return wf.amplitudes.squaredNorm() * wf.grid.dx();
}

template <typename Real>
WaveField<Real> normalize(WaveField<Real> wf) {
  check_shape(wf);
  const Real n2 = norm_squared(wf);
  if (!(n2 > 0) || !std::isfinite(n2)) throw Error(ErrorCode::ZeroField, "cannot normalize a zero field");
  wf.amplitudes *= Real(1) / std::sqrt(n2);
  return wf;
}

/// Largest edge modulus relative to the peak modulus.
template <typename Real>
Real edge_ratio(const WaveField<Real>& wf) {
  const auto mod = wf.amplitudes.array().abs();
  const Real peak = mod.maxCoeff();
  if (!(peak > 0)) return Real(0);
  return std::max(mod[0], mod[mod.size() - 1]) / peak;
}

inline constexpr double kEdgeTolerance = 1e-8;

template <typename Real>
void require_compact_support(const WaveField<Real>& wf) {
  if (edge_ratio(wf) >= Real(kEdgeTolerance)) {
    throw Error(ErrorCode::SupportClipped, "field does not vanish at the grid boundary");
  }
}

/// Normalized packet psi ~ exp(-(x-c)^2/(4 sigma^2) + i k x); sigma is the density's std deviation.
template <typename Real>
WaveField<Real> new_gaussian(const Grid<Real>& grid, Real center, Real sigma, Real momentum) {
  if (!(sigma >= 4 * grid.dx())) throw Error(ErrorCode::GridTooCoarse, "sigma must be at least 4*dx");
  if (!grid.contains(center)) throw Error(ErrorCode::SupportClipped, "center outside grid");
  WaveField<Real> wf{grid, typename WaveField<Real>::Vector(grid.n_points()), Real(0)};
  for (Index i = 0; i < grid.n_points(); ++i) {
    const Real x = grid.x(i);
    const Real d = x - center;
    wf.amplitudes[i] = std::polar(std::exp(-d * d / (4 * sigma * sigma)), momentum * x);
  }
  require_compact_support(wf);
  return normalize(std::move(wf));
}

template <typename Real>
struct StationaryState {
  WaveField<Real> field;
  Real energy;
};

/// Harmonic-oscillator eigenstate n in {0,1,2}, optionally displaced to `center`
/// (a displaced ground state is the coherent state with zero initial momentum).
template <typename Real>
StationaryState<Real> stationary_state(const Grid<Real>& grid, const PotentialSpec<Real>& potential,
                                       int n, Real hbar = 1, Real center = 0) {
  const auto* h = std::get_if<HarmonicPotential<Real>>(&potential);
  if (h == nullptr) throw Error(ErrorCode::Unsupported, "stationary states need a harmonic potential");
  if (n < 0 || n > 2) throw Error(ErrorCode::Unsupported, "only n = 0, 1, 2 are available");
  validate_potential(potential, grid);
  const Real alpha = std::sqrt(h->mass * h->omega / hbar);
  if (!(Real(1) / alpha >= 4 * grid.dx())) {
    throw Error(ErrorCode::GridTooCoarse, "oscillator length below 4*dx");
  }
  const Real norm0 = std::pow(alpha * alpha / std::numbers::pi_v<Real>, Real(0.25));
  const Real hermite_norm[] = {Real(1), Real(1) / std::sqrt(Real(2)), Real(1) / std::sqrt(Real(8))};
  WaveField<Real> wf{grid, typename WaveField<Real>::Vector(grid.n_points()), Real(0)};
  for (Index i = 0; i < grid.n_points(); ++i) {
    const Real xi = alpha * (grid.x(i) - center);
    const Real hn = n == 0 ? Real(1) : n == 1 ? 2 * xi : 4 * xi * xi - 2;
    wf.amplitudes[i] = norm0 * hermite_norm[n] * hn * std::exp(-xi * xi / 2);
  }
  require_compact_support(wf);
  return {normalize(std::move(wf)), hbar * h->omega * (Real(n) + Real(0.5))};
}

template <typename Real>
WaveField<Real> coherent_state(const Grid<Real>& grid, const PotentialSpec<Real>& potential, Real x0,
                               Real hbar = 1) {
  return stationary_state(grid, potential, 0, hbar, x0).field;
}

/// d(psi)/dx: fourth-order centered stencil in the interior, lower order near the edges.
template <typename Real>
typename WaveField<Real>::Vector derivative(const WaveField<Real>& wf) {
  const auto& a = wf.amplitudes;
  const Index n = a.size();
  const Real dx = wf.grid.dx();
  typename WaveField<Real>::Vector d(n);
  for (Index i = 2; i + 2 < n; ++i) {
    d[i] = (a[i - 2] - Real(8) * a[i - 1] + Real(8) * a[i + 1] - a[i + 2]) / (Real(12) * dx);
  }
  d[1] = (a[2] - a[0]) / (2 * dx);
  d[n - 2] = (a[n - 1] - a[n - 3]) / (2 * dx);
  d[0] = (a[1] - a[0]) / dx;
  d[n - 1] = (a[n - 1] - a[n - 2]) / dx;
  return d;
}

template <typename Real>
struct Observables {
  Real norm2;
  Real mean_x;
  Real mean_p;
  Real mean_U;
  Real mean_force;  ///< <dU/dx>
  Real sigma_x;
};

/// Expectation values. Each mean is divided by norm^2 so unnormalized fields
/// report the expectation of their normalized counterpart.
template <typename Real>
Observables<Real> observables(const WaveField<Real>& wf, const PotentialSpec<Real>& potential,
                              Real hbar = 1) {
  check_shape(wf);
  const auto& grid = wf.grid;
  const Real dx = grid.dx();
  const auto rho = density(wf);
  const auto xs = grid.coordinates();
  const Real n2 = rho.sum() * dx;
  if (!(n2 > 0)) throw Error(ErrorCode::ZeroField, "observables of a zero field");
  const Real mx = (xs * rho).sum() * dx / n2;
  const Real var = ((xs - mx).square() * rho).sum() * dx / n2;
  const auto d = derivative(wf);
  Real p = 0;
  for (Index i = 0; i < d.size(); ++i) p += (std::conj(wf.amplitudes[i]) * d[i]).imag();
  p *= hbar * dx / n2;
  const Real mu = (sample_potential(potential, grid) * rho).sum() * dx / n2;
  const Real mf = (potential_gradient(potential, grid) * rho).sum() * dx / n2;
  return {n2, mx, p, mu, mf, std::sqrt(var)};
}

/// |psi(y)|^2 with real and imaginary parts linearly interpolated.
template <typename Real>
Real density_at(const WaveField<Real>& wf, Real y) {
  const auto& grid = wf.grid;
  if (!grid.contains(y)) throw Error(ErrorCode::OutOfDomain, "position outside grid");
  const Real t = (y - grid.x_min()) / grid.dx();
  const Index i = std::clamp<Index>(static_cast<Index>(std::floor(t)), 0, grid.n_points() - 2);
  const Real f = std::clamp(t - Real(i), Real(0), Real(1));
  return std::norm((1 - f) * wf.amplitudes[i] + f * wf.amplitudes[i + 1]);
}

}  // namespace collapse_lab
