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

#include <cmath>
#include <vector>

#include "collapse_lab/detector.hpp"
#include "collapse_lab/wavefield.hpp"

namespace collapse_lab {

/// Split of the grid into the triggered grain's region (omega I, a contiguous
/// index range [begin, end)) and its complement (omega II).
template <typename Real>
struct Partition {
  Grid<Real> grid;
  Index begin;
  Index end;

  bool in_omega1(Index i) const { return i >= begin && i < end; }
  Index size_omega1() const { return end - begin; }

  std::vector<bool> omega1_mask() const {
    std::vector<bool> m(static_cast<std::size_t>(grid.n_points()), false);
    for (Index i = begin; i < end; ++i) m[static_cast<std::size_t>(i)] = true;
    return m;
  }
  std::vector<bool> omega2_mask() const {
    auto m = omega1_mask();
    m.flip();
    return m;
  }
};

/// Nodes with |x - Y| <= width/2 (edges matched to within 1e-9 dx).
template <typename Real>
Partition<Real> make_partition(const Grid<Real>& grid, Real position, Real width) {
  const Real lo = position - width / 2;
  const Real hi = position + width / 2;
  if (!grid.contains(position)) throw Error(ErrorCode::OutOfDomain, "grain outside grid");
  const Real dx = grid.dx();
  const Real slack = Real(1e-9) * dx;
  const Index first = std::max<Index>(0, static_cast<Index>(std::ceil((lo - grid.x_min() - slack) / dx)));
  const Index last = std::min<Index>(grid.n_points() - 1,
                                     static_cast<Index>(std::floor((hi - grid.x_min() + slack) / dx)));
  if (last - first + 1 < 2) throw Error(ErrorCode::DegeneratePartition, "omega I holds fewer than 2 nodes");
  return {grid, first, last + 1};
}

template <typename Real>
Partition<Real> make_partition(const Grid<Real>& grid, const Grain& grain) {
  return make_partition(grid, Real(grain.position), Real(grain.width));
}

/// Probability mass of omega I (sum of |psi|^2 dx over the region).
template <typename Real>
Real omega1_mass(const WaveField<Real>& wf, const Partition<Real>& partition) {
  return wf.amplitudes.segment(partition.begin, partition.size_omega1()).squaredNorm() * wf.grid.dx();
}

template <typename Real>
struct Amplification {
  Real epsilon;   ///< duration over which the macroscopic action dominates, factor * hbar / U_A
  Real exponent;  ///< 2 U_A epsilon / hbar
};

template <typename Real>
Amplification<Real> amplification_exponent(Real threshold, Real hbar, Real epsilon_factor = 1) {
  if (!(threshold > 0) || !(hbar > 0) || !(epsilon_factor > 0)) {
    throw Error(ErrorCode::NonPositiveInput, "U_A, hbar and epsilon_factor must be positive");
  }
  const Real epsilon = epsilon_factor * hbar / threshold;
  return {epsilon, 2 * threshold * epsilon / hbar};
}

/// Amplitudes in omega I scale by exp(exponent/2), then the whole field is
/// renormalized. Masses map as m1 -> m1 e^E / (m1 e^E + m2).
template <typename Real>
WaveField<Real> apply_collapse(WaveField<Real> wf, const Partition<Real>& partition, Real exponent) {
  check_shape(wf);
  if (!(exponent >= 0)) throw Error(ErrorCode::InvalidArgument, "exponent must be non-negative");
  if (!(wf.grid == partition.grid)) throw Error(ErrorCode::GridMismatch, "partition on a different grid");
  const Real half = exponent / 2;
  // Past ~e^300 the boost would overflow; damping omega II instead is equivalent after normalization.
  if (half <= Real(300)) {
    wf.amplitudes.segment(partition.begin, partition.size_omega1()) *= std::exp(half);
  } else {
    const Real damp = std::exp(-half);
    wf.amplitudes.head(partition.begin) *= damp;
    wf.amplitudes.tail(wf.amplitudes.size() - partition.end) *= damp;
  }
  return normalize(std::move(wf));
}

/// Closed form of the post-collapse omega I mass.
template <typename Real>
Real collapsed_mass(Real pre_mass, Real exponent) {
  if (!(pre_mass > 0)) return Real(0);
  // Written with e^{-E} so large exponents saturate at 1 instead of overflowing.
  return 1 / (1 + (1 - pre_mass) / pre_mass * std::exp(-exponent));
}

/// The localized state: a normalized Gaussian of density std width/4 at Y.
/// Narrow grains leave the Gaussian under-resolved, so its centre is shifted
/// by a sub-grid amount until the sampled field's <x> sits exactly on Y.
template <typename Real>
WaveField<Real> post_collapse_state(const Grid<Real>& grid, Real position, Real width) {
  if (!grid.contains(position)) throw Error(ErrorCode::OutOfDomain, "grain outside grid");
  if (!(width > 0)) throw Error(ErrorCode::InvalidArgument, "grain width must be positive");
  const Real s = width / 4;
  WaveField<Real> wf{grid, typename WaveField<Real>::Vector(grid.n_points()), Real(0)};
  const auto sample = [&](Real centre) {
    for (Index i = 0; i < grid.n_points(); ++i) {
      const Real d = grid.x(i) - centre;
      wf.amplitudes[i] = std::exp(-d * d / (4 * s * s));
    }
  };
  const auto offset = [&](Real centre) {
    sample(centre);
    Real mass = 0, first = 0;
    for (Index i = 0; i < grid.n_points(); ++i) {
      const Real rho = std::norm(wf.amplitudes[i]);
      mass += rho;
      first += rho * (grid.x(i) - position);
    }
    return first / mass;
  };
  // Secant iteration; the offset is close to the identity in the centre.
  Real c0 = position, f0 = offset(c0);
  Real c1 = position - f0, f1 = offset(c1);
  for (int it = 0; it < 50 && std::abs(f1) > Real(1e-13) * grid.dx() && f1 != f0; ++it) {
    const Real c2 = c1 - f1 * (c1 - c0) / (f1 - f0);
    c0 = c1;
    f0 = f1;
    c1 = c2;
    f1 = offset(c1);
  }
  if (std::abs(f0) < std::abs(f1)) sample(c0);
  else sample(c1);
  return normalize(std::move(wf));
}

template <typename Real>
WaveField<Real> post_collapse_state(const Grid<Real>& grid, const Grain& grain) {
  return post_collapse_state(grid, Real(grain.position), Real(grain.width));
}

struct CollapseEvent {
  long trial_id = 0;
  int grain_id = 0;
  double trigger_time = 0;
  double epsilon = 0;
  double exponent = 0;
  std::vector<double> pre_weights;
  double pre_mass_omega1 = 0;
};

}  // namespace collapse_lab
