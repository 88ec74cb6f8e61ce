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

#include "collapse_lab/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

namespace collapse_lab {

namespace {

[[noreturn]] void config_error(const std::string& field, const std::string& why) {
  throw Error(ErrorCode::Config, "field '" + field + "': " + why);
}

template <typename F>
void check_field(const std::string& field, F&& f) {
  try {
    f();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Config) throw;
    config_error(field, e.what());
  }
}

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

unsigned resolve_threads(unsigned threads) {
  if (threads > 0) return threads;
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs body(begin, end) over [0, n) split into contiguous chunks.
template <typename Body>
void parallel_chunks(std::size_t n, unsigned threads, Body&& body) {
  const std::size_t workers = std::min<std::size_t>(threads, std::max<std::size_t>(n, 1));
  if (workers <= 1) {
    body(std::size_t{0}, n);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t b = w * chunk;
    const std::size_t e = std::min(n, b + chunk);
    if (b >= e) break;
    pool.emplace_back([&body, b, e] { body(b, e); });
  }
}

}  // namespace

void ExperimentConfig::validate(bool require_grains) const {
  check_field("potential", [&] { validate_potential(potential, grid); });
  check_field("propagator", [&] { validate_config(propagator, grid); });
  if (n_steps < 0) config_error("n_steps", "must be non-negative");
  if (n_trials < 1) config_error("n_trials", "must be at least 1");
  if (!(max_time > 0)) config_error("max_time", "must be positive");
  if (!(epsilon_factor > 0)) config_error("epsilon_factor", "must be positive");
  if (!(significance > 0 && significance < 1)) config_error("significance", "must lie in (0, 1)");
  check_field("straggling", [&] { straggling.validate(); });
  if (require_grains && grains.positions.empty()) config_error("grains.positions", "at least one grain is required");
  if (!grains.positions.empty()) {
    if (!(grains.width > 0)) config_error("grains.width", "must be positive");
    if (!(grains.coupling >= 0)) config_error("grains.coupling", "must be non-negative");
    check_field("grains", [&] {
      place_grains(grid, grains.positions, grains.width, straggling, grains.coupling, 0);
    });
  }
  check_field("initial_state", [&] { initial_field(*this); });
}

Field initial_field(const ExperimentConfig& cfg) {
  const double hbar = cfg.propagator.hbar;
  switch (cfg.initial.kind) {
    case InitialKind::Gaussian:
      return new_gaussian(cfg.grid, cfg.initial.center, cfg.initial.sigma, cfg.initial.momentum);
    case InitialKind::Stationary:
      return stationary_state(cfg.grid, cfg.potential, cfg.initial.n, hbar).field;
    case InitialKind::Coherent:
      return coherent_state(cfg.grid, cfg.potential, cfg.initial.x0, hbar);
  }
  throw Error(ErrorCode::Unsupported, "unknown initial state");
}

std::uint64_t trial_seed(std::uint64_t master_seed, long trial_index) {
  return splitmix64(splitmix64(master_seed) ^ splitmix64(static_cast<std::uint64_t>(trial_index) + 1));
}

std::vector<double> born_weights(const Field& wf, std::span<const Grain> grains) {
  if (grains.empty()) throw Error(ErrorCode::InvalidArgument, "need at least one grain");
  std::vector<double> w;
  w.reserve(grains.size());
  for (const auto& g : grains) w.push_back(forcing_weight(wf, g));
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  if (!(total > 0)) throw Error(ErrorCode::AllZeroWeights, "every grain sees zero density");
  for (auto& x : w) x /= total;
  return w;
}

std::vector<TrialResult> run_trials(const ExperimentConfig& cfg, std::span<const long> trial_indices,
                                    const TrialOptions& options) {
  cfg.validate(true);
  const auto& grid = cfg.grid;
  const double dt = cfg.propagator.dt;
  const double hbar = cfg.propagator.hbar;
  Field field = initial_field(cfg);

  const auto layout = place_grains(grid, cfg.grains.positions, cfg.grains.width, cfg.straggling,
                                   cfg.grains.coupling, cfg.master_seed);
  for (const auto& g : layout) {
    if (flatness_ratio(field, g) >= kMaxFlatnessRatio && density_at(field, g.position) > 1e-12) {
      throw Error(ErrorCode::GrainNotFlat,
                  "density varies by more than 5% across grain " + std::to_string(g.id));
    }
  }
  const std::size_t n_grains = layout.size();
  std::vector<Partition<double>> partitions;
  std::vector<double> post_means;
  for (const auto& g : layout) {
    partitions.push_back(make_partition(grid, g));
    const auto post = post_collapse_state(grid, g);
    post_means.push_back((grid.coordinates() * density(post)).sum() * grid.dx());
  }

  struct State {
    std::vector<Grain> grains;
    bool done = false;
    TrialResult result;
  };
  std::vector<State> states(trial_indices.size());
  for (std::size_t s = 0; s < states.size(); ++s) {
    const std::uint64_t seed = cfg.resample_thresholds ? trial_seed(cfg.master_seed, trial_indices[s]) : cfg.master_seed;
    states[s].grains = place_grains(grid, cfg.grains.positions, cfg.grains.width, cfg.straggling,
                                    cfg.grains.coupling, seed);
    states[s].result.trial = trial_indices[s];
    for (const auto& g : states[s].grains) states[s].result.thresholds.push_back(g.threshold);
  }

  Propagator<double> propagator(grid, cfg.potential, cfg.propagator);
  const long max_steps = static_cast<long>(std::ceil(cfg.max_time / dt - 1e-9));
  constexpr long kBlock = 64;
  std::vector<Field> fields;
  std::vector<double> weights;
  const unsigned threads = resolve_threads(options.threads);

  auto finalize = [&](State& st, const Field& pre, const double* w, const Trigger& trig) {
    if (trig.time > cfg.max_time) return;
    const auto& grain = st.grains[static_cast<std::size_t>(trig.grain_id)];
    const auto& part = partitions[static_cast<std::size_t>(trig.grain_id)];
    CollapseEvent ev;
    ev.trial_id = st.result.trial;
    ev.grain_id = trig.grain_id;
    ev.trigger_time = trig.time;
    const auto amp = amplification_exponent(grain.threshold, hbar, cfg.epsilon_factor);
    ev.epsilon = amp.epsilon;
    ev.exponent = amp.exponent;
    const double total = std::accumulate(w, w + n_grains, 0.0);
    ev.pre_weights.assign(w, w + n_grains);
    for (auto& x : ev.pre_weights) x /= total;
    ev.pre_mass_omega1 = omega1_mass(pre, part);
    auto amplified = apply_collapse(pre, part, amp.exponent);
    amplified.time = trig.time;
    st.result.post_mass_omega1 = omega1_mass(amplified, part);
    st.result.final_mean_x = post_means[static_cast<std::size_t>(trig.grain_id)];
    if (options.keep_fields) {
      st.result.pre_field = pre;
      auto post = post_collapse_state(grid, grain);
      post.time = trig.time;
      st.result.post_field = std::move(post);
      st.result.amplified_field = std::move(amplified);
    }
    st.result.event = std::move(ev);
  };

  std::vector<std::size_t> active(states.size());
  std::iota(active.begin(), active.end(), std::size_t{0});
  long step = 0;
  while (!active.empty() && step < max_steps) {
    const long nb = std::min(kBlock, max_steps - step);
    fields.clear();
    weights.assign(static_cast<std::size_t>(nb) * n_grains, 0.0);
    for (long b = 0; b < nb; ++b) {
      for (std::size_t j = 0; j < n_grains; ++j) {
        weights[static_cast<std::size_t>(b) * n_grains + j] = forcing_weight(field, layout[j]);
      }
      fields.push_back(field);
      field = propagator.advance(field);
    }
    parallel_chunks(active.size(), threads, [&](std::size_t begin, std::size_t end) {
      for (std::size_t a = begin; a < end; ++a) {
        State& st = states[active[a]];
        for (long b = 0; b < nb && !st.done; ++b) {
          const double t = fields[static_cast<std::size_t>(b)].time;
          const double* w = &weights[static_cast<std::size_t>(b) * n_grains];
          for (std::size_t j = 0; j < n_grains; ++j) st.grains[j] = accumulate(st.grains[j], w[j], dt, t);
          if (options.energy_observer) options.energy_observer(t + dt, st.grains);
          if (const auto trig = first_trigger(st.grains)) {
            finalize(st, fields[static_cast<std::size_t>(b)], w, *trig);
            st.done = true;
          }
        }
      }
    });
    std::erase_if(active, [&](std::size_t s) { return states[s].done; });
    step += nb;
  }

  std::vector<TrialResult> out;
  out.reserve(states.size());
  for (auto& st : states) {
    for (const auto& g : st.grains) {
      st.result.final_energies.push_back(g.energy);
      st.result.trigger_times.push_back(g.trigger_time);
    }
    out.push_back(std::move(st.result));
  }
  return out;
}

TrialResult run_trial(const ExperimentConfig& cfg, long trial_index, const TrialOptions& options) {
  const long idx[] = {trial_index};
  return std::move(run_trials(cfg, idx, options).front());
}

EnsembleResult run_ensemble_detailed(const ExperimentConfig& cfg, unsigned threads) {
  cfg.validate(true);
  std::vector<long> indices(static_cast<std::size_t>(cfg.n_trials));
  std::iota(indices.begin(), indices.end(), 0L);
  TrialOptions options;
  options.threads = threads;

  EnsembleResult result;
  result.trials = run_trials(cfg, indices, options);
  if (cfg.initial.kind != InitialKind::Stationary) result.warnings.emplace_back("non_stationary_initial_state");

  auto& stats = result.statistics;
  const auto layout = place_grains(cfg.grid, cfg.grains.positions, cfg.grains.width, cfg.straggling,
                                   cfg.grains.coupling, cfg.master_seed);
  stats.n_trials = cfg.n_trials;
  stats.counts.assign(layout.size(), 0);
  stats.born_weights = born_weights(initial_field(cfg), layout);
  for (const auto& t : result.trials) {
    if (t.event) {
      ++stats.counts[static_cast<std::size_t>(t.event->grain_id)];
    } else {
      ++stats.n_timeouts;
    }
  }
  const long decided = stats.n_trials - stats.n_timeouts;
  stats.frequencies.assign(layout.size(), 0.0);
  if (decided > 0) {
    for (std::size_t j = 0; j < layout.size(); ++j) {
      stats.frequencies[j] = static_cast<double>(stats.counts[j]) / static_cast<double>(decided);
    }
  }
  stats.df = static_cast<int>(layout.size()) - 1;
  if (stats.df > 0) {
    try {
      const auto chi = chi_square(stats);
      stats.chi_square = chi.statistic;
      stats.chi_square_quantile = chi_square_quantile(1.0 - cfg.significance, chi.df);
      stats.born_consistent = *stats.chi_square < *stats.chi_square_quantile;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::ExpectedCountTooSmall) throw;
      result.warnings.emplace_back("chi_square_skipped_expected_count_below_5");
    }
  }
  return result;
}

RunStatistics run_ensemble(const ExperimentConfig& cfg, unsigned threads) {
  return run_ensemble_detailed(cfg, threads).statistics;
}

ChiSquare chi_square(const RunStatistics& stats) {
  const double n = static_cast<double>(std::accumulate(stats.counts.begin(), stats.counts.end(), 0L));
  if (stats.counts.size() != stats.born_weights.size() || stats.counts.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "need matching counts and weights for at least 2 grains");
  }
  double chi = 0;
  for (std::size_t j = 0; j < stats.counts.size(); ++j) {
    const double expected = n * stats.born_weights[j];
    if (expected < 5) throw Error(ErrorCode::ExpectedCountTooSmall, "expected count below 5 for grain " + std::to_string(j));
    const double diff = static_cast<double>(stats.counts[j]) - expected;
    chi += diff * diff / expected;
  }
  return {chi, static_cast<int>(stats.counts.size()) - 1};
}

double regularized_gamma_p(double a, double x) {
  if (!(a > 0) || x < 0) throw Error(ErrorCode::InvalidArgument, "gamma P needs a > 0, x >= 0");
  if (x == 0) return 0;
  const double log_prefactor = a * std::log(x) - x - std::lgamma(a);
  if (x < a + 1) {
    double term = 1.0 / a;
    double sum = term;
    for (int k = 1; k < 10000; ++k) {
      term *= x / (a + k);
      sum += term;
      if (std::abs(term) < std::abs(sum) * 1e-16) break;
    }
    return sum * std::exp(log_prefactor);
  }
  // Lentz continued fraction for Q(a, x).
  constexpr double tiny = 1e-300;
  double b = x + 1 - a;
  double c = 1 / tiny;
  double d = 1 / b;
  double h = d;
  for (int i = 1; i < 10000; ++i) {
    const double an = -i * (i - a);
    b += 2;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1) < 1e-16) break;
  }
  return 1 - std::exp(log_prefactor) * h;
}

double chi_square_cdf(double x, int df) {
  if (df < 1) throw Error(ErrorCode::InvalidArgument, "df must be >= 1");
  return x <= 0 ? 0.0 : regularized_gamma_p(df / 2.0, x / 2.0);
}

double chi_square_quantile(double probability, int df) {
  if (!(probability > 0 && probability < 1)) throw Error(ErrorCode::InvalidArgument, "probability must lie in (0,1)");
  double lo = 0;
  double hi = std::max(1.0, static_cast<double>(df));
  while (chi_square_cdf(hi, df) < probability) hi *= 2;
  for (int i = 0; i < 200 && hi - lo > 1e-13 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (chi_square_cdf(mid, df) < probability ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace collapse_lab
