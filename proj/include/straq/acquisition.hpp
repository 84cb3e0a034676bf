/*
 * Copyright 2026 The straq Authors
 * License: Apache License 2.0
 */
#ifndef STRAQ_ACQUISITION_HPP
#define STRAQ_ACQUISITION_HPP

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "straq/gp.hpp"
#include "straq/kernels.hpp"
#include "straq/region.hpp"
#include "straq/rng.hpp"

namespace straq {

enum class AFFamily {
  taaf,
  variance_mi,
  regret,
  pure_variance,
  pure_abs_mean,
  log_weighted,
  area_weighted,
  ratio,
  full_posterior,
};

enum class SizeMode { none, penalty, constraint, penalty_and_constraint };

enum class BetaSchedule { fixed, linear_decay };

/// How the posterior variance enters the acquisition score. `average` feeds
/// the variance of the region average as-is. `volume_weighted` multiplies it
/// by the squared volume fraction, i.e. the variance of the region integral
/// normalized by the ambient box: uncertainty about large segments then
/// weighs as much as their share of the targeting objective, queries start
/// broad and narrow over time, and near-point regions stop dominating the
/// argmax.
enum class VarianceScale { average, volume_weighted };

/// Raised by select_next when every candidate is filtered out; callers may
/// widen the size-constraint fractions once and retry.
class NoFeasibleCandidateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AFConfig {
  AFFamily family = AFFamily::taaf;
  double beta = 1.96;
  BetaSchedule beta_schedule = BetaSchedule::fixed;
  double beta_decay_slope = 0.01;  // linear_decay: beta_i = beta - slope * i
  double tau = 1.0;
  VarianceScale variance_scale = VarianceScale::average;
  SizeMode size_mode = SizeMode::none;
  std::optional<double> penalty_weight;  // empty: 0.5 * sd of the step's raw scores
  double f_min = 0.15;
  double f_max = 0.60;
  int top_k = 1;
  int candidate_count = 1000;
  bool forbid_exact_repeats = false;
  int full_posterior_samples = 200;
  int full_posterior_candidates = 50;
  std::vector<int> full_posterior_partition_bins;  // defaults to 5 per dim

  bool constrained() const {
    return size_mode == SizeMode::constraint || size_mode == SizeMode::penalty_and_constraint;
  }
  bool penalized() const {
    return size_mode == SizeMode::penalty || size_mode == SizeMode::penalty_and_constraint;
  }

  void validate() const {
    if (!(f_min > 0.0 && f_min < f_max && f_max <= 1.0)) {
      throw std::invalid_argument("size-constraint fractions need 0 < f_min < f_max <= 1");
    }
    if (top_k < 1) throw std::invalid_argument("top_k must be >= 1");
    if (candidate_count < 1) throw std::invalid_argument("candidate_count must be >= 1");
    if (top_k > candidate_count) {
      throw std::invalid_argument("top_k cannot exceed candidate_count");
    }
    if (!(tau > 0.0)) throw std::invalid_argument("tau must be > 0");
    if (penalty_weight && *penalty_weight < 0.0) {
      throw std::invalid_argument("penalty weight must be >= 0");
    }
  }
};

struct ScoredCandidate {
  Region region;
  double mean = 0.0;      // net of cost
  double variance = 0.0;
  double score = 0.0;
  bool feasible = true;
};

inline double beta_for_step(const AFConfig& config, int query_index) {
  if (config.beta_schedule == BetaSchedule::fixed) return config.beta;
  return config.beta - config.beta_decay_slope * static_cast<double>(query_index);
}

inline double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

inline double normal_cdf(double z) {
  return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

/// beta * V - |m|: prefers regions whose sign is still uncertain over regions
/// that are already clearly positive or clearly negative.
inline double taaf(double m, double v, double beta) { return beta * v - std::abs(m); }

/// sigma^2 - sigma^2/(sigma^2 + tau) * ln(1 + tau/sigma^2); mutual-information
/// style, 0 in the zero-variance limit and increasing in the variance for
/// sigma^2 above ~0.135 tau (the exact form dips slightly negative below
/// that, which never affects an argmax).
inline double af_variance_mi(double var, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("tau must be > 0");
  if (var < 0.0) throw std::invalid_argument("variance must be >= 0");
  if (var == 0.0) return 0.0;
  return var - var / (var + tau) * std::log1p(tau / var);
}

/// sigma * |mu|: expected regret of a misclassified sign.
inline double af_regret(double m, double sd) {
  if (sd < 0.0) throw std::invalid_argument("sd must be >= 0");
  return sd * std::abs(m);
}

namespace detail {
inline constexpr double kAbsMeanGuard = 1e-12;
inline constexpr double kGuardedScore = 1e12;
}  // namespace detail

/// The pretest candidates: pure variance, pure absolute mean, log-weighted,
/// area-weighted and ratio forms. All scores are larger-is-better.
inline double af_appendix(AFFamily family, double m, double sd, const Region& region) {
  if (sd < 0.0) throw std::invalid_argument("sd must be >= 0");
  switch (family) {
    case AFFamily::pure_variance:
      return sd;
    case AFFamily::pure_abs_mean:
      return -std::abs(m);
    case AFFamily::log_weighted:
      if (std::abs(m) < detail::kAbsMeanGuard) return detail::kGuardedScore;
      return 2.0 * std::log(sd) - std::log(std::abs(m));
    case AFFamily::area_weighted:
      return (sd - m) / region_volume(region);
    case AFFamily::ratio:
      if (std::abs(m) < detail::kAbsMeanGuard) return detail::kGuardedScore;
      return sd / std::abs(m);
    default:
      throw std::invalid_argument("af_appendix called with a non-appendix family");
  }
}

/// Expected gain from revealing a N(m, sd^2) effect before assigning:
/// m [1 - Phi(-m/sd)] + sd phi(-m/sd) - max(m, 0). Peaks at m = 0 and grows
/// with sd; zero when there is nothing left to learn.
inline double value_of_querying(double m, double sd) {
  if (sd < 0.0) throw std::invalid_argument("sd must be >= 0");
  if (sd == 0.0) return 0.0;
  const double z = -m / sd;
  return m * (1.0 - normal_cdf(z)) + sd * normal_pdf(z) - std::max(m, 0.0);
}

/// Applies the size treatment: constraint modes mark regions with any side
/// fraction outside [f_min, f_max] infeasible; penalty modes subtract
/// lambda * volume fraction. `lambda` is the resolved per-step weight.
inline ScoredCandidate apply_size_treatment(double score, const Region& region,
                                            const Bounds& bounds, const AFConfig& config,
                                            double lambda = 0.0) {
  ScoredCandidate out;
  out.region = region;
  out.score = score;
  out.feasible = true;
  if (config.constrained()) {
    for (double f : side_fractions(region, bounds)) {
      if (f < config.f_min || f > config.f_max) {
        out.feasible = false;
        break;
      }
    }
  }
  if (config.penalized() && out.feasible) {
    const double vol_fraction = region_volume(region) / region_volume(bounds.as_region());
    out.score -= lambda * vol_fraction;
  }
  return out;
}

/// Random candidate regions. Constrained mode draws side lengths first and
/// then a uniform in-bounds placement, so every candidate satisfies the size
/// constraint by construction; unconstrained mode draws a center and side
/// fractions in (0, 1] and clips to bounds.
inline std::vector<Region> generate_candidates(const Bounds& bounds, const AFConfig& config,
                                               Rng& rng) {
  config.validate();
  const int count = config.family == AFFamily::full_posterior
                        ? config.full_posterior_candidates
                        : config.candidate_count;
  std::vector<Region> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int c = 0; c < count; ++c) {
    std::vector<Interval> sides(bounds.dim());
    if (config.constrained()) {
      for (std::size_t d = 0; d < bounds.dim(); ++d) {
        const double width =
            uniform_real(rng, config.f_min, config.f_max) * bounds.side(d).width();
        const double lo = uniform_real(rng, bounds.lo(d), bounds.hi(d) - width);
        sides[d] = Interval{lo, lo + width};
      }
      out.emplace_back(std::move(sides));
    } else {
      for (std::size_t d = 0; d < bounds.dim(); ++d) {
        const double center = uniform_real(rng, bounds.lo(d), bounds.hi(d));
        const double fraction = 1.0 - uniform_real(rng, 0.0, 1.0);  // in (0, 1]
        const double half = 0.5 * fraction * bounds.side(d).width();
        sides[d] = Interval{center - half, center + half};
      }
      out.push_back(clip_region(Region(std::move(sides)), bounds));
    }
  }
  return out;
}

/// Monte-Carlo estimate of the expected improvement in targeting-policy value
/// from querying `candidate`: sample the latent average from its posterior,
/// condition on it noiselessly, and re-score the sign policy over the
/// partition cells (volume-weighted, treat iff posterior mean > cost).
inline double af_full_posterior(const GPState& state, const Region& candidate,
                                int sample_count, std::span<const Region> partition,
                                double cost, Rng& rng) {
  if (sample_count < 1) throw std::invalid_argument("sample_count must be >= 1");
  if (partition.empty()) throw std::invalid_argument("partition must be non-empty");

  const PosteriorSummary cand = state.posterior(candidate);
  const std::size_t n_cells = partition.size();
  double total_volume = 0.0;
  std::vector<double> weights(n_cells), means(n_cells);
  for (std::size_t c = 0; c < n_cells; ++c) {
    weights[c] = region_volume(partition[c]);
    total_volume += weights[c];
  }
  for (auto& w : weights) w /= total_volume;
  for (std::size_t c = 0; c < n_cells; ++c) {
    means[c] = state.posterior(partition[c]).mean;
  }

  auto policy_value = [&](const std::vector<double>& cell_means) {
    double v = 0.0;
    for (std::size_t c = 0; c < n_cells; ++c) {
      v += weights[c] * std::max(cell_means[c] - cost, 0.0);
    }
    return v;
  };
  const double before_value = policy_value(means);

  // Variances at or below the jitter floor carry no real information.
  if (!(cand.variance > 1e-6 * state.hyperparams().amplitude_sq)) return 0.0;

  // Conditioning is linear in the observed value: probe with a unit offset to
  // read off each cell's mean response per unit of sampled deviation.
  const GPState probe = state.condition(RegionObservation{candidate, cand.mean + 1.0, 0.0});
  std::vector<double> response(n_cells);
  for (std::size_t c = 0; c < n_cells; ++c) {
    response[c] = probe.posterior(partition[c]).mean - means[c];
  }

  const double sd = std::sqrt(cand.variance);
  std::vector<double> shifted(n_cells);
  double total = 0.0;
  for (int s = 0; s < sample_count; ++s) {
    const double deviation = sd * standard_normal(rng);
    for (std::size_t c = 0; c < n_cells; ++c) {
      shifted[c] = means[c] + response[c] * deviation;
    }
    total += policy_value(shifted) - before_value;
  }
  return total / static_cast<double>(sample_count);
}

/// One-candidate scoring shared by select_next and the tests: `m` is already
/// net of cost.
inline double af_score(const AFConfig& config, double beta, double m, double variance,
                       const Region& region) {
  const double sd = std::sqrt(std::max(variance, 0.0));
  switch (config.family) {
    case AFFamily::taaf:
      return taaf(m, variance, beta);
    case AFFamily::variance_mi:
      return af_variance_mi(variance, config.tau);
    case AFFamily::regret:
      return af_regret(m, sd);
    case AFFamily::pure_variance:
    case AFFamily::pure_abs_mean:
    case AFFamily::log_weighted:
    case AFFamily::area_weighted:
    case AFFamily::ratio:
      return af_appendix(config.family, m, sd, region);
    case AFFamily::full_posterior:
      throw std::invalid_argument("full_posterior scoring needs state and partition");
  }
  throw std::logic_error("unknown acquisition family");
}

/// Generates candidates, scores them against the posterior (subtracting
/// `cost` from means), applies the size treatment, drops exact repeats of
/// history when configured, and picks uniformly among the top_k feasible
/// scores. Throws NoFeasibleCandidateError when the filters leave nothing.
inline Region select_next(const GPState& state, std::span<const Region> history,
                          const Bounds& bounds, const AFConfig& config, double cost,
                          Rng& rng) {
  config.validate();
  const std::vector<Region> candidates = generate_candidates(bounds, config, rng);

  std::vector<ScoredCandidate> scored;
  scored.reserve(candidates.size());
  std::vector<double> raw_scores;
  raw_scores.reserve(candidates.size());

  std::vector<Region> partition;
  if (config.family == AFFamily::full_posterior) {
    std::vector<int> bins = config.full_posterior_partition_bins;
    if (bins.empty()) bins.assign(bounds.dim(), 5);
    partition = grid_cells(bounds, bins);
  }

  const double bounds_volume = region_volume(bounds.as_region());
  for (const Region& cand : candidates) {
    const PosteriorSummary post = state.posterior(cand);
    const double m = post.mean - cost;
    double variance = post.variance;
    if (config.variance_scale == VarianceScale::volume_weighted) {
      const double omega = region_volume(cand) / bounds_volume;
      variance *= omega * omega;
    }
    double raw;
    if (config.family == AFFamily::full_posterior) {
      raw = af_full_posterior(state, cand, config.full_posterior_samples, partition, cost,
                              rng);
    } else {
      raw = af_score(config, config.beta, m, variance, cand);
    }
    ScoredCandidate sc;
    sc.region = cand;
    sc.mean = m;
    sc.variance = variance;
    sc.score = raw;
    scored.push_back(std::move(sc));
    raw_scores.push_back(raw);
  }

  double lambda = 0.0;
  if (config.penalized()) {
    if (config.penalty_weight) {
      lambda = *config.penalty_weight;
    } else {
      double mean = 0.0;
      for (double s : raw_scores) mean += s;
      mean /= static_cast<double>(raw_scores.size());
      double var = 0.0;
      for (double s : raw_scores) var += (s - mean) * (s - mean);
      var /= static_cast<double>(raw_scores.size());
      lambda = 0.5 * std::sqrt(var);
    }
  }

  std::vector<std::size_t> feasible;
  for (std::size_t i = 0; i < scored.size(); ++i) {
    const ScoredCandidate treated =
        apply_size_treatment(scored[i].score, scored[i].region, bounds, config, lambda);
    scored[i].score = treated.score;
    scored[i].feasible = treated.feasible;
    if (!scored[i].feasible) continue;
    if (config.forbid_exact_repeats) {
      bool repeat = false;
      for (const Region& h : history) {
        if (scored[i].region == h) {
          repeat = true;
          break;
        }
      }
      if (repeat) continue;
    }
    feasible.push_back(i);
  }
  if (feasible.empty()) {
    throw NoFeasibleCandidateError(
        "no feasible candidate region; widen the size-constraint fractions and retry");
  }

  std::stable_sort(feasible.begin(), feasible.end(), [&](std::size_t a, std::size_t b) {
    return scored[a].score > scored[b].score;
  });
  const std::size_t k =
      std::min<std::size_t>(static_cast<std::size_t>(config.top_k), feasible.size());
  const std::size_t pick = uniform_index(rng, k);
  return scored[feasible[pick]].region;
}

}  // namespace straq

#endif  // STRAQ_ACQUISITION_HPP
