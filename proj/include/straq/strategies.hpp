/*
 * Copyright 2026 The straq Authors
 * License: Apache License 2.0
 */
#ifndef STRAQ_STRATEGIES_HPP
#define STRAQ_STRATEGIES_HPP

#include <cmath>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "straq/acquisition.hpp"
#include "straq/gp.hpp"
#include "straq/hyperfit.hpp"
#include "straq/policy.hpp"
#include "straq/privacy_oracle.hpp"
#include "straq/region.hpp"
#include "straq/rng.hpp"

namespace straq {

/// Bin counts per dimension for a query budget: the largest grid with counts
/// differing by at most one across dimensions whose cell count fits in the
/// budget, larger counts going to the first dimensions.
inline std::vector<int> bins_for_budget(long budget, std::size_t dim) {
  if (budget < 1) throw std::invalid_argument("budget must be >= 1");
  int base = 1;
  while (std::pow(static_cast<double>(base + 1), static_cast<double>(dim)) <=
         static_cast<double>(budget) + 0.5) {
    ++base;
  }
  std::vector<int> bins(dim, base);
  for (std::size_t d = 0; d < dim; ++d) {
    bins[d] = base + 1;
    long cells = 1;
    for (int b : bins) cells *= b;
    if (cells > budget) {
      bins[d] = base;
      break;
    }
  }
  return bins;
}

/// Equal-width grid of query cells covering the bounds.
inline std::vector<Region> uniform_plan(const Bounds& bounds,
                                        const std::vector<int>& bins_per_dim) {
  return grid_cells(bounds, bins_per_dim);
}

struct UniformRunResult {
  TargetingPolicy policy;
  std::vector<QueryRecord> records;
  long performed_queries = 0;  // non-suppressed
};

/// Queries every grid cell once; a cell is treated iff its noisy result minus
/// cost is positive, and suppressed cells default to control. Regions are
/// mapped through `to_data` (when given) before hitting the oracle.
inline UniformRunResult run_uniform(QuerySession& session, const Bounds& bounds,
                                    const std::vector<int>& bins_per_dim, double cost,
                                    const AffineMap* to_data = nullptr) {
  const std::vector<Region> plan = uniform_plan(bounds, bins_per_dim);
  if (session.remaining_budget() < static_cast<long>(plan.size())) {
    throw BudgetExhaustedError("uniform plan needs " + std::to_string(plan.size()) +
                               " queries but only " +
                               std::to_string(session.remaining_budget()) + " remain");
  }
  UniformRunResult result{
      TargetingPolicy(bounds, bins_per_dim,
                      std::vector<Action>(plan.size(), Action::control)),
      {},
      0};
  std::vector<Action> actions(plan.size(), Action::control);
  for (std::size_t c = 0; c < plan.size(); ++c) {
    const Region query = to_data ? to_data->region_to_data(plan[c]) : plan[c];
    const QueryRecord rec = session.execute_query(query);
    if (!rec.suppressed) {
      ++result.performed_queries;
      if (*rec.noisy_result - cost > 0.0) actions[c] = Action::treat;
    }
    result.records.push_back(rec);
  }
  std::optional<AffineMap> map;
  if (to_data) map = *to_data;
  result.policy = TargetingPolicy(bounds, bins_per_dim, std::move(actions), std::move(map));
  return result;
}

/// Extracts a sign policy from the posterior on a micro-cell grid:
/// resolution^V equal cells, treat iff posterior mean minus cost is positive.
inline TargetingPolicy policy_from_posterior(const GPState& state, const Bounds& bounds,
                                             int resolution, double cost,
                                             const AffineMap* data_to_client = nullptr) {
  if (resolution < 1) throw std::invalid_argument("resolution must be >= 1");
  const std::vector<int> bins(bounds.dim(), resolution);
  const std::vector<Region> cells = grid_cells(bounds, bins);
  std::vector<Action> actions(cells.size(), Action::control);
  for (std::size_t c = 0; c < cells.size(); ++c) {
    if (state.posterior(cells[c]).mean - cost > 0.0) actions[c] = Action::treat;
  }
  std::optional<AffineMap> map;
  if (data_to_client) map = *data_to_client;
  return TargetingPolicy(bounds, bins, std::move(actions), std::move(map));
}

struct StrategicRunConfig {
  AFConfig af;
  std::optional<FitConfig> fit;  // empty: fixed hyperparameters throughout
  GPHyperparams initial_hyperparams;
  double cost = 0.0;
  int eval_resolution = 10;  // micro-cells per dimension for policy extraction
  // Adds the client-side estimate of finite-sample arm noise to each
  // observation: within-region effect spread (from the client's own prior)
  // divided by the disclosed affected count. Uses only disclosed quantities.
  bool model_sampling_noise = false;

  void validate() const {
    af.validate();
    if (eval_resolution < 1) throw std::invalid_argument("eval_resolution must be >= 1");
    if (fit) fit->validate();
  }
};

struct StrategicRunResult {
  TargetingPolicy policy;
  std::vector<QueryRecord> records;
  std::vector<GPState> trace;  // state after each query
  GPState final_state;
  long performed_queries = 0;
};

/// The adaptive client: acquisition-driven region selection, cost-netted
/// conditioning of the GP, optional MLE refits from the activation step on,
/// and sign-policy extraction at the end. Suppressed queries contribute no
/// observation but stay in history. Fully deterministic given the seed.
inline StrategicRunResult run_strategic(QuerySession& session, const Bounds& bounds,
                                        const StrategicRunConfig& config,
                                        std::uint64_t seed,
                                        const AffineMap* to_data = nullptr) {
  config.validate();
  Rng rng = make_rng(derive_seed(seed, {0x5e1ec7, 0}));

  GPState state(config.initial_hyperparams);
  std::vector<RegionObservation> observations;
  std::vector<Region> history;
  StrategicRunResult result{
      TargetingPolicy(bounds, std::vector<int>(bounds.dim(), 1),
                      std::vector<Action>(1, Action::control)),
      {},
      {},
      state,
      0};

  int query_index = 0;
  while (session.remaining_budget() > 0) {
    ++query_index;
    AFConfig step_af = config.af;
    step_af.beta = beta_for_step(config.af, query_index);
    step_af.beta_schedule = BetaSchedule::fixed;

    Region region;
    try {
      region = select_next(state, history, bounds, step_af, 0.0, rng);
    } catch (const NoFeasibleCandidateError&) {
      // One retry with widened size fractions, then give up.
      step_af.f_min = 0.5 * step_af.f_min;
      step_af.f_max = 1.0;
      region = select_next(state, history, bounds, step_af, 0.0, rng);
    }

    const Region query = to_data ? to_data->region_to_data(region) : region;
    const QueryRecord rec = session.execute_query(query);
    history.push_back(region);
    result.records.push_back(rec);

    if (!rec.suppressed) {
      ++result.performed_queries;
      double obs_noise = rec.noise_sd;
      if (config.model_sampling_noise && rec.affected_count > 0) {
        const GPHyperparams& hp = state.hyperparams();
        const double within =
            std::max(hp.amplitude_sq - avg_kernel(region, region, hp), 0.0);
        obs_noise = std::sqrt(obs_noise * obs_noise +
                              2.0 * within / static_cast<double>(rec.affected_count));
      }
      observations.push_back(
          RegionObservation{region, *rec.noisy_result - config.cost, obs_noise});
      if (config.fit && query_index >= config.fit->activation_step &&
          observations.size() >= 2) {
        const GPHyperparams fitted = fit_hyperparams(
            observations, *config.fit, derive_seed(seed, {0xf17, static_cast<std::uint64_t>(query_index)}));
        state = GPState(fitted, observations);
      } else {
        state = state.condition(observations.back());
      }
    }
    result.trace.push_back(state);
  }

  result.final_state = state;
  result.policy =
      policy_from_posterior(state, bounds, config.eval_resolution, 0.0, to_data);
  return result;
}

}  // namespace straq

#endif  // STRAQ_STRATEGIES_HPP
