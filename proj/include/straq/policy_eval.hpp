/*
 * Copyright 2026 The straq Authors
 * License: Apache License 2.0
 */
#ifndef STRAQ_POLICY_EVAL_HPP
#define STRAQ_POLICY_EVAL_HPP

#include <cmath>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "straq/data.hpp"
#include "straq/policy.hpp"
#include "straq/textio.hpp"

namespace straq {

/// Value of the full-information policy treat-iff-effect-exceeds-cost,
/// reported as an increment over the all-control blanket:
/// (1/N) sum max(tau_i - c, 0).
inline double oracle_policy_value(const Population& population, double cost) {
  if (population.size() == 0) throw std::invalid_argument("population is empty");
  double total = 0.0;
  for (std::size_t i = 0; i < population.size(); ++i) {
    total += std::max(population.true_effect(i) - cost, 0.0);
  }
  return total / static_cast<double>(population.size());
}

/// Ground-truth value of a policy on a population with known effects, as an
/// increment over all-control: (1/N) sum (tau_i - c) for treated units.
inline double policy_value_on_population(const TargetingPolicy& policy,
                                         const Population& population, double cost) {
  if (population.size() == 0) throw std::invalid_argument("population is empty");
  double total = 0.0;
  for (std::size_t i = 0; i < population.size(); ++i) {
    if (policy.action_at(population.row(i)) == Action::treat) {
      total += population.true_effect(i) - cost;
    }
  }
  return total / static_cast<double>(population.size());
}

struct IpwEstimate {
  double estimate = 0.0;
  double standard_error = 0.0;
};

/// Off-policy value from randomized data via inverse propensity weighting.
/// The matched-arm estimator weights units whose assigned arm agrees with the
/// policy: (1/n) sum [ I{pi=1, W=1}(Y-c)/e + I{pi=0, W=0} Y/(1-e) ].
/// `paper_literal` drops the treatment-match indicator on the treated term
/// and the control-match indicator on the control term, weighting every unit
/// by its policy arm alone.
inline IpwEstimate ipw_value(const TargetingPolicy& policy, const Dataset& eval_data,
                             double cost, bool paper_literal = false) {
  const std::size_t n = eval_data.size();
  if (n == 0) throw std::invalid_argument("evaluation dataset is empty");
  const double e = eval_data.propensity();

  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const bool treat = policy.action_at(eval_data.row(i)) == Action::treat;
    const int w = eval_data.treatment(i);
    const double y = eval_data.outcome(i);
    double term = 0.0;
    if (paper_literal) {
      term = treat ? (y - cost) / e : y / (1.0 - e);
    } else {
      if (treat && w == 1) {
        term = (y - cost) / e;
      } else if (!treat && w == 0) {
        term = y / (1.0 - e);
      }
    }
    sum += term;
    sum_sq += term * term;
  }
  IpwEstimate out;
  out.estimate = sum / static_cast<double>(n);
  const double var = sum_sq / static_cast<double>(n) - out.estimate * out.estimate;
  out.standard_error = std::sqrt(std::max(var, 0.0) / static_cast<double>(n));
  return out;
}

inline double lift_vs_treat_all(double policy_value, double treat_all_value) {
  return policy_value - treat_all_value;
}

struct EvaluationReport {
  double policy_value = 0.0;
  double treat_all_value = 0.0;
  double control_all_value = 0.0;
  double lift = 0.0;
  double standard_error = 0.0;
  std::optional<double> oracle_fraction;  // (value - best blanket) / (oracle - best blanket)
};

/// Report for a ground-truth population. The oracle fraction normalizes the
/// policy's increment over the best blanket intervention by the oracle's.
inline EvaluationReport evaluate_on_population(const TargetingPolicy& policy,
                                               const Population& population, double cost) {
  EvaluationReport rep;
  rep.policy_value = policy_value_on_population(policy, population, cost);
  double mean_tau = 0.0;
  for (std::size_t i = 0; i < population.size(); ++i) mean_tau += population.true_effect(i);
  mean_tau /= static_cast<double>(population.size());
  rep.treat_all_value = mean_tau - cost;
  rep.control_all_value = 0.0;
  rep.lift = lift_vs_treat_all(rep.policy_value, rep.treat_all_value);
  const double oracle = oracle_policy_value(population, cost);
  const double blanket = std::max(rep.treat_all_value, 0.0);
  if (oracle > blanket) {
    rep.oracle_fraction = (rep.policy_value - blanket) / (oracle - blanket);
  }
  rep.standard_error = 0.0;  // exact on the population
  return rep;
}

/// Report from randomized data via IPW (no oracle available).
inline EvaluationReport evaluate_on_dataset(const TargetingPolicy& policy,
                                            const Dataset& eval_data, double cost,
                                            bool paper_literal = false) {
  EvaluationReport rep;
  const IpwEstimate main = ipw_value(policy, eval_data, cost, paper_literal);
  rep.policy_value = main.estimate;
  rep.standard_error = main.standard_error;

  // Blanket baselines through the same estimator.
  const TargetingPolicy treat_all(policy.bounds(),
                                  std::vector<int>(policy.bounds().dim(), 1),
                                  {Action::treat}, policy.transform());
  const TargetingPolicy control_all(policy.bounds(),
                                    std::vector<int>(policy.bounds().dim(), 1),
                                    {Action::control}, policy.transform());
  rep.treat_all_value = ipw_value(treat_all, eval_data, cost, paper_literal).estimate;
  rep.control_all_value = ipw_value(control_all, eval_data, cost, paper_literal).estimate;
  rep.lift = lift_vs_treat_all(rep.policy_value, rep.treat_all_value);
  return rep;
}

/// Mean and normal-approximation CI of per-repeat ratios. Ratios are formed
/// per repeat because numerator and denominator come from the same bootstrap
/// sample and are not independent.
struct RatioSummary {
  double mean = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
};

inline RatioSummary ratio_summary(const std::vector<double>& numerators,
                                  const std::vector<double>& denominators) {
  if (numerators.size() != denominators.size() || numerators.empty()) {
    throw std::invalid_argument("ratio_summary needs paired non-empty samples");
  }
  std::vector<double> ratios(numerators.size());
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    ratios[i] = numerators[i] / denominators[i];
  }
  double mean = 0.0;
  for (double r : ratios) mean += r;
  mean /= static_cast<double>(ratios.size());
  double var = 0.0;
  for (double r : ratios) var += (r - mean) * (r - mean);
  var /= ratios.size() > 1 ? static_cast<double>(ratios.size() - 1) : 1.0;
  const double half = 1.96 * std::sqrt(var / static_cast<double>(ratios.size()));
  return RatioSummary{mean, mean - half, mean + half};
}

inline void write_report(const EvaluationReport& rep, std::ostream& os) {
  os << "# straq-schema v1 evaluation\n";
  os << "policy_value,treat_all_value,control_all_value,lift_vs_treat_all,standard_error,"
        "oracle_fraction\n";
  os << fmt_double(rep.policy_value) << "," << fmt_double(rep.treat_all_value) << ","
     << fmt_double(rep.control_all_value) << "," << fmt_double(rep.lift) << ","
     << fmt_double(rep.standard_error) << ",";
  if (rep.oracle_fraction) os << fmt_double(*rep.oracle_fraction);
  os << "\n";
}

}  // namespace straq

#endif  // STRAQ_POLICY_EVAL_HPP
