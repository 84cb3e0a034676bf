/*
 * Copyright 2026 The straq Authors
 * License: Apache License 2.0
 */
#ifndef STRAQ_GP_HPP
#define STRAQ_GP_HPP

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

#include "straq/kernels.hpp"
#include "straq/region.hpp"

namespace straq {

/// One conditioned data point: a noisy average of the latent effect over a
/// region. `value` is stored net of any treatment cost; `noise_sd` is the
/// disclosed per-observation noise (the latent component lives in
/// GPHyperparams::default_noise_sd).
struct RegionObservation {
  Region region;
  double value = 0.0;
  double noise_sd = 0.0;
};

struct PosteriorSummary {
  double mean = 0.0;
  double variance = 0.0;
};

namespace detail {
// Relative jitter added to the Gram diagonal before factorization.
inline constexpr double kGramJitter = 1e-8;

inline double effective_noise_var(const RegionObservation& obs, const GPHyperparams& hp) {
  return obs.noise_sd * obs.noise_sd + hp.default_noise_sd * hp.default_noise_sd;
}
}  // namespace detail

/// Gram matrix of average-kernel covariances between observed regions.
inline Eigen::MatrixXd gram_matrix(const std::vector<RegionObservation>& observations,
                                   const GPHyperparams& hp) {
  const Eigen::Index n = static_cast<Eigen::Index>(observations.size());
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      const double v = avg_kernel(observations[i].region, observations[j].region, hp);
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

/// Evidence of the observation vector under the average-kernel prior plus
/// per-observation noise:
///   -1/2 y' A^-1 y - 1/2 log det A - n/2 log 2*pi,  A = K + diag(sigma^2).
inline double log_marginal_likelihood(const std::vector<RegionObservation>& observations,
                                      const GPHyperparams& hp) {
  if (observations.empty()) {
    throw std::invalid_argument("log_marginal_likelihood needs at least one observation");
  }
  const Eigen::Index n = static_cast<Eigen::Index>(observations.size());
  Eigen::MatrixXd a = gram_matrix(observations, hp);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    a(i, i) += detail::effective_noise_var(observations[i], hp) +
               detail::kGramJitter * hp.amplitude_sq;
    y(i) = observations[i].value;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("gram system is not positive definite");
  }
  const Eigen::VectorXd alpha = llt.solve(y);
  double log_det = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) log_det += std::log(llt.matrixL()(i, i));
  return -0.5 * y.dot(alpha) - log_det -
         0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
}

/// Immutable GP over region averages: hyperparameters plus a conditioned set
/// of observations with a cached Cholesky factorization of K + diag(sigma^2).
/// `condition` returns a new state; existing states stay valid and shareable.
class GPState {
 public:
  explicit GPState(GPHyperparams hp) : hp_(std::move(hp)) { hp_.validate(); }

  GPState(GPHyperparams hp, std::vector<RegionObservation> observations)
      : hp_(std::move(hp)), obs_(std::move(observations)) {
    hp_.validate();
    for (const auto& o : obs_) {
      if (o.region.dim() != hp_.dim()) {
        throw std::invalid_argument("observation dimension does not match hyperparams");
      }
      if (o.region.degenerate()) {
        throw std::invalid_argument("observation region is degenerate");
      }
      if (o.noise_sd < 0.0) throw std::invalid_argument("noise_sd must be >= 0");
    }
    refactorize();
  }

  const GPHyperparams& hyperparams() const { return hp_; }
  const std::vector<RegionObservation>& observations() const { return obs_; }
  std::size_t size() const { return obs_.size(); }

  GPState condition(const RegionObservation& obs) const {
    std::vector<RegionObservation> next = obs_;
    next.push_back(obs);
    return GPState(hp_, std::move(next));
  }

  GPState with_hyperparams(GPHyperparams hp) const { return GPState(std::move(hp), obs_); }

  /// Posterior mean and variance of the latent average over `query`.
  PosteriorSummary posterior(const Region& query) const {
    if (query.dim() != hp_.dim()) {
      throw std::invalid_argument("query dimension does not match state");
    }
    const double prior_var = avg_kernel(query, query, hp_);
    if (obs_.empty()) return PosteriorSummary{0.0, prior_var};

    const Eigen::Index n = static_cast<Eigen::Index>(obs_.size());
    Eigen::VectorXd k_star(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      k_star(i) = avg_kernel(query, obs_[i].region, hp_);
    }
    const double mean = k_star.dot(alpha_);
    const Eigen::VectorXd v = llt_.matrixL().solve(k_star);
    const double variance = prior_var - v.squaredNorm();
    return PosteriorSummary{mean, std::max(variance, 0.0)};
  }

 private:
  void refactorize() {
    const Eigen::Index n = static_cast<Eigen::Index>(obs_.size());
    if (n == 0) return;
    Eigen::MatrixXd a = gram_matrix(obs_, hp_);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      a(i, i) += detail::effective_noise_var(obs_[i], hp_) +
                 detail::kGramJitter * hp_.amplitude_sq;
      y(i) = obs_[i].value;
    }
    llt_.compute(a);
    if (llt_.info() != Eigen::Success) {
      throw std::runtime_error("gram system is not positive definite after jitter");
    }
    alpha_ = llt_.solve(y);
  }

  GPHyperparams hp_;
  std::vector<RegionObservation> obs_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::VectorXd alpha_;
};

inline PosteriorSummary posterior_region(const GPState& state, const Region& query) {
  return state.posterior(query);
}

inline GPState condition(const GPState& state, const RegionObservation& obs) {
  return state.condition(obs);
}

}  // namespace straq

#endif  // STRAQ_GP_HPP
