/*
 * Copyright 2026 The straq Authors
 * License: Apache License 2.0
 */
#ifndef STRAQ_HYPERFIT_HPP
#define STRAQ_HYPERFIT_HPP

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "straq/gp.hpp"
#include "straq/rng.hpp"

namespace straq {

/// Maximum-likelihood fitting configuration. Optimization runs in log space
/// of (amplitude_sq, lengthscales, latent noise sd) inside the box below;
/// `fixed` holds the pre-activation hyperparameters and is always one of the
/// restart points.
struct FitConfig {
  double amplitude_sq_lo = 1e-4;
  double amplitude_sq_hi = 1e4;
  std::vector<double> lengthscale_lo;  // per dimension, natural units
  std::vector<double> lengthscale_hi;
  double noise_sd_lo = 1e-6;
  double noise_sd_hi = 1e2;
  int restarts = 5;
  double tolerance = 1e-7;
  int max_iterations = 400;
  int activation_step = 10;  // query index at which MLE begins
  bool tie_lengthscales = false;
  GPHyperparams fixed;

  /// Default box: amplitude in [1e-4, 1e4], lengthscales in [1%, 300%] of
  /// each dimension's range, latent noise sd in [1e-6, 1e2].
  static FitConfig for_bounds(const Bounds& bounds, GPHyperparams fixed_hp,
                              bool tie = false) {
    FitConfig cfg;
    cfg.fixed = std::move(fixed_hp);
    cfg.tie_lengthscales = tie;
    for (std::size_t d = 0; d < bounds.dim(); ++d) {
      const double range = bounds.side(d).width();
      cfg.lengthscale_lo.push_back(0.01 * range);
      cfg.lengthscale_hi.push_back(3.0 * range);
    }
    return cfg;
  }

  void validate() const {
    if (restarts < 1) throw std::invalid_argument("restarts must be >= 1");
    if (activation_step < 1) throw std::invalid_argument("activation_step must be >= 1");
    if (lengthscale_lo.size() != lengthscale_hi.size() || lengthscale_lo.empty()) {
      throw std::invalid_argument("lengthscale bounds must be per-dimension");
    }
    auto check = [](double lo, double hi) {
      if (!(lo > 0.0) || !(hi > lo) || !std::isfinite(hi)) {
        throw std::invalid_argument("hyperparameter bounds must be finite, positive, lo < hi");
      }
    };
    check(amplitude_sq_lo, amplitude_sq_hi);
    check(noise_sd_lo, noise_sd_hi);
    for (std::size_t d = 0; d < lengthscale_lo.size(); ++d) {
      check(lengthscale_lo[d], lengthscale_hi[d]);
    }
  }
};

namespace detail {

struct NelderMeadResult {
  Eigen::VectorXd x;
  double value = std::numeric_limits<double>::infinity();
};

/// Minimizes f over R^n from x0. Keeps the best point ever evaluated, so the
/// result is never worse than f(x0).
template <typename F>
NelderMeadResult nelder_mead(F&& f, const Eigen::VectorXd& x0, double step, double tol,
                             int max_iter) {
  const int n = static_cast<int>(x0.size());
  std::vector<Eigen::VectorXd> xs(n + 1, x0);
  std::vector<double> fs(n + 1);
  for (int i = 1; i <= n; ++i) xs[i](i - 1) += step;
  for (int i = 0; i <= n; ++i) fs[i] = f(xs[i]);

  NelderMeadResult best;
  auto consider = [&](const Eigen::VectorXd& x, double v) {
    if (v < best.value) {
      best.value = v;
      best.x = x;
    }
  };
  for (int i = 0; i <= n; ++i) consider(xs[i], fs[i]);

  std::vector<int> order(n + 1);
  for (int iter = 0; iter < max_iter; ++iter) {
    for (int i = 0; i <= n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) { return fs[a] < fs[b]; });
    const int lo = order[0], hi = order[n], second_hi = order[n - 1];
    if (std::abs(fs[hi] - fs[lo]) <= tol * (std::abs(fs[lo]) + tol)) break;

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (int i = 0; i <= n; ++i) {
      if (i != hi) centroid += xs[i];
    }
    centroid /= static_cast<double>(n);

    const Eigen::VectorXd reflected = centroid + (centroid - xs[hi]);
    const double fr = f(reflected);
    consider(reflected, fr);
    if (fr < fs[lo]) {
      const Eigen::VectorXd expanded = centroid + 2.0 * (centroid - xs[hi]);
      const double fe = f(expanded);
      consider(expanded, fe);
      if (fe < fr) {
        xs[hi] = expanded;
        fs[hi] = fe;
      } else {
        xs[hi] = reflected;
        fs[hi] = fr;
      }
    } else if (fr < fs[second_hi]) {
      xs[hi] = reflected;
      fs[hi] = fr;
    } else {
      const Eigen::VectorXd contracted = centroid + 0.5 * (xs[hi] - centroid);
      const double fc = f(contracted);
      consider(contracted, fc);
      if (fc < fs[hi]) {
        xs[hi] = contracted;
        fs[hi] = fc;
      } else {
        for (int i = 0; i <= n; ++i) {
          if (i == lo) continue;
          xs[i] = xs[lo] + 0.5 * (xs[i] - xs[lo]);
          fs[i] = f(xs[i]);
          consider(xs[i], fs[i]);
        }
      }
    }
  }
  return best;
}

}  // namespace detail

/// MLE of (amplitude_sq, lengthscales, latent noise sd) by multi-start
/// Nelder-Mead on the negative log marginal likelihood in log space. One
/// restart starts at `config.fixed`; the rest are drawn log-uniform inside
/// the box. Deterministic given the seed, and the returned likelihood is
/// never below that of any restart's initial point.
inline GPHyperparams fit_hyperparams(const std::vector<RegionObservation>& observations,
                                     const FitConfig& config, std::uint64_t seed) {
  config.validate();
  if (observations.empty()) {
    throw std::invalid_argument("fit_hyperparams needs at least one observation");
  }
  const std::size_t dim = observations.front().region.dim();
  if (config.lengthscale_lo.size() != dim) {
    throw std::invalid_argument("fit config dimension does not match observations");
  }
  const std::size_t n_len = config.tie_lengthscales ? 1 : dim;
  const int n_params = static_cast<int>(2 + n_len);

  Eigen::VectorXd log_lo(n_params), log_hi(n_params);
  log_lo(0) = std::log(config.amplitude_sq_lo);
  log_hi(0) = std::log(config.amplitude_sq_hi);
  for (std::size_t j = 0; j < n_len; ++j) {
    // Tied lengthscales use the tightest per-dimension box.
    double lo = config.lengthscale_lo[j], hi = config.lengthscale_hi[j];
    if (config.tie_lengthscales) {
      lo = *std::max_element(config.lengthscale_lo.begin(), config.lengthscale_lo.end());
      hi = *std::min_element(config.lengthscale_hi.begin(), config.lengthscale_hi.end());
      if (!(hi > lo)) {
        lo = config.lengthscale_lo.front();
        hi = config.lengthscale_hi.front();
      }
    }
    log_lo(1 + static_cast<int>(j)) = std::log(lo);
    log_hi(1 + static_cast<int>(j)) = std::log(hi);
  }
  log_lo(n_params - 1) = std::log(config.noise_sd_lo);
  log_hi(n_params - 1) = std::log(config.noise_sd_hi);

  auto clamp_box = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd c = x;
    for (int i = 0; i < n_params; ++i) c(i) = std::clamp(c(i), log_lo(i), log_hi(i));
    return c;
  };
  auto unpack = [&](const Eigen::VectorXd& x) {
    GPHyperparams hp;
    hp.amplitude_sq = std::exp(x(0));
    hp.lengthscales.resize(dim);
    for (std::size_t d = 0; d < dim; ++d) {
      hp.lengthscales[d] = std::exp(x(1 + static_cast<int>(config.tie_lengthscales ? 0 : d)));
    }
    hp.default_noise_sd = std::exp(x(n_params - 1));
    return hp;
  };

  auto objective = [&](const Eigen::VectorXd& x) {
    const Eigen::VectorXd c = clamp_box(x);
    double penalty = 1e3 * (x - c).squaredNorm();
    double lml;
    try {
      lml = log_marginal_likelihood(observations, unpack(c));
    } catch (const std::exception&) {
      return std::numeric_limits<double>::infinity();
    }
    if (!std::isfinite(lml)) return std::numeric_limits<double>::infinity();
    return -lml + penalty;
  };

  // Restart 0: the fixed pre-activation hyperparameters.
  std::vector<Eigen::VectorXd> starts;
  {
    Eigen::VectorXd x(n_params);
    x(0) = std::log(config.fixed.amplitude_sq);
    for (std::size_t j = 0; j < n_len; ++j) {
      const double l = config.fixed.lengthscales[std::min(j, config.fixed.dim() - 1)];
      x(1 + static_cast<int>(j)) = std::log(l);
    }
    x(n_params - 1) =
        std::log(std::max(config.fixed.default_noise_sd, config.noise_sd_lo));
    starts.push_back(clamp_box(x));
  }
  Rng rng = make_rng(seed);
  for (int r = 1; r < config.restarts; ++r) {
    Eigen::VectorXd x(n_params);
    for (int i = 0; i < n_params; ++i) x(i) = uniform_real(rng, log_lo(i), log_hi(i));
    starts.push_back(x);
  }

  detail::NelderMeadResult best;
  for (const auto& start : starts) {
    const double step = 0.3;
    auto res = detail::nelder_mead(objective, start, step, config.tolerance,
                                   config.max_iterations);
    if (res.value < best.value) best = res;
  }
  if (!std::isfinite(best.value)) {
    throw std::runtime_error(
        "hyperparameter fit failed: no restart reached a finite likelihood (" +
        std::to_string(observations.size()) + " observations)");
  }
  return unpack(clamp_box(best.x));
}

}  // namespace straq

#endif  // STRAQ_HYPERFIT_HPP
