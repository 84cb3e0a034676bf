/*
 * Copyright 2026 The straq Authors
 * License: Apache License 2.0
 */
#ifndef STRAQ_KERNELS_HPP
#define STRAQ_KERNELS_HPP

#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "straq/region.hpp"

namespace straq {

/// Squared-exponential hyperparameters. `amplitude_sq` is the prior variance
/// of the latent effect function; `lengthscales` hold one scale per covariate
/// dimension; `default_noise_sd` is a homoskedastic latent-noise component
/// added on top of each observation's own disclosed noise.
struct GPHyperparams {
  double amplitude_sq = 1.0;
  std::vector<double> lengthscales;
  double default_noise_sd = 0.0;

  GPHyperparams() = default;
  GPHyperparams(double amplitude_sq_, std::vector<double> lengthscales_,
                double default_noise_sd_ = 0.0)
      : amplitude_sq(amplitude_sq_),
        lengthscales(std::move(lengthscales_)),
        default_noise_sd(default_noise_sd_) {
    validate();
  }

  static GPHyperparams isotropic(double amplitude_sq, double lengthscale,
                                 std::size_t dim, double noise_sd = 0.0) {
    return GPHyperparams(amplitude_sq, std::vector<double>(dim, lengthscale), noise_sd);
  }

  void validate() const {
    if (!(amplitude_sq > 0.0)) throw std::invalid_argument("amplitude_sq must be > 0");
    if (lengthscales.empty()) throw std::invalid_argument("at least one lengthscale");
    for (double l : lengthscales) {
      if (!(l > 0.0)) throw std::invalid_argument("lengthscales must be > 0");
    }
    if (default_noise_sd < 0.0) throw std::invalid_argument("noise sd must be >= 0");
  }

  std::size_t dim() const { return lengthscales.size(); }
};

inline constexpr double kSqrtPi = 1.772453850905516027298;

/// g(x) = x sqrt(pi) erf(x) + exp(-x^2). Even, with g(x) >= 1 everywhere;
/// its second derivative is 2 exp(-x^2), which is what makes it the double
/// antiderivative used by the range-average kernel below.
inline double g_fn(double x) {
  return x * kSqrtPi * std::erf(x) + std::exp(-x * x);
}

/// k(x, x') = alpha * exp(-sum_d (x_d - x'_d)^2 / l_d^2).
inline double se_kernel(std::span<const double> x, std::span<const double> x2,
                        const GPHyperparams& hp) {
  if (x.size() != x2.size() || x.size() != hp.dim()) {
    throw std::invalid_argument("se_kernel dimension mismatch");
  }
  double expo = 0.0;
  for (std::size_t d = 0; d < x.size(); ++d) {
    const double delta = (x[d] - x2[d]) / hp.lengthscales[d];
    expo += delta * delta;
  }
  return hp.amplitude_sq * std::exp(-expo);
}

/// Covariance between the *averages* of a squared-exponential GP over the
/// ranges (s,t) and (s2,t2): the exact double integral of the kernel divided
/// by both range widths.
inline double avg_kernel_1d(double s, double t, double s2, double t2, double alpha,
                            double l) {
  if (!(t > s) || !(t2 > s2)) {
    throw std::invalid_argument("avg_kernel_1d requires non-degenerate ranges");
  }
  if (!(l > 0.0)) throw std::invalid_argument("lengthscale must be > 0");
  const double integral =
      alpha * (l * l / 2.0) *
      (g_fn((t - s2) / l) + g_fn((t2 - s) / l) - g_fn((t - t2) / l) - g_fn((s - s2) / l));
  return integral / ((t - s) * (t2 - s2));
}

/// Average kernel over hyperrectangles: product of per-dimension range
/// averages (the kernel is separable and regions are axis-aligned), with the
/// amplitude applied exactly once.
inline double avg_kernel(const Region& r, const Region& r2, const GPHyperparams& hp) {
  if (r.dim() != r2.dim() || r.dim() != hp.dim()) {
    throw std::invalid_argument("avg_kernel dimension mismatch");
  }
  if (r.degenerate() || r2.degenerate()) {
    throw std::invalid_argument("avg_kernel requires non-degenerate regions");
  }
  double value = hp.amplitude_sq;
  for (std::size_t d = 0; d < r.dim(); ++d) {
    value *= avg_kernel_1d(r.lo(d), r.hi(d), r2.lo(d), r2.hi(d), 1.0,
                           hp.lengthscales[d]);
  }
  return value;
}

}  // namespace straq

#endif  // STRAQ_KERNELS_HPP
