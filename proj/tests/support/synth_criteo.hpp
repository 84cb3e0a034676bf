/*
 * Copyright 2026 The straq Authors
 * License: Apache License 2.0
 */

// Synthetic uplift dataset in the shape of the Criteo benchmark: 12 bounded,
// moderately skewed anonymized features, a treatment flag with propensity
// 0.85, and a binary visit outcome with a planted smooth effect surface that
// depends on f0, f6 and (weakly) nothing else, so collapsing to
// (f0, f6, sum-of-rest) keeps the signal recoverable.

#ifndef STRAQ_TESTS_SYNTH_CRITEO_HPP
#define STRAQ_TESTS_SYNTH_CRITEO_HPP

#include <cmath>
#include <ostream>
#include <span>
#include <vector>

#include "straq/ingest.hpp"
#include "straq/rng.hpp"
#include "straq/textio.hpp"

namespace straq_tests {

inline straq::CsvSchema synth_criteo_schema() {
  straq::CsvSchema s;
  for (int i = 0; i < 12; ++i) s.feature_columns.push_back("f" + std::to_string(i));
  s.treatment_column = "treatment";
  s.outcome_column = "visit";
  s.propensity = 0.85;
  return s;
}

/// Planted conditional treatment effect, a smooth function of f0 and f6.
inline double planted_tau(std::span<const double> raw12) {
  const double z0 = (raw12[0] - 20.0) / 4.0;
  const double z6 = (raw12[6] + 2.0) / 2.5;
  return 0.025 * std::tanh(z0) + 0.015 * std::tanh(z6) - 0.004;
}

/// Control-arm visit probability.
inline double planted_base(std::span<const double> raw12) {
  double rest = 0.0;
  for (std::size_t i = 0; i < 12; ++i) {
    if (i != 0 && i != 6) rest += raw12[i];
  }
  const double s1 = 1.0 / (1.0 + std::exp(-(rest - 30.0) / 6.0));
  const double s2 = 1.0 / (1.0 + std::exp(-(raw12[0] - 20.0) / 4.0));
  return 0.06 + 0.02 * s1 + 0.01 * s2;
}

inline std::vector<double> draw_features(straq::Rng& rng) {
  std::vector<double> f(12);
  auto skew = [&](double lo, double range, double power) {
    return lo + range * std::pow(straq::uniform_real(rng, 0.0, 1.0), power);
  };
  f[0] = skew(12.0, 18.0, 1.6);
  f[1] = skew(9.9, 0.5, 1.2);
  f[2] = skew(8.0, 1.2, 2.0);
  f[3] = skew(2.0, 5.0, 1.3);
  f[4] = skew(10.0, 1.0, 1.5);
  f[5] = skew(3.6, 1.2, 1.8);
  f[6] = skew(-7.0, 12.0, 2.2);
  f[7] = skew(4.3, 2.0, 1.4);
  f[8] = skew(3.8, 0.4, 1.1);
  f[9] = skew(10.0, 8.0, 1.7);
  f[10] = skew(5.1, 0.6, 1.6);
  f[11] = skew(-0.2, 0.1, 1.2);
  return f;
}

/// Writes a full synthetic file: header plus n Bernoulli-outcome rows.
inline void write_synth_criteo(std::ostream& os, long n, std::uint64_t seed) {
  straq::Rng rng = straq::make_rng(seed);
  for (int i = 0; i < 12; ++i) os << "f" << i << ",";
  os << "treatment,visit\n";
  for (long r = 0; r < n; ++r) {
    const std::vector<double> f = draw_features(rng);
    const int w = straq::uniform_real(rng, 0.0, 1.0) < 0.85 ? 1 : 0;
    double p = planted_base(f) + (w == 1 ? planted_tau(f) : 0.0);
    p = std::min(std::max(p, 0.001), 0.999);
    const int y = straq::uniform_real(rng, 0.0, 1.0) < p ? 1 : 0;
    for (double v : f) os << straq::fmt_double(v) << ",";
    os << w << "," << y << "\n";
  }
}

/// In-memory version used by the acceptance suite (avoids reparsing 200k
/// rows): the same draws as write_synth_criteo for a given seed.
inline straq::Dataset make_synth_criteo(long n, std::uint64_t seed) {
  straq::Rng rng = straq::make_rng(seed);
  straq::Dataset d(12, 0.85);
  for (long r = 0; r < n; ++r) {
    const std::vector<double> f = draw_features(rng);
    const int w = straq::uniform_real(rng, 0.0, 1.0) < 0.85 ? 1 : 0;
    double p = planted_base(f) + (w == 1 ? planted_tau(f) : 0.0);
    p = std::min(std::max(p, 0.001), 0.999);
    const int y = straq::uniform_real(rng, 0.0, 1.0) < p ? 1 : 0;
    d.push_row(f, w, y);
  }
  return d;
}

}  // namespace straq_tests

#endif  // STRAQ_TESTS_SYNTH_CRITEO_HPP
