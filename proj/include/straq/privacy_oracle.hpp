/*
 * Copyright 2026 The straq Authors
 * License: Apache License 2.0
 */
#ifndef STRAQ_PRIVACY_ORACLE_HPP
#define STRAQ_PRIVACY_ORACLE_HPP

#include <cstdint>
#include <optional>
#include <ostream>
#include <random>
#include <stdexcept>
#include <vector>

#include "straq/data.hpp"
#include "straq/region.hpp"
#include "straq/rng.hpp"
#include "straq/textio.hpp"

namespace straq {

class BudgetExhaustedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PrivacyConfig {
  long query_budget = 1;
  double noise_scale = 0.0;      // numerator of the per-query noise sd
  long min_count = 0;            // cell-suppression threshold
  std::uint64_t seed = 0;
  bool disclose_affected_count = true;

  void validate() const {
    if (query_budget < 1) throw std::invalid_argument("query budget must be >= 1");
    if (noise_scale < 0.0) throw std::invalid_argument("noise scale must be >= 0");
    if (min_count < 0) throw std::invalid_argument("min_count must be >= 0");
  }
};

/// What the platform returns for one query. The raw (pre-noise) statistic is
/// computed transiently inside execute_query and never stored.
struct QueryRecord {
  Region region;
  std::optional<double> noisy_result;  // absent when suppressed
  double noise_sd = 0.0;
  long affected_count = 0;  // -1 when the platform hides counts
  long treated_count = 0;
  long control_count = 0;
  bool suppressed = false;
};

/// Platform-side query interface: answers difference-in-means queries over
/// regions with Gaussian noise of sd noise_scale / affected_count, enforces
/// the query budget and min-count suppression, and keeps an audit log.
/// A session is a mutable exclusive resource; distinct sessions are
/// independent (each owns its own seeded noise stream).
class QuerySession {
 public:
  QuerySession(const Dataset& dataset, PrivacyConfig config)
      : data_(&dataset), cfg_(config), noise_rng_(make_rng(config.seed)) {
    cfg_.validate();
    if (dataset.size() == 0) throw std::invalid_argument("dataset must be non-empty");
  }

  long remaining_budget() const { return cfg_.query_budget - used_; }
  long queries_used() const { return used_; }
  const PrivacyConfig& config() const { return cfg_; }
  const Dataset& dataset() const { return *data_; }
  const std::vector<QueryRecord>& audit_log() const { return audit_; }

  QueryRecord execute_query(const Region& region) {
    if (region.dim() != data_->dim()) {
      // Budget is not consumed on malformed queries.
      throw std::invalid_argument("query region dimension does not match dataset");
    }
    if (remaining_budget() <= 0) {
      throw BudgetExhaustedError("query budget exhausted");
    }

    double treated_sum = 0.0, control_sum = 0.0;
    long treated_n = 0, control_n = 0;
    for (std::size_t i = 0; i < data_->size(); ++i) {
      if (!region_contains(region, data_->row(i))) continue;
      if (data_->treatment(i) == 1) {
        treated_sum += data_->outcome(i);
        ++treated_n;
      } else {
        control_sum += data_->outcome(i);
        ++control_n;
      }
    }
    const long affected = treated_n + control_n;

    ++used_;
    const double z = standard_normal(noise_rng_);  // one draw per query

    QueryRecord rec;
    rec.region = region;
    rec.affected_count = affected;
    rec.treated_count = treated_n;
    rec.control_count = control_n;
    if (affected < cfg_.min_count || treated_n == 0 || control_n == 0) {
      rec.suppressed = true;
    } else {
      rec.noise_sd = cfg_.noise_scale / static_cast<double>(affected);
      const double diff =
          treated_sum / static_cast<double>(treated_n) -
          control_sum / static_cast<double>(control_n);
      rec.noisy_result = diff + rec.noise_sd * z;
    }
    audit_.push_back(rec);

    if (!cfg_.disclose_affected_count) {
      QueryRecord hidden = rec;
      hidden.affected_count = -1;
      hidden.treated_count = -1;
      hidden.control_count = -1;
      return hidden;
    }
    return rec;
  }

  /// One record per line: region bounds, noisy result (empty when
  /// suppressed), noise sd, affected count, suppressed flag.
  void write_audit_log(std::ostream& os) const {
    os << "# straq-schema v1 audit\n";
    const std::size_t dim = data_->dim();
    for (std::size_t d = 0; d < dim; ++d) os << "lo" << d << ",hi" << d << ",";
    os << "noisy_result,noise_sd,affected_count,suppressed\n";
    for (const auto& rec : audit_) {
      for (std::size_t d = 0; d < dim; ++d) {
        os << fmt_double(rec.region.lo(d)) << "," << fmt_double(rec.region.hi(d)) << ",";
      }
      if (rec.noisy_result) os << fmt_double(*rec.noisy_result);
      os << "," << fmt_double(rec.noise_sd) << "," << rec.affected_count << ","
         << (rec.suppressed ? 1 : 0) << "\n";
    }
  }

 private:
  const Dataset* data_;
  PrivacyConfig cfg_;
  long used_ = 0;
  Rng noise_rng_;
  std::vector<QueryRecord> audit_;
};

inline QuerySession open_session(const Dataset& dataset, const PrivacyConfig& config) {
  return QuerySession(dataset, config);
}

inline long remaining_budget(const QuerySession& session) {
  return session.remaining_budget();
}

}  // namespace straq

#endif  // STRAQ_PRIVACY_ORACLE_HPP
