/*
 * Copyright 2026 The straq Authors
 * License: Apache License 2.0
 */
#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <sstream>

#include "straq/privacy_oracle.hpp"
#include "straq/rng.hpp"

using straq::Dataset;
using straq::Interval;
using straq::PrivacyConfig;
using straq::QueryRecord;
using straq::QuerySession;
using straq::Region;

namespace {

Region seg(double lo, double hi) { return Region(std::vector<Interval>{{lo, hi}}); }

/// Toy dataset over one covariate in [0, 10]: integer outcomes so noiseless
/// results are exact ratios of integers.
Dataset toy_dataset() {
  Dataset d(1, 0.5);
  const std::vector<double> xs{1, 2, 3, 4, 5, 6, 7, 8, 9};
  const std::vector<int> ws{1, 0, 1, 0, 1, 0, 1, 0, 1};
  const std::vector<double> ys{1, 0, 0, 2, 3, 1, 5, 0, 2};
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const std::vector<double> row{xs[i]};
    d.push_row(row, ws[i], ys[i]);
  }
  return d;
}

double brute_force_diff(const Dataset& d, const Region& r) {
  double ts = 0.0, cs = 0.0;
  long tn = 0, cn = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (!straq::region_contains(r, d.row(i))) continue;
    if (d.treatment(i) == 1) {
      ts += d.outcome(i);
      ++tn;
    } else {
      cs += d.outcome(i);
      ++cn;
    }
  }
  return ts / static_cast<double>(tn) - cs / static_cast<double>(cn);
}

}  // namespace

TEST_CASE("open_session basics") {
  const Dataset d = toy_dataset();
  PrivacyConfig cfg;
  cfg.query_budget = 27;
  QuerySession s(d, cfg);
  CHECK(s.remaining_budget() == 27);
  CHECK(straq::remaining_budget(s) == 27);

  cfg.query_budget = 0;
  CHECK_THROWS_AS(QuerySession(d, cfg), std::invalid_argument);

  Dataset empty(1, 0.5);
  cfg.query_budget = 1;
  CHECK_THROWS_AS(QuerySession(empty, cfg), std::invalid_argument);
}

TEST_CASE("identical seeds give identical noise streams") {
  const Dataset d = toy_dataset();
  PrivacyConfig cfg;
  cfg.query_budget = 5;
  cfg.noise_scale = 3.0;
  cfg.seed = 77;
  QuerySession a(d, cfg), b(d, cfg);
  for (int i = 0; i < 5; ++i) {
    const auto ra = a.execute_query(seg(0, 10));
    const auto rb = b.execute_query(seg(0, 10));
    CHECK(*ra.noisy_result == *rb.noisy_result);
  }
}

TEST_CASE("noiseless query equals brute force bitwise") {
  const Dataset d = toy_dataset();
  PrivacyConfig cfg;
  cfg.query_budget = 10;
  cfg.noise_scale = 0.0;
  QuerySession s(d, cfg);

  // Treated outcomes {1, 0}, control outcomes {0} in [0.5, 3.5]:
  // mean difference 0.5 exactly.
  const auto rec = s.execute_query(seg(0.5, 3.5));
  CHECK(*rec.noisy_result == 0.5);

  for (const auto& r : {seg(0, 10), seg(2, 9), seg(1, 5)}) {
    const auto got = s.execute_query(r);
    CHECK(*got.noisy_result == brute_force_diff(d, r));
  }
}

TEST_CASE("noise sd follows scale / affected count") {
  Dataset d(1, 0.5);
  for (int i = 0; i < 500; ++i) {
    const std::vector<double> row{static_cast<double>(i % 10)};
    d.push_row(row, i % 2, 1.0);
  }
  PrivacyConfig cfg;
  cfg.query_budget = 1;
  cfg.noise_scale = 10.0;
  QuerySession s(d, cfg);
  const auto rec = s.execute_query(seg(-1, 11));
  CHECK(rec.affected_count == 500);
  CHECK(rec.noise_sd == Catch::Approx(0.02));
}

TEST_CASE("suppression consumes budget and hides the result") {
  // 19 rows inside the region, min_count = 20.
  Dataset d(1, 0.5);
  for (int i = 0; i < 19; ++i) {
    const std::vector<double> row{0.5};
    d.push_row(row, i % 2, 1.0);
  }
  const std::vector<double> far{9.0};
  d.push_row(far, 0, 0.0);
  d.push_row(far, 1, 0.0);

  PrivacyConfig cfg;
  cfg.query_budget = 3;
  cfg.min_count = 20;
  QuerySession s(d, cfg);
  const auto rec = s.execute_query(seg(0, 1));
  CHECK(rec.suppressed);
  CHECK_FALSE(rec.noisy_result.has_value());
  CHECK(s.remaining_budget() == 2);

  // A region whose only rows sit in one arm is suppressed too.
  Dataset single_arm(1, 0.5);
  for (int i = 0; i < 30; ++i) {
    const std::vector<double> row{1.0};
    single_arm.push_row(row, 1, 1.0);
  }
  PrivacyConfig cfg2;
  cfg2.query_budget = 1;
  QuerySession s2(single_arm, cfg2);
  const auto rec2 = s2.execute_query(seg(0, 2));
  CHECK(rec2.suppressed);
  CHECK(s2.remaining_budget() == 0);
}

TEST_CASE("budget accounting") {
  const Dataset d = toy_dataset();
  PrivacyConfig cfg;
  cfg.query_budget = 8;
  QuerySession s(d, cfg);
  CHECK(s.remaining_budget() == 8);
  s.execute_query(seg(0, 10));
  s.execute_query(seg(0, 5));
  CHECK(s.remaining_budget() == 6);
  CHECK(s.queries_used() == 2);

  for (int i = 0; i < 6; ++i) s.execute_query(seg(0, 10));
  CHECK(s.remaining_budget() == 0);
  CHECK_THROWS_AS(s.execute_query(seg(0, 10)), straq::BudgetExhaustedError);

  // Dimension mismatch is rejected without consuming budget.
  PrivacyConfig cfg2;
  cfg2.query_budget = 2;
  QuerySession s2(d, cfg2);
  const Region wrong(std::vector<Interval>{{0, 1}, {0, 1}});
  CHECK_THROWS_AS(s2.execute_query(wrong), std::invalid_argument);
  CHECK(s2.remaining_budget() == 2);
}

TEST_CASE("noise is unbiased with the right spread") {
  const Dataset d = toy_dataset();
  const Region r = seg(0, 10);
  const double exact = brute_force_diff(d, r);

  const double scale = 18.0;
  const double noise_sd = scale / 9.0;
  std::vector<double> noise;
  for (std::uint64_t seed = 0; seed < 10000; ++seed) {
    PrivacyConfig cfg;
    cfg.query_budget = 1;
    cfg.noise_scale = scale;
    cfg.seed = seed;
    QuerySession s(d, cfg);
    noise.push_back(*s.execute_query(r).noisy_result - exact);
  }
  double mean = 0.0;
  for (double n : noise) mean += n;
  mean /= static_cast<double>(noise.size());
  double var = 0.0;
  for (double n : noise) var += (n - mean) * (n - mean);
  var /= static_cast<double>(noise.size() - 1);

  CHECK(std::abs(mean) <= 3.0 * noise_sd / 100.0);
  CHECK(std::sqrt(var) == Catch::Approx(noise_sd).epsilon(0.05));
}

TEST_CASE("audit log export") {
  const Dataset d = toy_dataset();
  PrivacyConfig cfg;
  cfg.query_budget = 2;
  cfg.noise_scale = 0.0;
  cfg.min_count = 100;  // force suppression on the second query
  QuerySession s(d, cfg);
  cfg.min_count = 0;

  PrivacyConfig open_cfg;
  open_cfg.query_budget = 2;
  QuerySession s2(d, open_cfg);
  s2.execute_query(seg(0, 10));
  s.execute_query(seg(0, 10));

  std::ostringstream os;
  s.write_audit_log(os);
  const std::string text = os.str();
  CHECK(text.rfind("# straq-schema v1 audit", 0) == 0);
  CHECK(text.find("lo0,hi0,noisy_result,noise_sd,affected_count,suppressed") !=
        std::string::npos);
  CHECK(text.find(",9,1\n") != std::string::npos);  // suppressed row, empty result
  CHECK(s.audit_log().size() == 1);
}

TEST_CASE("count disclosure can be hidden") {
  const Dataset d = toy_dataset();
  PrivacyConfig cfg;
  cfg.query_budget = 1;
  cfg.disclose_affected_count = false;
  QuerySession s(d, cfg);
  const auto rec = s.execute_query(seg(0, 10));
  CHECK(rec.affected_count == -1);
  CHECK(rec.treated_count == -1);
  CHECK(rec.noisy_result.has_value());
  // The platform-side audit keeps the true counts.
  CHECK(s.audit_log().front().affected_count == 9);
}
