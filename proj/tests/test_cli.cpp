/*
 * Copyright 2026 The straq Authors
 * License: Apache License 2.0
 */
#include <catch2/catch_amalgamated.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "straq/config.hpp"
#include "straq/ingest.hpp"
#include "straq/pipeline.hpp"
#include "support/synth_criteo.hpp"

using straq::CsvSchema;
using straq::Dataset;

namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("straq_test_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

CsvSchema tiny_schema() {
  CsvSchema s;
  s.feature_columns = {"f0", "f1", "f2"};
  s.treatment_column = "treatment";
  s.outcome_column = "visit";
  s.propensity = 0.85;
  return s;
}

}  // namespace

TEST_CASE("ingest_csv") {
  const CsvSchema schema = tiny_schema();

  SECTION("well-formed file") {
    std::istringstream in(
        "f0,f1,f2,treatment,visit\n"
        "1.5,2,3,1,1\n"
        "0.25,-1,4.5,0,0\n"
        "2,0,0,1,0\n");
    const Dataset d = straq::ingest_csv_stream(in, schema);
    REQUIRE(d.size() == 3);
    CHECK(d.dim() == 3);
    CHECK(d.propensity() == 0.85);
    CHECK(d.row(0)[0] == 1.5);
    CHECK(d.treatment(1) == 0);
    CHECK(d.outcome(2) == 0.0);
  }

  SECTION("non-binary treatment is rejected with the line number") {
    std::istringstream in(
        "f0,f1,f2,treatment,visit\n"
        "1,2,3,1,1\n"
        "1,2,3,0,1\n"
        "1,2,3,1,0\n"
        "1,2,3,2,0\n");
    try {
      straq::ingest_csv_stream(in, schema);
      FAIL("expected rejection");
    } catch (const std::runtime_error& ex) {
      CHECK(std::string(ex.what()).find("line 5") != std::string::npos);
    }
  }

  SECTION("missing column") {
    std::istringstream in("f0,f1,treatment,visit\n1,2,1,1\n");
    CHECK_THROWS_WITH(straq::ingest_csv_stream(in, schema),
                      Catch::Matchers::ContainsSubstring("f2"));
  }

  SECTION("round trip preserves values exactly") {
    std::istringstream in(
        "f0,f1,f2,treatment,visit\n"
        "0.1,2.30000000000000004,-7,1,0.5\n"
        "1e-12,3.14159265358979,2,0,1\n");
    const Dataset d = straq::ingest_csv_stream(in, schema);
    std::ostringstream out;
    straq::write_csv(d, schema, out);
    std::istringstream in2(out.str());
    const Dataset d2 = straq::ingest_csv_stream(in2, schema);
    REQUIRE(d2.size() == d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
      for (std::size_t j = 0; j < d.dim(); ++j) CHECK(d2.row(i)[j] == d.row(i)[j]);
      CHECK(d2.treatment(i) == d.treatment(i));
      CHECK(d2.outcome(i) == d.outcome(i));
    }
  }
}

TEST_CASE("collapse_features") {
  Dataset d(12, 0.85);
  std::vector<double> row(12);
  for (int i = 0; i < 12; ++i) row[static_cast<std::size_t>(i)] = i + 0.5;
  d.push_row(row, 1, 1.0);

  SECTION("keep two, sum the rest") {
    const Dataset out = straq::collapse_features(d, {0, 6}, true);
    REQUIRE(out.dim() == 3);
    CHECK(out.row(0)[0] == 0.5);
    CHECK(out.row(0)[1] == 6.5);
    double rest = 0.0;
    for (int i = 0; i < 12; ++i) {
      if (i != 0 && i != 6) rest += i + 0.5;
    }
    CHECK(out.row(0)[2] == Catch::Approx(rest));
  }

  SECTION("keep all without summing is the identity") {
    std::vector<std::size_t> all;
    for (std::size_t i = 0; i < 12; ++i) all.push_back(i);
    const Dataset out = straq::collapse_features(d, all, false);
    REQUIRE(out.dim() == 12);
    for (std::size_t i = 0; i < 12; ++i) CHECK(out.row(0)[i] == d.row(0)[i]);
  }

  SECTION("empty keep without sum_rest is an error") {
    CHECK_THROWS_AS(straq::collapse_features(d, {}, false), std::invalid_argument);
  }
}

TEST_CASE("config parsing") {
  const auto j = nlohmann::json::parse(R"({
    "mode": "simulate",
    "seed": 99,
    "out": "artifacts",
    "parallelism": 2,
    "simulate": {
      "amplitudes": [5],
      "lengthscales": [30],
      "query_budgets": [8],
      "noise_scales": [1],
      "repeats": 2,
      "methods": ["uniform", "taaf:penalty_constraint"],
      "population_size": 300,
      "grid_resolution": 6,
      "candidate_count": 50
    }
  })");
  const straq::RunConfig cfg = straq::parse_config(j);
  CHECK(cfg.seed == 99);
  CHECK(cfg.out_dir == "artifacts");
  CHECK(cfg.simulate.repeats == 2);
  CHECK(cfg.simulate.af_base.candidate_count == 50);
  const auto methods = straq::build_methods(cfg.simulate);
  REQUIRE(methods.size() == 2);
  CHECK(methods[0].is_uniform);
  CHECK(methods[1].af.size_mode == straq::SizeMode::penalty_and_constraint);
  CHECK_THROWS(straq::parse_method("bogus:none", cfg.simulate.af_base));
}

TEST_CASE("cmd_simulate writes deterministic artifacts") {
  TempDir tmp;
  straq::RunConfig cfg;
  cfg.seed = 5;
  cfg.parallelism = 2;
  cfg.simulate.amplitudes = {5.0};
  cfg.simulate.lengthscales = {30.0};
  cfg.simulate.query_budgets = {8};
  cfg.simulate.noise_scales = {1.0};
  cfg.simulate.repeats = 2;
  cfg.simulate.methods = {"uniform", "taaf:penalty_constraint"};
  cfg.simulate.population_size = 400;
  cfg.simulate.grid_resolution = 6;
  cfg.simulate.eval_resolution = 5;
  cfg.simulate.af_base.candidate_count = 60;

  cfg.out_dir = (tmp.path / "run1").string();
  const auto first = straq::cmd_simulate(cfg);
  REQUIRE(first.results.rows.size() == 4);
  CHECK(fs::exists(tmp.path / "run1" / "results.csv"));
  CHECK(fs::exists(tmp.path / "run1" / "dominance.csv"));
  CHECK(fs::exists(tmp.path / "run1" / "method_summary.csv"));
  CHECK(fs::exists(tmp.path / "run1" / "summary_by_lengthscale.csv"));
  CHECK(fs::exists(tmp.path / "run1" / "charts" / "by_query_budget.svg"));

  cfg.out_dir = (tmp.path / "run2").string();
  straq::cmd_simulate(cfg);
  CHECK(straq::read_file((tmp.path / "run1" / "results.csv").string()) ==
        straq::read_file((tmp.path / "run2" / "results.csv").string()));
}

TEST_CASE("cmd_query end to end on a small synthetic file") {
  TempDir tmp;
  const fs::path csv = tmp.path / "uplift.csv";
  {
    std::ofstream out(csv);
    straq_tests::write_synth_criteo(out, 4000, 99);
  }

  straq::RunConfig cfg;
  cfg.seed = 31;
  cfg.parallelism = 2;
  cfg.out_dir = (tmp.path / "q1").string();
  cfg.query.dataset_path = csv.string();
  cfg.query.schema = straq_tests::synth_criteo_schema();
  cfg.query.collapse_keep = {"f0", "f6"};
  cfg.query.collapse_sum_rest = true;
  cfg.query.bootstraps = 2;
  cfg.query.train_size = 1500;
  cfg.query.eval_size = 1500;
  cfg.query.privacy = {{27, 0.01}};
  cfg.query.min_count = 20;
  cfg.query.cost = 0.01;
  cfg.query.af.candidate_count = 150;
  cfg.query.eval_resolution = 6;

  const auto artifacts = straq::cmd_query(cfg);
  REQUIRE(artifacts.rows.size() == 4);  // 2 bootstraps x 1 setting x 2 methods
  for (const auto& row : artifacts.rows) {
    CHECK(row.performed_queries > 0);
    CHECK(row.performed_queries <= 27);
    CHECK(std::isfinite(row.lift));
  }
  CHECK(fs::exists(tmp.path / "q1" / "reports.csv"));
  CHECK(fs::exists(tmp.path / "q1" / "summary.csv"));
  CHECK(fs::exists(tmp.path / "q1" / "policies"));
  CHECK(fs::exists(tmp.path / "q1" / "audits"));

  // Determinism: the same seeds give byte-identical reports.
  cfg.out_dir = (tmp.path / "q2").string();
  straq::cmd_query(cfg);
  CHECK(straq::read_file((tmp.path / "q1" / "reports.csv").string()) ==
        straq::read_file((tmp.path / "q2" / "reports.csv").string()));
}

TEST_CASE("cmd_evaluate reads a policy file and scores it") {
  TempDir tmp;
  const fs::path csv = tmp.path / "uplift.csv";
  {
    std::ofstream out(csv);
    straq_tests::write_synth_criteo(out, 2000, 7);
  }
  // A blanket policy over the raw 12-feature space.
  const fs::path policy_path = tmp.path / "all_treat.policy";
  {
    straq::Bounds b = straq::Bounds::cube(-1e6, 1e6, 12);
    straq::TargetingPolicy policy(b, std::vector<int>(12, 1),
                                  {straq::Action::treat});
    std::ofstream out(policy_path);
    policy.write(out);
  }
  straq::RunConfig cfg;
  cfg.out_dir = (tmp.path / "eval").string();
  cfg.evaluate.policy_path = policy_path.string();
  cfg.evaluate.dataset_path = csv.string();
  cfg.evaluate.schema = straq_tests::synth_criteo_schema();
  cfg.evaluate.cost = 0.01;
  const auto rep = straq::cmd_evaluate(cfg);
  CHECK(rep.policy_value == Catch::Approx(rep.treat_all_value));
  CHECK(rep.lift == Catch::Approx(0.0).margin(1e-12));
  CHECK(fs::exists(tmp.path / "eval" / "evaluation.csv"));
}

TEST_CASE("cmd_report summarizes results and renders dominance") {
  TempDir tmp;
  straq::RunConfig sim;
  sim.seed = 5;
  sim.parallelism = 2;
  sim.simulate.amplitudes = {5.0};
  sim.simulate.lengthscales = {30.0};
  sim.simulate.query_budgets = {8};
  sim.simulate.noise_scales = {1.0};
  sim.simulate.repeats = 2;
  sim.simulate.methods = {"uniform", "taaf:constraint"};
  sim.simulate.population_size = 300;
  sim.simulate.grid_resolution = 6;
  sim.simulate.eval_resolution = 4;
  sim.simulate.af_base.candidate_count = 50;
  sim.out_dir = (tmp.path / "sim").string();
  straq::cmd_simulate(sim);

  straq::RunConfig rep;
  rep.out_dir = (tmp.path / "rep").string();
  rep.report.results_paths = {(tmp.path / "sim" / "results.csv").string()};
  rep.report.dominance_path = (tmp.path / "sim" / "dominance.csv").string();
  straq::cmd_report(rep);
  CHECK(fs::exists(tmp.path / "rep" / "method_summary.csv"));
  CHECK(fs::exists(tmp.path / "rep" / "charts" / "dominance.svg"));

  // An empty results set is an error and writes nothing.
  straq::RunConfig bad;
  bad.out_dir = (tmp.path / "bad").string();
  bad.report.results_paths = {(tmp.path / "missing.csv").string()};
  CHECK_THROWS(straq::cmd_report(bad));
  CHECK_FALSE(fs::exists(tmp.path / "bad" / "method_summary.csv"));
}
