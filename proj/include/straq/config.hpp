/*
 * Copyright 2026 The straq Authors
 * License: Apache License 2.0
 */
#ifndef STRAQ_CONFIG_HPP
#define STRAQ_CONFIG_HPP

#include <cstdint>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "straq/acquisition.hpp"
#include "straq/ingest.hpp"
#include "straq/synth_dgp.hpp"

namespace straq {

inline AFFamily parse_family(const std::string& name) {
  if (name == "taaf") return AFFamily::taaf;
  if (name == "variance_mi") return AFFamily::variance_mi;
  if (name == "regret") return AFFamily::regret;
  if (name == "pure_variance") return AFFamily::pure_variance;
  if (name == "pure_abs_mean") return AFFamily::pure_abs_mean;
  if (name == "log_weighted") return AFFamily::log_weighted;
  if (name == "area_weighted") return AFFamily::area_weighted;
  if (name == "ratio") return AFFamily::ratio;
  if (name == "full_posterior") return AFFamily::full_posterior;
  throw std::invalid_argument("unknown acquisition family: " + name);
}

inline SizeMode parse_size_mode(const std::string& name) {
  if (name == "none") return SizeMode::none;
  if (name == "penalty") return SizeMode::penalty;
  if (name == "constraint") return SizeMode::constraint;
  if (name == "penalty_constraint" || name == "penalty_and_constraint") {
    return SizeMode::penalty_and_constraint;
  }
  throw std::invalid_argument("unknown size mode: " + name);
}

/// Method strings are "uniform" or "<family>:<size_mode>".
inline MethodSpec parse_method(const std::string& spec, const AFConfig& base) {
  MethodSpec m;
  m.id = spec;
  if (spec == "uniform") {
    m.is_uniform = true;
    return m;
  }
  const auto colon = spec.find(':');
  const std::string family = colon == std::string::npos ? spec : spec.substr(0, colon);
  const std::string size = colon == std::string::npos ? "none" : spec.substr(colon + 1);
  m.af = base;
  m.af.family = parse_family(family);
  m.af.size_mode = parse_size_mode(size);
  return m;
}

struct SimulateConfig {
  std::vector<double> amplitudes{5.0};
  std::vector<double> lengthscales{10.0, 30.0};
  std::vector<long> query_budgets{8, 27, 64};
  std::vector<double> noise_scales{1.0, 10.0};
  int repeats = 30;
  std::vector<std::string> methods{"uniform", "taaf:none", "taaf:constraint",
                                   "taaf:penalty_constraint", "regret:none"};
  long population_size = 5000;
  int grid_resolution = 20;
  double cost = 0.0;
  long min_count = 0;
  int eval_resolution = 10;
  bool use_mle = false;
  double dominance_threshold = 0.95;
  AFConfig af_base;  // beta, tau, candidate_count, top_k, fractions

  /// The full 144-setting factorial with the three pooled families.
  void apply_full_grid() {
    amplitudes = {2.0, 5.0, 10.0};
    lengthscales = {10.0, 30.0, 50.0};
    query_budgets = {8, 27, 64, 125};
    noise_scales = {0.1, 1.0, 10.0, 100.0};
    repeats = 100;
    methods = {"uniform"};
    for (const std::string fam : {"taaf", "variance_mi", "regret"}) {
      for (const std::string size : {"none", "penalty", "constraint", "penalty_constraint"}) {
        methods.push_back(fam + ":" + size);
      }
    }
  }
};

struct QueryPrivacySetting {
  long query_budget = 27;
  double noise_scale = 0.01;
};

struct QueryConfig {
  std::string dataset_path;
  CsvSchema schema;
  std::vector<std::string> collapse_keep;  // feature names kept as-is
  bool collapse_sum_rest = true;
  int bootstraps = 20;
  std::size_t train_size = 50000;
  std::size_t eval_size = 50000;
  std::vector<QueryPrivacySetting> privacy{{27, 0.01}, {27, 0.1}, {64, 0.01}, {64, 0.1}};
  long min_count = 20;
  double cost = 0.01;
  bool paper_literal_ipw = false;
  bool write_policies = true;
  bool write_audits = true;
  int eval_resolution = 10;
  // Strategic preset: TAAF, no size treatment, forbidden exact repeats,
  // top-5 randomized pick, decaying beta, MLE from step 10.
  AFConfig af;
  int activation_step = 10;
  int fit_restarts = 5;
  std::optional<double> external_baseline;  // reference lift per privacy setting

  QueryConfig() {
    af.family = AFFamily::taaf;
    af.size_mode = SizeMode::none;
    af.beta = 3.0;
    af.beta_schedule = BetaSchedule::linear_decay;
    af.beta_decay_slope = 0.01;
    af.top_k = 5;
    af.forbid_exact_repeats = true;
    af.variance_scale = VarianceScale::volume_weighted;
  }
};

struct EvaluateConfig {
  std::string policy_path;
  std::string dataset_path;
  CsvSchema schema;
  double cost = 0.0;
  bool paper_literal_ipw = false;
};

struct ReportConfig {
  std::vector<std::string> results_paths;
  std::string dominance_path;
};

struct RunConfig {
  std::string mode = "simulate";
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  int parallelism = 1;
  SimulateConfig simulate;
  QueryConfig query;
  EvaluateConfig evaluate;
  ReportConfig report;
};

namespace detail {

inline void parse_af_block(const nlohmann::json& j, AFConfig& af) {
  if (j.contains("beta")) af.beta = j["beta"].get<double>();
  if (j.contains("beta_schedule")) {
    const std::string s = j["beta_schedule"].get<std::string>();
    if (s == "fixed") {
      af.beta_schedule = BetaSchedule::fixed;
    } else if (s == "linear_decay") {
      af.beta_schedule = BetaSchedule::linear_decay;
    } else {
      throw std::invalid_argument("unknown beta schedule: " + s);
    }
  }
  if (j.contains("beta_decay_slope")) af.beta_decay_slope = j["beta_decay_slope"].get<double>();
  if (j.contains("tau")) af.tau = j["tau"].get<double>();
  if (j.contains("variance_scale")) {
    const std::string s = j["variance_scale"].get<std::string>();
    if (s == "average") {
      af.variance_scale = VarianceScale::average;
    } else if (s == "volume_weighted") {
      af.variance_scale = VarianceScale::volume_weighted;
    } else {
      throw std::invalid_argument("unknown variance scale: " + s);
    }
  }
  if (j.contains("penalty_weight")) af.penalty_weight = j["penalty_weight"].get<double>();
  if (j.contains("f_min")) af.f_min = j["f_min"].get<double>();
  if (j.contains("f_max")) af.f_max = j["f_max"].get<double>();
  if (j.contains("top_k")) af.top_k = j["top_k"].get<int>();
  if (j.contains("candidate_count")) af.candidate_count = j["candidate_count"].get<int>();
  if (j.contains("forbid_exact_repeats")) {
    af.forbid_exact_repeats = j["forbid_exact_repeats"].get<bool>();
  }
  if (j.contains("full_posterior_samples")) {
    af.full_posterior_samples = j["full_posterior_samples"].get<int>();
  }
  if (j.contains("full_posterior_candidates")) {
    af.full_posterior_candidates = j["full_posterior_candidates"].get<int>();
  }
}

inline CsvSchema parse_schema(const nlohmann::json& j) {
  CsvSchema s;
  s.feature_columns = j.at("features").get<std::vector<std::string>>();
  s.treatment_column = j.at("treatment").get<std::string>();
  s.outcome_column = j.at("outcome").get<std::string>();
  if (j.contains("propensity")) s.propensity = j["propensity"].get<double>();
  return s;
}

}  // namespace detail

inline RunConfig parse_config(const nlohmann::json& j) {
  RunConfig cfg;
  cfg.mode = j.value("mode", cfg.mode);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.out_dir = j.value("out", cfg.out_dir);
  cfg.parallelism = j.value("parallelism", cfg.parallelism);

  if (j.contains("simulate")) {
    const auto& s = j["simulate"];
    auto& sc = cfg.simulate;
    if (s.contains("amplitudes")) sc.amplitudes = s["amplitudes"].get<std::vector<double>>();
    if (s.contains("lengthscales")) {
      sc.lengthscales = s["lengthscales"].get<std::vector<double>>();
    }
    if (s.contains("query_budgets")) {
      sc.query_budgets = s["query_budgets"].get<std::vector<long>>();
    }
    if (s.contains("noise_scales")) sc.noise_scales = s["noise_scales"].get<std::vector<double>>();
    if (s.contains("repeats")) sc.repeats = s["repeats"].get<int>();
    if (s.contains("methods")) sc.methods = s["methods"].get<std::vector<std::string>>();
    if (s.contains("population_size")) sc.population_size = s["population_size"].get<long>();
    if (s.contains("grid_resolution")) sc.grid_resolution = s["grid_resolution"].get<int>();
    if (s.contains("cost")) sc.cost = s["cost"].get<double>();
    if (s.contains("min_count")) sc.min_count = s["min_count"].get<long>();
    if (s.contains("eval_resolution")) sc.eval_resolution = s["eval_resolution"].get<int>();
    if (s.contains("use_mle")) sc.use_mle = s["use_mle"].get<bool>();
    if (s.contains("dominance_threshold")) {
      sc.dominance_threshold = s["dominance_threshold"].get<double>();
    }
    detail::parse_af_block(s, sc.af_base);
  }

  if (j.contains("query")) {
    const auto& q = j["query"];
    auto& qc = cfg.query;
    qc.dataset_path = q.at("dataset").get<std::string>();
    qc.schema = detail::parse_schema(q.at("schema"));
    if (q.contains("collapse")) {
      qc.collapse_keep = q["collapse"].value("keep", qc.collapse_keep);
      qc.collapse_sum_rest = q["collapse"].value("sum_rest", qc.collapse_sum_rest);
    }
    if (q.contains("bootstraps")) qc.bootstraps = q["bootstraps"].get<int>();
    if (q.contains("train_size")) qc.train_size = q["train_size"].get<std::size_t>();
    if (q.contains("eval_size")) qc.eval_size = q["eval_size"].get<std::size_t>();
    if (q.contains("privacy")) {
      qc.privacy.clear();
      for (const auto& p : q["privacy"]) {
        qc.privacy.push_back(QueryPrivacySetting{p.at("query_budget").get<long>(),
                                                 p.at("noise_scale").get<double>()});
      }
    }
    if (q.contains("min_count")) qc.min_count = q["min_count"].get<long>();
    if (q.contains("cost")) qc.cost = q["cost"].get<double>();
    if (q.contains("paper_literal_ipw")) {
      qc.paper_literal_ipw = q["paper_literal_ipw"].get<bool>();
    }
    if (q.contains("write_policies")) qc.write_policies = q["write_policies"].get<bool>();
    if (q.contains("write_audits")) qc.write_audits = q["write_audits"].get<bool>();
    if (q.contains("eval_resolution")) qc.eval_resolution = q["eval_resolution"].get<int>();
    if (q.contains("activation_step")) qc.activation_step = q["activation_step"].get<int>();
    if (q.contains("fit_restarts")) qc.fit_restarts = q["fit_restarts"].get<int>();
    if (q.contains("external_baseline")) {
      qc.external_baseline = q["external_baseline"].get<double>();
    }
    if (q.contains("strategic")) detail::parse_af_block(q["strategic"], qc.af);
  }

  if (j.contains("evaluate")) {
    const auto& e = j["evaluate"];
    cfg.evaluate.policy_path = e.at("policy").get<std::string>();
    cfg.evaluate.dataset_path = e.at("dataset").get<std::string>();
    cfg.evaluate.schema = detail::parse_schema(e.at("schema"));
    cfg.evaluate.cost = e.value("cost", 0.0);
    cfg.evaluate.paper_literal_ipw = e.value("paper_literal_ipw", false);
  }

  if (j.contains("report")) {
    const auto& r = j["report"];
    if (r.contains("results")) {
      cfg.report.results_paths = r["results"].get<std::vector<std::string>>();
    }
    if (r.contains("dominance")) cfg.report.dominance_path = r["dominance"].get<std::string>();
  }

  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  nlohmann::json j;
  in >> j;
  return parse_config(j);
}

}  // namespace straq

#endif  // STRAQ_CONFIG_HPP
