/*
 * Copyright 2026 The straq Authors
 * License: Apache License 2.0
 */
#ifndef STRAQ_PIPELINE_HPP
#define STRAQ_PIPELINE_HPP

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "straq/config.hpp"
#include "straq/ingest.hpp"
#include "straq/parallel.hpp"
#include "straq/policy_eval.hpp"
#include "straq/report.hpp"
#include "straq/strategies.hpp"
#include "straq/synth_dgp.hpp"

namespace straq {

namespace detail {
inline void ensure_dir(const std::filesystem::path& p) {
  std::error_code ec;
  std::filesystem::create_directories(p, ec);
  if (ec) throw std::runtime_error("cannot create directory: " + p.string());
}
}  // namespace detail

//===----------------------------------------------------------------------===//
// simulate
//===----------------------------------------------------------------------===//

inline std::vector<ExperimentSetting> build_settings(const SimulateConfig& sc) {
  std::vector<ExperimentSetting> settings;
  for (double amp : sc.amplitudes) {
    for (double len : sc.lengthscales) {
      for (long q : sc.query_budgets) {
        for (double s : sc.noise_scales) {
          ExperimentSetting setting;
          setting.id = setting_id(SettingParams{amp, len, q, s});
          setting.dgp.amplitude = amp;
          setting.dgp.lengthscale = len;
          setting.dgp.grid_resolution = sc.grid_resolution;
          setting.dgp.population_size = sc.population_size;
          setting.query_budget = q;
          setting.noise_scale = s;
          setting.min_count = sc.min_count;
          setting.cost = sc.cost;
          setting.eval_resolution = sc.eval_resolution;
          settings.push_back(std::move(setting));
        }
      }
    }
  }
  return settings;
}

inline std::vector<MethodSpec> build_methods(const SimulateConfig& sc) {
  std::vector<MethodSpec> methods;
  for (const auto& m : sc.methods) {
    MethodSpec spec = parse_method(m, sc.af_base);
    spec.use_mle = sc.use_mle;
    methods.push_back(std::move(spec));
  }
  return methods;
}

struct SimulateArtifacts {
  ResultsTable results;
  std::optional<DominanceMatrix> dominance;
};

/// Runs the experiment grid and writes the results table, dominance matrix,
/// per-parameter summaries and charts under `out_dir`.
inline SimulateArtifacts cmd_simulate(const RunConfig& cfg) {
  const auto settings = build_settings(cfg.simulate);
  const auto methods = build_methods(cfg.simulate);
  SimulateArtifacts artifacts;
  artifacts.results =
      run_settings(settings, methods, cfg.simulate.repeats, cfg.seed, cfg.parallelism);

  const std::filesystem::path out(cfg.out_dir);
  detail::ensure_dir(out);
  detail::ensure_dir(out / "charts");

  {
    std::ostringstream os;
    write_results(artifacts.results, os);
    write_file((out / "results.csv").string(), os.str());
  }
  try {
    artifacts.dominance =
        dominance_matrix(artifacts.results, cfg.simulate.dominance_threshold);
    std::ostringstream os;
    write_dominance(*artifacts.dominance, os);
    write_file((out / "dominance.csv").string(), os.str());
    write_file((out / "charts" / "dominance.svg").string(),
               render_dominance_svg(*artifacts.dominance));
  } catch (const std::exception&) {
    // Failed runs leave the table unbalanced; results.csv still records them.
  }
  {
    std::ostringstream os;
    write_method_summary(artifacts.results, os);
    write_file((out / "method_summary.csv").string(), os.str());
  }
  for (const std::string param :
       {"amplitude", "lengthscale", "query_budget", "noise_scale"}) {
    std::ostringstream csv;
    std::string svg;
    write_parameter_summary(artifacts.results, param, csv, &svg);
    write_file((out / ("summary_by_" + param + ".csv")).string(), csv.str());
    write_file((out / "charts" / ("by_" + param + ".svg")).string(), svg);
  }
  return artifacts;
}

//===----------------------------------------------------------------------===//
// query (empirical pipeline)
//===----------------------------------------------------------------------===//

struct QueryRunRow {
  int bootstrap = 0;
  long query_budget = 0;
  double noise_scale = 0.0;
  std::string method_id;
  double ipw_value = 0.0;
  double ipw_se = 0.0;
  double treat_all_value = 0.0;
  double control_all_value = 0.0;
  double lift = 0.0;
  long performed_queries = 0;
};

struct QueryArtifacts {
  std::vector<QueryRunRow> rows;
};

inline void write_query_rows(const std::vector<QueryRunRow>& rows, std::ostream& os) {
  os << "# straq-schema v1 query-reports\n";
  os << "bootstrap,query_budget,noise_scale,method_id,ipw_value,ipw_se,treat_all_value,"
        "control_all_value,lift_vs_treat_all,performed_queries\n";
  for (const auto& r : rows) {
    os << r.bootstrap << "," << r.query_budget << "," << fmt_g(r.noise_scale) << ","
       << r.method_id << "," << fmt_double(r.ipw_value) << "," << fmt_double(r.ipw_se)
       << "," << fmt_double(r.treat_all_value) << "," << fmt_double(r.control_all_value)
       << "," << fmt_double(r.lift) << "," << r.performed_queries << "\n";
  }
}

inline void write_query_summary(const std::vector<QueryRunRow>& rows,
                                const std::optional<double>& external_baseline,
                                std::ostream& os) {
  std::map<std::pair<long, double>, std::map<std::string, std::vector<const QueryRunRow*>>>
      grouped;
  for (const auto& r : rows) {
    grouped[{r.query_budget, r.noise_scale}][r.method_id].push_back(&r);
  }
  os << "# straq-schema v1 query-summary\n";
  os << "query_budget,noise_scale,method_id,repeats,mean_lift,lift_ci_lo,lift_ci_hi,"
        "mean_ratio_vs_uniform,ratio_uniform_ci_lo,ratio_uniform_ci_hi,"
        "mean_ratio_vs_external,ratio_external_ci_lo,ratio_external_ci_hi,"
        "mean_performed_queries\n";
  for (const auto& [setting, per_method] : grouped) {
    std::vector<double> uniform_lifts;
    if (per_method.count("uniform")) {
      for (const auto* r : per_method.at("uniform")) uniform_lifts.push_back(r->lift);
    }
    for (const auto& [method, rws] : per_method) {
      std::vector<double> lifts, performed;
      for (const auto* r : rws) {
        lifts.push_back(r->lift);
        performed.push_back(static_cast<double>(r->performed_queries));
      }
      const MeanCi lift_ci = mean_ci(lifts);
      os << setting.first << "," << fmt_g(setting.second) << "," << method << ","
         << lifts.size() << "," << fmt_double(lift_ci.mean) << ","
         << fmt_double(lift_ci.ci_lo) << "," << fmt_double(lift_ci.ci_hi) << ",";
      if (method != "uniform" && uniform_lifts.size() == lifts.size() &&
          !uniform_lifts.empty()) {
        const RatioSummary rs = ratio_summary(lifts, uniform_lifts);
        os << fmt_double(rs.mean) << "," << fmt_double(rs.ci_lo) << ","
           << fmt_double(rs.ci_hi) << ",";
      } else {
        os << ",,,";
      }
      if (external_baseline) {
        const std::vector<double> denom(lifts.size(), *external_baseline);
        const RatioSummary rs = ratio_summary(lifts, denom);
        os << fmt_double(rs.mean) << "," << fmt_double(rs.ci_lo) << ","
           << fmt_double(rs.ci_hi) << ",";
      } else {
        os << ",,,";
      }
      os << fmt_double(mean_ci(performed).mean) << "\n";
    }
  }
}

/// The empirical pipeline: ingest, collapse, standardize, bootstrap train and
/// evaluation samples, run uniform querying (whose non-suppressed query count
/// sets the strategic budget), run strategic querying, evaluate both by IPW.
inline QueryArtifacts cmd_query(const RunConfig& cfg) {
  const QueryConfig& qc = cfg.query;
  if (qc.dataset_path.empty()) throw std::invalid_argument("query mode needs a dataset");
  if (qc.bootstraps < 1) throw std::invalid_argument("bootstraps must be >= 1");

  const Dataset full = ingest_csv(qc.dataset_path, qc.schema);
  std::vector<std::size_t> keep_idx;
  for (const auto& name : qc.collapse_keep) {
    const auto it = std::find(qc.schema.feature_columns.begin(),
                              qc.schema.feature_columns.end(), name);
    if (it == qc.schema.feature_columns.end()) {
      throw std::invalid_argument("collapse keep column not in schema: " + name);
    }
    keep_idx.push_back(
        static_cast<std::size_t>(it - qc.schema.feature_columns.begin()));
  }
  const Dataset collapsed =
      keep_idx.empty() && !qc.collapse_sum_rest
          ? full
          : collapse_features(full, keep_idx, qc.collapse_sum_rest);

  const Standardizer stdz = Standardizer::fit(collapsed);
  const AffineMap map = stdz.map();
  const Bounds bounds = stdz.client_bounds(collapsed);
  const std::size_t dim = collapsed.dim();

  const std::filesystem::path out(cfg.out_dir);
  detail::ensure_dir(out);
  if (qc.write_policies) detail::ensure_dir(out / "policies");
  if (qc.write_audits) detail::ensure_dir(out / "audits");

  QueryArtifacts artifacts;
  const std::size_t per_bootstrap = qc.privacy.size() * 2;
  artifacts.rows.resize(static_cast<std::size_t>(qc.bootstraps) * per_bootstrap);

  struct FileOut {
    std::string path;
    std::string content;
  };
  std::vector<std::vector<FileOut>> files(static_cast<std::size_t>(qc.bootstraps));

  parallel_for(static_cast<std::size_t>(qc.bootstraps), cfg.parallelism, [&](std::size_t b) {
    const Dataset train =
        bootstrap_sample(collapsed, qc.train_size, derive_seed(cfg.seed, {10, b}));
    const Dataset eval =
        bootstrap_sample(collapsed, qc.eval_size, derive_seed(cfg.seed, {11, b}));

    for (std::size_t p = 0; p < qc.privacy.size(); ++p) {
      const QueryPrivacySetting& ps = qc.privacy[p];
      const std::string tag =
          "q" + std::to_string(ps.query_budget) + "_s" + fmt_g(ps.noise_scale);

      // Uniform: grid sized to the nominal budget; suppressed cells consume
      // budget but are not "performed".
      const std::vector<int> bins = bins_for_budget(ps.query_budget, dim);
      long cells = 1;
      for (int v : bins) cells *= v;
      PrivacyConfig upc;
      upc.query_budget = cells;
      upc.noise_scale = ps.noise_scale;
      upc.min_count = qc.min_count;
      upc.seed = derive_seed(cfg.seed, {20, b, p});
      QuerySession usession(train, upc);
      const UniformRunResult ures = run_uniform(usession, bounds, bins, qc.cost, &map);

      // Strategic: budget matched to the number of actually displayed
      // uniform queries.
      PrivacyConfig spc;
      spc.query_budget = std::max<long>(ures.performed_queries, 1);
      spc.noise_scale = ps.noise_scale;
      spc.min_count = qc.min_count;
      spc.seed = derive_seed(cfg.seed, {21, b, p});
      QuerySession ssession(train, spc);

      StrategicRunConfig rc;
      rc.af = qc.af;
      rc.cost = qc.cost;
      rc.eval_resolution = qc.eval_resolution;
      rc.initial_hyperparams =
          GPHyperparams::isotropic(1.0, 1.0, dim, ps.noise_scale + 0.01);
      FitConfig fit = FitConfig::for_bounds(bounds, rc.initial_hyperparams,
                                            /*tie=*/true);
      fit.activation_step = qc.activation_step;
      fit.restarts = qc.fit_restarts;
      rc.fit = fit;
      const StrategicRunResult sres =
          run_strategic(ssession, bounds, rc, derive_seed(cfg.seed, {22, b, p}), &map);

      const std::size_t row_base = b * per_bootstrap + p * 2;
      auto fill_row = [&](std::size_t slot, const std::string& method,
                          const TargetingPolicy& policy, long performed) {
        const EvaluationReport rep =
            evaluate_on_dataset(policy, eval, qc.cost, qc.paper_literal_ipw);
        QueryRunRow row;
        row.bootstrap = static_cast<int>(b);
        row.query_budget = ps.query_budget;
        row.noise_scale = ps.noise_scale;
        row.method_id = method;
        row.ipw_value = rep.policy_value;
        row.ipw_se = rep.standard_error;
        row.treat_all_value = rep.treat_all_value;
        row.control_all_value = rep.control_all_value;
        row.lift = rep.lift;
        row.performed_queries = performed;
        artifacts.rows[row_base + slot] = std::move(row);
      };
      fill_row(0, "uniform", ures.policy, ures.performed_queries);
      fill_row(1, "strategic", sres.policy, sres.performed_queries);

      if (qc.write_policies) {
        std::ostringstream pu, pstrat;
        ures.policy.write(pu);
        sres.policy.write(pstrat);
        files[b].push_back(
            {(out / "policies" / (tag + "_b" + std::to_string(b) + "_uniform.policy"))
                 .string(),
             pu.str()});
        files[b].push_back(
            {(out / "policies" / (tag + "_b" + std::to_string(b) + "_strategic.policy"))
                 .string(),
             pstrat.str()});
      }
      if (qc.write_audits) {
        std::ostringstream au, astrat;
        usession.write_audit_log(au);
        ssession.write_audit_log(astrat);
        files[b].push_back(
            {(out / "audits" / (tag + "_b" + std::to_string(b) + "_uniform.audit"))
                 .string(),
             au.str()});
        files[b].push_back(
            {(out / "audits" / (tag + "_b" + std::to_string(b) + "_strategic.audit"))
                 .string(),
             astrat.str()});
      }
    }
  });

  for (const auto& batch : files) {
    for (const auto& f : batch) write_file(f.path, f.content);
  }
  {
    std::ostringstream os;
    write_query_rows(artifacts.rows, os);
    write_file((out / "reports.csv").string(), os.str());
  }
  {
    std::ostringstream os;
    write_query_summary(artifacts.rows, qc.external_baseline, os);
    write_file((out / "summary.csv").string(), os.str());
  }
  return artifacts;
}

//===----------------------------------------------------------------------===//
// evaluate
//===----------------------------------------------------------------------===//

inline EvaluationReport cmd_evaluate(const RunConfig& cfg) {
  const EvaluateConfig& ec = cfg.evaluate;
  std::ifstream pin(ec.policy_path);
  if (!pin) throw std::runtime_error("cannot open policy: " + ec.policy_path);
  const TargetingPolicy policy = TargetingPolicy::read(pin);
  const Dataset data = ingest_csv(ec.dataset_path, ec.schema);
  const EvaluationReport rep =
      evaluate_on_dataset(policy, data, ec.cost, ec.paper_literal_ipw);
  const std::filesystem::path out(cfg.out_dir);
  detail::ensure_dir(out);
  std::ostringstream os;
  write_report(rep, os);
  write_file((out / "evaluation.csv").string(), os.str());
  return rep;
}

//===----------------------------------------------------------------------===//
// report
//===----------------------------------------------------------------------===//

inline void cmd_report(const RunConfig& cfg) {
  const ReportConfig& rc = cfg.report;
  const std::filesystem::path out(cfg.out_dir);

  if (rc.results_paths.empty() && rc.dominance_path.empty()) {
    throw std::invalid_argument("report mode needs results files or a dominance file");
  }

  ResultsTable table;
  for (const auto& path : rc.results_paths) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open results file: " + path);
    ResultsTable part = read_results(in);
    table.rows.insert(table.rows.end(), part.rows.begin(), part.rows.end());
  }
  if (!rc.results_paths.empty() && table.rows.empty()) {
    throw std::runtime_error("results files contained no rows");
  }

  detail::ensure_dir(out);
  if (!table.rows.empty()) {
    detail::ensure_dir(out / "charts");
    std::ostringstream ms;
    write_method_summary(table, ms);
    write_file((out / "method_summary.csv").string(), ms.str());
    for (const std::string param :
         {"amplitude", "lengthscale", "query_budget", "noise_scale"}) {
      std::ostringstream csv;
      std::string svg;
      write_parameter_summary(table, param, csv, &svg);
      write_file((out / ("summary_by_" + param + ".csv")).string(), csv.str());
      write_file((out / "charts" / ("by_" + param + ".svg")).string(), svg);
    }
  }
  if (!rc.dominance_path.empty()) {
    std::ifstream in(rc.dominance_path);
    if (!in) throw std::runtime_error("cannot open dominance file: " + rc.dominance_path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("# straq-schema v1 dominance", 0) != 0) {
      throw std::runtime_error("not a dominance file: " + rc.dominance_path);
    }
    std::getline(in, line);
    DominanceMatrix dm;
    {
      const auto header = split_csv_line(line);
      dm.method_ids.assign(header.begin() + 1, header.end());
    }
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto fields = split_csv_line(line);
      if (fields.size() != dm.method_ids.size() + 1) {
        throw std::runtime_error("malformed dominance row in " + rc.dominance_path);
      }
      std::vector<int> row;
      for (std::size_t i = 1; i < fields.size(); ++i) row.push_back(std::stoi(fields[i]));
      dm.counts.push_back(std::move(row));
    }
    detail::ensure_dir(out / "charts");
    write_file((out / "charts" / "dominance.svg").string(), render_dominance_svg(dm));
  }
}

}  // namespace straq

#endif  // STRAQ_PIPELINE_HPP
