/*
 * Copyright 2026 The straq Authors
 * License: Apache License 2.0
 */

// Command-line front end: simulate | query | evaluate | report, each driven
// by a JSON config file with CLI overrides for seed/output/parallelism.

#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "straq/config.hpp"
#include "straq/pipeline.hpp"

int main(int argc, char** argv) {
  CLI::App app{"straq: privacy-preserving targeting via strategic aggregate querying"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false, out_set = false, parallelism_set = false;
  int parallelism = 1;
  bool full_grid = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "path to the JSON config file")->required();
    cmd->add_option("--seed", seed, "master seed override")->each([&](const std::string&) {
      seed_set = true;
    });
    cmd->add_option("--out", out_dir, "output directory override")
        ->each([&](const std::string&) { out_set = true; });
    cmd->add_option("--parallelism", parallelism, "worker thread count")
        ->each([&](const std::string&) { parallelism_set = true; });
  };

  CLI::App* simulate = app.add_subcommand("simulate", "run the synthetic experiment grid");
  add_common(simulate);
  simulate->add_flag("--full-grid", full_grid,
                     "run the full 144-setting factorial with 100 repeats");

  CLI::App* query = app.add_subcommand("query", "run the empirical querying pipeline");
  add_common(query);

  CLI::App* evaluate = app.add_subcommand("evaluate", "evaluate a policy file by IPW");
  add_common(evaluate);

  CLI::App* report = app.add_subcommand("report", "summarize result files into tables/charts");
  add_common(report);

  CLI11_PARSE(app, argc, argv);

  try {
    straq::RunConfig cfg = straq::load_config(config_path);
    if (seed_set) cfg.seed = seed;
    if (out_set) cfg.out_dir = out_dir;
    if (parallelism_set) cfg.parallelism = parallelism;

    if (simulate->parsed()) {
      if (full_grid) cfg.simulate.apply_full_grid();
      const auto artifacts = straq::cmd_simulate(cfg);
      std::size_t failed = 0;
      for (const auto& r : artifacts.results.rows) failed += r.failed ? 1 : 0;
      std::cout << "simulate: " << artifacts.results.rows.size() << " runs (" << failed
                << " failed) -> " << cfg.out_dir << "\n";
    } else if (query->parsed()) {
      const auto artifacts = straq::cmd_query(cfg);
      std::cout << "query: " << artifacts.rows.size() << " evaluations -> " << cfg.out_dir
                << "\n";
    } else if (evaluate->parsed()) {
      const auto rep = straq::cmd_evaluate(cfg);
      std::cout << "policy_value " << rep.policy_value << " lift_vs_treat_all " << rep.lift
                << " se " << rep.standard_error << "\n";
    } else if (report->parsed()) {
      straq::cmd_report(cfg);
      std::cout << "report artifacts -> " << cfg.out_dir << "\n";
    }
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 0;
}
