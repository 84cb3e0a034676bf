/*
 * Copyright 2026 The straq Authors
 * License: Apache License 2.0
 */
#ifndef STRAQ_SYNTH_DGP_HPP
#define STRAQ_SYNTH_DGP_HPP

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "straq/data.hpp"
#include "straq/kernels.hpp"
#include "straq/parallel.hpp"
#include "straq/policy_eval.hpp"
#include "straq/privacy_oracle.hpp"
#include "straq/region.hpp"
#include "straq/rng.hpp"
#include "straq/strategies.hpp"
#include "straq/textio.hpp"

namespace straq {

struct DGPConfig {
  double amplitude = 5.0;  // sqrt of the kernel variance
  double lengthscale = 30.0;
  Bounds bounds = Bounds::cube(0.0, 100.0, 3);
  int grid_resolution = 20;
  long population_size = 5000;

  void validate() const {
    if (!(amplitude > 0.0)) throw std::invalid_argument("amplitude must be > 0");
    if (!(lengthscale > 0.0)) throw std::invalid_argument("lengthscale must be > 0");
    if (grid_resolution < 2) throw std::invalid_argument("grid resolution must be >= 2");
    if (population_size < 1) throw std::invalid_argument("population size must be >= 1");
  }

  GPHyperparams hyperparams() const {
    return GPHyperparams::isotropic(amplitude * amplitude, lengthscale, bounds.dim());
  }
};

/// A treatment-effect surface: exact GP draw at the grid nodes, multilinear
/// interpolation off-grid.
class EffectSurface {
 public:
  EffectSurface(Bounds bounds, int resolution, std::vector<double> values)
      : bounds_(std::move(bounds)), res_(resolution), values_(std::move(values)) {
    std::size_t expected = 1;
    for (std::size_t d = 0; d < bounds_.dim(); ++d) {
      expected *= static_cast<std::size_t>(res_);
    }
    if (values_.size() != expected) {
      throw std::invalid_argument("surface value count does not match grid");
    }
  }

  const Bounds& bounds() const { return bounds_; }
  int resolution() const { return res_; }
  const std::vector<double>& node_values() const { return values_; }

  double node_coord(std::size_t d, int j) const {
    return bounds_.lo(d) +
           bounds_.side(d).width() * static_cast<double>(j) / static_cast<double>(res_ - 1);
  }

  double value_at(std::span<const double> x) const {
    const std::size_t dim = bounds_.dim();
    if (x.size() != dim) throw std::invalid_argument("point dimension mismatch");
    std::vector<int> base(dim);
    std::vector<double> frac(dim);
    for (std::size_t d = 0; d < dim; ++d) {
      const double u = (x[d] - bounds_.lo(d)) / bounds_.side(d).width() *
                       static_cast<double>(res_ - 1);
      int j = static_cast<int>(std::floor(u));
      j = std::max(0, std::min(j, res_ - 2));
      base[d] = j;
      frac[d] = std::min(std::max(u - static_cast<double>(j), 0.0), 1.0);
    }
    double value = 0.0;
    const std::size_t corners = std::size_t{1} << dim;
    for (std::size_t mask = 0; mask < corners; ++mask) {
      double weight = 1.0;
      std::size_t idx = 0;
      for (std::size_t d = 0; d < dim; ++d) {
        const bool hi = (mask >> d) & 1u;
        weight *= hi ? frac[d] : 1.0 - frac[d];
        idx = idx * static_cast<std::size_t>(res_) +
              static_cast<std::size_t>(base[d] + (hi ? 1 : 0));
      }
      value += weight * values_[idx];
    }
    return value;
  }

 private:
  Bounds bounds_;
  int res_;
  std::vector<double> values_;
};

/// Exact joint draw of the effect surface at the grid nodes. The separable
/// kernel on a product grid factorizes as a Kronecker product, so the draw
/// multiplies per-dimension Cholesky factors along each tensor axis — the
/// same distribution as factorizing the full Gram matrix.
inline EffectSurface sample_gp_surface(const DGPConfig& config, std::uint64_t seed) {
  config.validate();
  const std::size_t dim = config.bounds.dim();
  const int res = config.grid_resolution;
  const double alpha = config.amplitude * config.amplitude;

  std::vector<Eigen::MatrixXd> factors;
  for (std::size_t d = 0; d < dim; ++d) {
    Eigen::MatrixXd k(res, res);
    for (int i = 0; i < res; ++i) {
      for (int j = 0; j < res; ++j) {
        const double dt = (config.bounds.side(d).width() * static_cast<double>(i - j) /
                           static_cast<double>(res - 1)) /
                          config.lengthscale;
        k(i, j) = std::exp(-dt * dt);
      }
    }
    bool done = false;
    for (double jitter : {1e-8, 1e-6}) {
      Eigen::MatrixXd kj = k + jitter * Eigen::MatrixXd::Identity(res, res);
      Eigen::LLT<Eigen::MatrixXd> llt(kj);
      if (llt.info() == Eigen::Success) {
        factors.push_back(llt.matrixL());
        done = true;
        break;
      }
    }
    if (!done) {
      throw std::runtime_error("surface kernel factorization failed after raising jitter");
    }
  }

  std::size_t total = 1;
  for (std::size_t d = 0; d < dim; ++d) total *= static_cast<std::size_t>(res);
  Rng rng = make_rng(seed);
  std::vector<double> values(total);
  for (auto& v : values) v = standard_normal(rng);

  // Mode-d products: v <- (I x ... x L_d x ... x I) v along each axis.
  std::vector<double> slice(static_cast<std::size_t>(res));
  for (std::size_t axis = 0; axis < dim; ++axis) {
    std::size_t inner = 1;
    for (std::size_t d = axis + 1; d < dim; ++d) inner *= static_cast<std::size_t>(res);
    const std::size_t outer = total / (inner * static_cast<std::size_t>(res));
    const Eigen::MatrixXd& l = factors[axis];
    for (std::size_t o = 0; o < outer; ++o) {
      for (std::size_t in = 0; in < inner; ++in) {
        const std::size_t base = o * static_cast<std::size_t>(res) * inner + in;
        for (int k = 0; k < res; ++k) {
          slice[static_cast<std::size_t>(k)] =
              values[base + static_cast<std::size_t>(k) * inner];
        }
        for (int i = res - 1; i >= 0; --i) {
          double acc = 0.0;
          for (int k = 0; k <= i; ++k) acc += l(i, k) * slice[static_cast<std::size_t>(k)];
          values[base + static_cast<std::size_t>(i) * inner] = acc;
        }
      }
    }
  }
  const double amp = std::sqrt(alpha);
  for (auto& v : values) v *= amp;
  return EffectSurface(config.bounds, res, std::move(values));
}

struct SyntheticDraw {
  Population population;
  Dataset dataset;
};

/// Finite population under the surface: covariates i.i.d. uniform over the
/// bounds, true effect from the surface; the dataset view assigns W with
/// probability one half and Y = W * tau so arm-mean differences equal region
/// effects up to the finite arm split.
inline SyntheticDraw sample_population(const EffectSurface& surface, long n,
                                       std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("population size must be >= 1");
  const Bounds& bounds = surface.bounds();
  const std::size_t dim = bounds.dim();
  Population pop(dim);
  Dataset data(dim, 0.5);
  Rng rng = make_rng(seed);
  std::vector<double> x(dim);
  for (long i = 0; i < n; ++i) {
    for (std::size_t d = 0; d < dim; ++d) {
      x[d] = uniform_real(rng, bounds.lo(d), bounds.hi(d));
    }
    const double tau = surface.value_at(x);
    const int w = uniform_real(rng, 0.0, 1.0) < 0.5 ? 1 : 0;
    pop.push_row(x, tau);
    data.push_row(x, w, w == 1 ? tau : 0.0);
  }
  return SyntheticDraw{std::move(pop), std::move(data)};
}

struct MethodSpec {
  std::string id;
  bool is_uniform = false;
  AFConfig af;       // strategic methods only
  bool use_mle = false;
  bool model_sampling_noise = false;
  double latent_noise_fraction = 0.0;  // default_noise_sd as a share of amplitude
};

struct ExperimentSetting {
  std::string id;
  DGPConfig dgp;
  long query_budget = 27;
  double noise_scale = 1.0;
  long min_count = 0;
  double cost = 0.0;
  int eval_resolution = 10;
};

struct RunRow {
  std::string setting_id;
  std::string method_id;
  int repeat = 0;
  double policy_value = std::numeric_limits<double>::quiet_NaN();
  double oracle_value = std::numeric_limits<double>::quiet_NaN();
  double uniform_value = std::numeric_limits<double>::quiet_NaN();
  double fraction_of_oracle = std::numeric_limits<double>::quiet_NaN();
  bool failed = false;
  std::string error;
};

struct ResultsTable {
  std::vector<RunRow> rows;
};

/// Runs every (setting, method, repeat) cell: one fresh surface + population
/// per repeat shared by all methods, one oracle session per method with its
/// own derived noise stream. Failures are recorded per row, never aborting
/// the harness. Deterministic given the master seed and independent of
/// scheduling.
inline ResultsTable run_settings(const std::vector<ExperimentSetting>& settings,
                                 const std::vector<MethodSpec>& methods, int repeats,
                                 std::uint64_t master_seed, int parallelism) {
  if (repeats < 1) throw std::invalid_argument("repeats must be >= 1");
  if (settings.empty() || methods.empty()) {
    throw std::invalid_argument("need at least one setting and one method");
  }
  ResultsTable table;
  table.rows.resize(settings.size() * static_cast<std::size_t>(repeats) * methods.size());

  // Uniform (when present) runs first within a repeat so its value can be
  // attached to every row of that repeat.
  std::vector<std::size_t> method_order;
  for (std::size_t m = 0; m < methods.size(); ++m) {
    if (methods[m].is_uniform) method_order.push_back(m);
  }
  for (std::size_t m = 0; m < methods.size(); ++m) {
    if (!methods[m].is_uniform) method_order.push_back(m);
  }

  const std::size_t tasks = settings.size() * static_cast<std::size_t>(repeats);
  parallel_for(tasks, parallelism, [&](std::size_t task) {
    const std::size_t si = task / static_cast<std::size_t>(repeats);
    const int rep = static_cast<int>(task % static_cast<std::size_t>(repeats));
    const ExperimentSetting& setting = settings[si];
    const std::size_t row_base =
        task * methods.size();

    const EffectSurface surface = sample_gp_surface(
        setting.dgp, derive_seed(master_seed, {1, si, static_cast<std::uint64_t>(rep)}));
    const SyntheticDraw draw =
        sample_population(surface, setting.dgp.population_size,
                          derive_seed(master_seed, {2, si, static_cast<std::uint64_t>(rep)}));

    const double oracle = oracle_policy_value(draw.population, setting.cost);
    double mean_tau = 0.0;
    for (std::size_t i = 0; i < draw.population.size(); ++i) {
      mean_tau += draw.population.true_effect(i);
    }
    mean_tau /= static_cast<double>(draw.population.size());
    const double blanket = std::max(mean_tau - setting.cost, 0.0);

    double uniform_value = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t ord = 0; ord < method_order.size(); ++ord) {
      const std::size_t mi = method_order[ord];
      const MethodSpec& method = methods[mi];
      RunRow row;
      row.setting_id = setting.id;
      row.method_id = method.id;
      row.repeat = rep;
      row.oracle_value = oracle;
      try {
        PrivacyConfig pc;
        pc.query_budget = setting.query_budget;
        pc.noise_scale = setting.noise_scale;
        pc.min_count = setting.min_count;
        pc.seed = derive_seed(master_seed, {3, si, static_cast<std::uint64_t>(rep), mi});
        QuerySession session(draw.dataset, pc);

        TargetingPolicy policy(setting.dgp.bounds, std::vector<int>(setting.dgp.bounds.dim(), 1),
                               {Action::control});
        if (method.is_uniform) {
          const auto bins = bins_for_budget(setting.query_budget, setting.dgp.bounds.dim());
          policy = run_uniform(session, setting.dgp.bounds, bins, setting.cost).policy;
        } else {
          StrategicRunConfig rc;
          rc.af = method.af;
          rc.cost = setting.cost;
          rc.eval_resolution = setting.eval_resolution;
          rc.initial_hyperparams = setting.dgp.hyperparams();
          rc.initial_hyperparams.default_noise_sd =
              method.latent_noise_fraction * setting.dgp.amplitude;
          rc.model_sampling_noise = method.model_sampling_noise;
          if (method.use_mle) {
            rc.fit = FitConfig::for_bounds(setting.dgp.bounds, rc.initial_hyperparams);
          }
          policy = run_strategic(session, setting.dgp.bounds, rc,
                                 derive_seed(master_seed,
                                             {4, si, static_cast<std::uint64_t>(rep), mi}))
                       .policy;
        }
        row.policy_value = policy_value_on_population(policy, draw.population, setting.cost);
        if (method.is_uniform) uniform_value = row.policy_value;
        if (oracle > blanket) {
          row.fraction_of_oracle = (row.policy_value - blanket) / (oracle - blanket);
        }
      } catch (const std::exception& ex) {
        row.failed = true;
        row.error = ex.what();
      }
      row.uniform_value = uniform_value;
      table.rows[row_base + mi] = std::move(row);
    }
    // Methods listed before the uniform method still get the repeat's
    // uniform value.
    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
      table.rows[row_base + mi].uniform_value = uniform_value;
    }
  });
  return table;
}

struct DominanceMatrix {
  std::vector<std::string> method_ids;
  std::vector<std::vector<int>> counts;  // [focal][competitor]
};

/// counts[focal][competitor] = number of settings in which the competitor's
/// policy value strictly exceeds the focal's in at least `threshold` of the
/// repeats. Requires a balanced table (same repeat count everywhere, no
/// failed rows).
inline DominanceMatrix dominance_matrix(const ResultsTable& results, double threshold) {
  std::vector<std::string> settings, methods;
  std::map<std::pair<std::string, std::string>, std::vector<double>> values;
  for (const auto& row : results.rows) {
    if (row.failed) {
      throw std::invalid_argument("dominance_matrix requires a table without failed runs");
    }
    if (std::find(settings.begin(), settings.end(), row.setting_id) == settings.end()) {
      settings.push_back(row.setting_id);
    }
    if (std::find(methods.begin(), methods.end(), row.method_id) == methods.end()) {
      methods.push_back(row.method_id);
    }
    values[{row.setting_id, row.method_id}].push_back(row.policy_value);
  }
  std::size_t repeats = 0;
  for (const auto& [key, vals] : values) {
    if (repeats == 0) repeats = vals.size();
    if (vals.size() != repeats) {
      throw std::invalid_argument("dominance_matrix requires balanced repeats");
    }
  }

  DominanceMatrix dm;
  dm.method_ids = methods;
  dm.counts.assign(methods.size(), std::vector<int>(methods.size(), 0));
  for (const auto& s : settings) {
    for (std::size_t f = 0; f < methods.size(); ++f) {
      for (std::size_t c = 0; c < methods.size(); ++c) {
        if (f == c) continue;
        const auto& fv = values.at({s, methods[f]});
        const auto& cv = values.at({s, methods[c]});
        std::size_t wins = 0;
        for (std::size_t r = 0; r < repeats; ++r) {
          if (cv[r] > fv[r]) ++wins;
        }
        if (static_cast<double>(wins) >=
            threshold * static_cast<double>(repeats) - 1e-12) {
          ++dm.counts[f][c];
        }
      }
    }
  }
  return dm;
}

inline void write_results(const ResultsTable& table, std::ostream& os) {
  os << "# straq-schema v1 results\n";
  os << "setting_id,method_id,repeat,policy_value,oracle_value,uniform_value,"
        "fraction_of_oracle,failed,error\n";
  for (const auto& r : table.rows) {
    os << r.setting_id << "," << r.method_id << "," << r.repeat << ","
       << fmt_double(r.policy_value) << "," << fmt_double(r.oracle_value) << ","
       << fmt_double(r.uniform_value) << "," << fmt_double(r.fraction_of_oracle) << ","
       << (r.failed ? 1 : 0) << "," << r.error << "\n";
  }
}

inline ResultsTable read_results(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("# straq-schema v1 results", 0) != 0) {
    throw std::runtime_error("not a results file");
  }
  std::getline(is, line);  // header
  ResultsTable table;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() < 8) throw std::runtime_error("malformed results row: " + line);
    RunRow r;
    r.setting_id = fields[0];
    r.method_id = fields[1];
    r.repeat = std::stoi(fields[2]);
    r.policy_value = std::strtod(fields[3].c_str(), nullptr);
    r.oracle_value = std::strtod(fields[4].c_str(), nullptr);
    r.uniform_value = std::strtod(fields[5].c_str(), nullptr);
    r.fraction_of_oracle = std::strtod(fields[6].c_str(), nullptr);
    r.failed = fields[7] == "1";
    if (fields.size() > 8) r.error = fields[8];
    table.rows.push_back(std::move(r));
  }
  return table;
}

inline void write_dominance(const DominanceMatrix& dm, std::ostream& os) {
  os << "# straq-schema v1 dominance\n";
  os << "focal";
  for (const auto& id : dm.method_ids) os << "," << id;
  os << "\n";
  for (std::size_t f = 0; f < dm.method_ids.size(); ++f) {
    os << dm.method_ids[f];
    for (std::size_t c = 0; c < dm.method_ids.size(); ++c) os << "," << dm.counts[f][c];
    os << "\n";
  }
}

}  // namespace straq

#endif  // STRAQ_SYNTH_DGP_HPP
