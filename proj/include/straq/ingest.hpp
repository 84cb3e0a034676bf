/*
 * Copyright 2026 The straq Authors
 * License: Apache License 2.0
 */
#ifndef STRAQ_INGEST_HPP
#define STRAQ_INGEST_HPP

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "straq/data.hpp"
#include "straq/region.hpp"
#include "straq/rng.hpp"
#include "straq/textio.hpp"

namespace straq {

struct CsvSchema {
  std::vector<std::string> feature_columns;
  std::string treatment_column;
  std::string outcome_column;
  double propensity = 0.5;
};

namespace detail {
inline bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size() && std::isfinite(out);
}
}  // namespace detail

/// Reads a comma-separated file with a header row. Malformed rows are
/// collected with their line numbers and reported together (first 20).
inline Dataset ingest_csv_stream(std::istream& is, const CsvSchema& schema) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("empty CSV input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = split_csv_line(line);

  auto column_of = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw std::runtime_error("missing column: " + name);
    return static_cast<std::size_t>(it - header.begin());
  };
  std::vector<std::size_t> feature_idx;
  for (const auto& f : schema.feature_columns) feature_idx.push_back(column_of(f));
  const std::size_t treat_idx = column_of(schema.treatment_column);
  const std::size_t outcome_idx = column_of(schema.outcome_column);

  Dataset data(feature_idx.size(), schema.propensity);
  std::vector<std::string> bad_lines;
  std::vector<double> x(feature_idx.size());
  long line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    std::string problem;
    if (fields.size() != header.size()) {
      problem = "expected " + std::to_string(header.size()) + " fields, got " +
                std::to_string(fields.size());
    } else {
      for (std::size_t j = 0; j < feature_idx.size() && problem.empty(); ++j) {
        if (!detail::parse_double(fields[feature_idx[j]], x[j])) {
          problem = "unparseable numeric in column " + schema.feature_columns[j];
        }
      }
      double treat = 0.0, outcome = 0.0;
      if (problem.empty() && !detail::parse_double(fields[treat_idx], treat)) {
        problem = "unparseable treatment";
      }
      if (problem.empty() && treat != 0.0 && treat != 1.0) {
        problem = "non-binary treatment value " + fields[treat_idx];
      }
      if (problem.empty() && !detail::parse_double(fields[outcome_idx], outcome)) {
        problem = "unparseable outcome";
      }
      if (problem.empty()) {
        data.push_row(x, static_cast<int>(treat), outcome);
        continue;
      }
    }
    if (bad_lines.size() < 20) {
      bad_lines.push_back("line " + std::to_string(line_no) + ": " + problem);
    }
  }
  if (!bad_lines.empty()) {
    std::string msg = "rejected rows:";
    for (const auto& b : bad_lines) msg += "\n  " + b;
    throw std::runtime_error(msg);
  }
  if (data.size() == 0) throw std::runtime_error("CSV contained no data rows");
  return data;
}

inline Dataset ingest_csv(const std::string& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset: " + path);
  return ingest_csv_stream(in, schema);
}

inline void write_csv(const Dataset& data, const CsvSchema& schema, std::ostream& os) {
  for (const auto& f : schema.feature_columns) os << f << ",";
  os << schema.treatment_column << "," << schema.outcome_column << "\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto row = data.row(i);
    for (double v : row) os << fmt_double(v) << ",";
    os << data.treatment(i) << "," << fmt_double(data.outcome(i)) << "\n";
  }
}

/// Keeps the named feature indices as-is and (optionally) sums the remaining
/// features into one trailing covariate.
inline Dataset collapse_features(const Dataset& data, const std::vector<std::size_t>& keep,
                                 bool sum_rest) {
  for (std::size_t k : keep) {
    if (k >= data.dim()) throw std::invalid_argument("keep index out of range");
  }
  if (keep.empty() && !sum_rest) {
    throw std::invalid_argument("collapse needs kept columns or sum_rest");
  }
  const std::size_t out_dim = keep.size() + (sum_rest ? 1 : 0);
  Dataset out(out_dim, data.propensity());
  std::vector<double> x(out_dim);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto row = data.row(i);
    for (std::size_t j = 0; j < keep.size(); ++j) x[j] = row[keep[j]];
    if (sum_rest) {
      double rest = 0.0;
      for (std::size_t d = 0; d < data.dim(); ++d) {
        if (std::find(keep.begin(), keep.end(), d) == keep.end()) rest += row[d];
      }
      x[keep.size()] = rest;
    }
    out.push_row(x, data.treatment(i), data.outcome(i));
  }
  return out;
}

/// Zero-mean unit-variance map fitted on the full dataset (the platform's
/// published summary statistics). `map()` converts standardized client
/// coordinates back to data coordinates.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> sd;

  static Standardizer fit(const Dataset& data) {
    Standardizer s;
    s.mean.assign(data.dim(), 0.0);
    s.sd.assign(data.dim(), 0.0);
    const double n = static_cast<double>(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
      const auto row = data.row(i);
      for (std::size_t d = 0; d < data.dim(); ++d) s.mean[d] += row[d];
    }
    for (auto& m : s.mean) m /= n;
    for (std::size_t i = 0; i < data.size(); ++i) {
      const auto row = data.row(i);
      for (std::size_t d = 0; d < data.dim(); ++d) {
        const double c = row[d] - s.mean[d];
        s.sd[d] += c * c;
      }
    }
    for (auto& v : s.sd) {
      v = std::sqrt(v / n);
      if (!(v > 0.0)) {
        throw std::runtime_error("cannot standardize a constant feature");
      }
    }
    return s;
  }

  AffineMap map() const { return AffineMap{mean, sd}; }

  /// Standardized bounds covering the observed data range.
  Bounds client_bounds(const Dataset& data) const {
    std::vector<Interval> sides(data.dim(),
                                Interval{std::numeric_limits<double>::infinity(),
                                         -std::numeric_limits<double>::infinity()});
    for (std::size_t i = 0; i < data.size(); ++i) {
      const auto row = data.row(i);
      for (std::size_t d = 0; d < data.dim(); ++d) {
        const double z = (row[d] - mean[d]) / sd[d];
        sides[d].lo = std::min(sides[d].lo, z);
        sides[d].hi = std::max(sides[d].hi, z);
      }
    }
    return Bounds(std::move(sides));
  }
};

/// Bootstrap sample with replacement, deterministic per seed.
inline Dataset bootstrap_sample(const Dataset& data, std::size_t size, std::uint64_t seed) {
  Dataset out(data.dim(), data.propensity());
  Rng rng = make_rng(seed);
  for (std::size_t i = 0; i < size; ++i) {
    const std::size_t pick = uniform_index(rng, data.size());
    out.push_row(data.row(pick), data.treatment(pick), data.outcome(pick));
  }
  return out;
}

}  // namespace straq

#endif  // STRAQ_INGEST_HPP
