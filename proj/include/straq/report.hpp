/*
 * Copyright 2026 The straq Authors
 * License: Apache License 2.0
 */
#ifndef STRAQ_REPORT_HPP
#define STRAQ_REPORT_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "straq/synth_dgp.hpp"
#include "straq/textio.hpp"

namespace straq {

inline std::string fmt_g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

struct SettingParams {
  double amplitude = 0.0;
  double lengthscale = 0.0;
  long query_budget = 0;
  double noise_scale = 0.0;
};

inline std::string setting_id(const SettingParams& p) {
  return "a" + fmt_g(p.amplitude) + "_l" + fmt_g(p.lengthscale) + "_q" +
         std::to_string(p.query_budget) + "_s" + fmt_g(p.noise_scale);
}

inline SettingParams parse_setting_id(const std::string& id) {
  SettingParams p;
  if (std::sscanf(id.c_str(), "a%lf_l%lf_q%ld_s%lf", &p.amplitude, &p.lengthscale,
                  &p.query_budget, &p.noise_scale) != 4) {
    throw std::runtime_error("unrecognized setting id: " + id);
  }
  return p;
}

struct MeanCi {
  double mean = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  std::size_t n = 0;
};

inline MeanCi mean_ci(const std::vector<double>& xs) {
  MeanCi out;
  out.n = xs.size();
  if (xs.empty()) return out;
  for (double x : xs) out.mean += x;
  out.mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - out.mean) * (x - out.mean);
  var /= xs.size() > 1 ? static_cast<double>(xs.size() - 1) : 1.0;
  const double half = 1.96 * std::sqrt(var / static_cast<double>(xs.size()));
  out.ci_lo = out.mean - half;
  out.ci_hi = out.mean + half;
  return out;
}

namespace detail {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> y_lo;
  std::vector<double> y_hi;
};

inline const char* series_color(std::size_t i) {
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                 "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
  return colors[i % 8];
}

/// Minimal standalone line chart with error bars.
inline std::string svg_line_chart(const std::string& title, const std::string& x_label,
                                  const std::string& y_label,
                                  const std::vector<Series>& series) {
  const double w = 640, h = 420, ml = 70, mr = 170, mt = 50, mb = 55;
  double x_min = 1e300, x_max = -1e300, y_min = 1e300, y_max = -1e300;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      x_min = std::min(x_min, s.x[i]);
      x_max = std::max(x_max, s.x[i]);
      y_min = std::min({y_min, s.y_lo.empty() ? s.y[i] : s.y_lo[i]});
      y_max = std::max({y_max, s.y_hi.empty() ? s.y[i] : s.y_hi[i]});
    }
  }
  if (!(x_max > x_min)) x_max = x_min + 1.0;
  if (!(y_max > y_min)) y_max = y_min + 1.0;
  const double pad = 0.06 * (y_max - y_min);
  y_min -= pad;
  y_max += pad;
  auto px = [&](double x) { return ml + (x - x_min) / (x_max - x_min) * (w - ml - mr); };
  auto py = [&](double y) { return h - mb - (y - y_min) / (y_max - y_min) * (h - mt - mb); };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << w << " " << h
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<text x=\"" << w / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
     << title << "</text>\n";
  os << "<line x1=\"" << ml << "\" y1=\"" << h - mb << "\" x2=\"" << w - mr << "\" y2=\""
     << h - mb << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << h - mb
     << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double yv = y_min + (y_max - y_min) * t / 4.0;
    os << "<text x=\"" << ml - 8 << "\" y=\"" << py(yv) + 4
       << "\" text-anchor=\"end\">" << fmt_g(yv) << "</text>\n";
    os << "<line x1=\"" << ml << "\" y1=\"" << py(yv) << "\" x2=\"" << w - mr << "\" y2=\""
       << py(yv) << "\" stroke=\"#dddddd\"/>\n";
  }
  os << "<text x=\"" << (ml + w - mr) / 2 << "\" y=\"" << h - 14
     << "\" text-anchor=\"middle\">" << x_label << "</text>\n";
  os << "<text x=\"18\" y=\"" << (mt + h - mb) / 2
     << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " << (mt + h - mb) / 2 << ")\">"
     << y_label << "</text>\n";

  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    const char* color = series_color(si);
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      os << px(s.x[i]) << "," << py(s.y[i]) << " ";
    }
    os << "\"/>\n";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      os << "<circle cx=\"" << px(s.x[i]) << "\" cy=\"" << py(s.y[i])
         << "\" r=\"3\" fill=\"" << color << "\"/>\n";
      if (!s.y_lo.empty()) {
        os << "<line x1=\"" << px(s.x[i]) << "\" y1=\"" << py(s.y_lo[i]) << "\" x2=\""
           << px(s.x[i]) << "\" y2=\"" << py(s.y_hi[i]) << "\" stroke=\"" << color
           << "\"/>\n";
      }
    }
    os << "<rect x=\"" << w - mr + 12 << "\" y=\"" << mt + 18 * si << "\" width=\"12\""
       << " height=\"12\" fill=\"" << color << "\"/>\n";
    os << "<text x=\"" << w - mr + 30 << "\" y=\"" << mt + 18 * si + 10 << "\">" << s.label
       << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace detail

/// Pooled mean fraction-of-oracle per method with a normal CI.
inline void write_method_summary(const ResultsTable& table, std::ostream& os) {
  std::vector<std::string> methods;
  std::map<std::string, std::vector<double>> fractions;
  for (const auto& r : table.rows) {
    if (r.failed || std::isnan(r.fraction_of_oracle)) continue;
    if (std::find(methods.begin(), methods.end(), r.method_id) == methods.end()) {
      methods.push_back(r.method_id);
    }
    fractions[r.method_id].push_back(r.fraction_of_oracle);
  }
  os << "# straq-schema v1 method-summary\n";
  os << "method_id,runs,mean_fraction_of_oracle,ci_lo,ci_hi\n";
  for (const auto& m : methods) {
    const MeanCi ci = mean_ci(fractions[m]);
    os << m << "," << ci.n << "," << fmt_double(ci.mean) << "," << fmt_double(ci.ci_lo)
       << "," << fmt_double(ci.ci_hi) << "\n";
  }
}

/// Breakdown of mean fraction-of-oracle by one DGP/privacy parameter
/// (averaged over everything else), one CSV plus one chart per parameter.
inline void write_parameter_summary(const ResultsTable& table, const std::string& parameter,
                                    std::ostream& csv, std::string* svg_out) {
  auto param_value = [&](const SettingParams& p) {
    if (parameter == "amplitude") return p.amplitude;
    if (parameter == "lengthscale") return p.lengthscale;
    if (parameter == "query_budget") return static_cast<double>(p.query_budget);
    if (parameter == "noise_scale") return p.noise_scale;
    throw std::invalid_argument("unknown parameter: " + parameter);
  };

  std::vector<std::string> methods;
  std::vector<double> values;
  std::map<std::pair<std::string, double>, std::vector<double>> cells;
  for (const auto& r : table.rows) {
    if (r.failed || std::isnan(r.fraction_of_oracle)) continue;
    const double v = param_value(parse_setting_id(r.setting_id));
    if (std::find(methods.begin(), methods.end(), r.method_id) == methods.end()) {
      methods.push_back(r.method_id);
    }
    if (std::find(values.begin(), values.end(), v) == values.end()) values.push_back(v);
    cells[{r.method_id, v}].push_back(r.fraction_of_oracle);
  }
  std::sort(values.begin(), values.end());

  csv << "# straq-schema v1 parameter-summary\n";
  csv << "parameter,value,method_id,runs,mean_fraction_of_oracle,ci_lo,ci_hi\n";
  std::vector<detail::Series> series;
  for (const auto& m : methods) {
    detail::Series s;
    s.label = m;
    for (double v : values) {
      const auto it = cells.find({m, v});
      if (it == cells.end()) continue;
      const MeanCi ci = mean_ci(it->second);
      csv << parameter << "," << fmt_g(v) << "," << m << "," << ci.n << ","
          << fmt_double(ci.mean) << "," << fmt_double(ci.ci_lo) << ","
          << fmt_double(ci.ci_hi) << "\n";
      s.x.push_back(v);
      s.y.push_back(ci.mean);
      s.y_lo.push_back(ci.ci_lo);
      s.y_hi.push_back(ci.ci_hi);
    }
    series.push_back(std::move(s));
  }
  if (svg_out) {
    *svg_out = detail::svg_line_chart("fraction of oracle by " + parameter, parameter,
                                      "fraction of oracle", series);
  }
}

/// Square dominance table rendered as a standalone SVG.
inline std::string render_dominance_svg(const DominanceMatrix& dm) {
  const std::size_t n = dm.method_ids.size();
  const double cell = 46, left = 170, top = 140;
  const double w = left + cell * static_cast<double>(n) + 20;
  const double h = top + cell * static_cast<double>(n) + 20;
  int max_count = 1;
  for (const auto& row : dm.counts) {
    for (int c : row) max_count = std::max(max_count, c);
  }
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << w << " " << h
     << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  os << "<text x=\"" << w / 2
     << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">settings where the competitor "
        "dominates the focal method</text>\n";
  for (std::size_t i = 0; i < n; ++i) {
    os << "<text x=\"" << left - 6 << "\" y=\"" << top + cell * (i + 0.6)
       << "\" text-anchor=\"end\">" << dm.method_ids[i] << "</text>\n";
    os << "<text x=\"" << left + cell * (i + 0.5) << "\" y=\"" << top - 8
       << "\" text-anchor=\"start\" transform=\"rotate(-45 " << left + cell * (i + 0.5)
       << " " << top - 8 << ")\">" << dm.method_ids[i] << "</text>\n";
  }
  for (std::size_t f = 0; f < n; ++f) {
    for (std::size_t c = 0; c < n; ++c) {
      const int v = dm.counts[f][c];
      const int shade = 255 - static_cast<int>(200.0 * v / max_count);
      os << "<rect x=\"" << left + cell * c << "\" y=\"" << top + cell * f << "\" width=\""
         << cell - 2 << "\" height=\"" << cell - 2 << "\" fill=\"rgb(255," << shade << ","
         << shade << ")\" stroke=\"#999\"/>\n";
      os << "<text x=\"" << left + cell * (c + 0.5) << "\" y=\"" << top + cell * (f + 0.6)
         << "\" text-anchor=\"middle\">" << v << "</text>\n";
    }
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace straq

#endif  // STRAQ_REPORT_HPP
