/*
 * Copyright 2026 The straq Authors
 * License: Apache License 2.0
 */
#ifndef STRAQ_POLICY_HPP
#define STRAQ_POLICY_HPP

#include <cmath>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "straq/region.hpp"
#include "straq/textio.hpp"

namespace straq {

enum class Action : std::uint8_t { control = 0, treat = 1 };

/// Piecewise-constant map from covariate cells to {treat, control}: an
/// equal-width grid over Bounds with one action per cell. Cells are half-open
/// except at the top boundary, so every point in bounds maps to exactly one
/// cell. Policies built in a transformed (e.g. standardized) space carry the
/// affine map back to data coordinates so evaluation consumes raw rows.
class TargetingPolicy {
 public:
  TargetingPolicy(Bounds bounds, std::vector<int> bins_per_dim,
                  std::vector<Action> actions,
                  std::optional<AffineMap> data_to_client = std::nullopt)
      : bounds_(std::move(bounds)),
        bins_(std::move(bins_per_dim)),
        actions_(std::move(actions)),
        map_(std::move(data_to_client)) {
    if (bins_.size() != bounds_.dim()) {
      throw std::invalid_argument("bins_per_dim must match bounds dimension");
    }
    std::size_t total = 1;
    for (int b : bins_) {
      if (b < 1) throw std::invalid_argument("bins must be >= 1");
      total *= static_cast<std::size_t>(b);
    }
    if (actions_.size() != total) {
      throw std::invalid_argument("action count must equal the number of grid cells");
    }
    if (map_ && map_->dim() != bounds_.dim()) {
      throw std::invalid_argument("affine map dimension must match bounds");
    }
  }

  const Bounds& bounds() const { return bounds_; }
  const std::vector<int>& bins_per_dim() const { return bins_; }
  std::size_t cell_count() const { return actions_.size(); }
  Action cell_action(std::size_t idx) const { return actions_[idx]; }
  const std::optional<AffineMap>& transform() const { return map_; }

  Region cell_region(std::size_t idx) const {
    std::vector<Interval> sides(bounds_.dim());
    for (std::size_t d = bounds_.dim(); d-- > 0;) {
      const int b = bins_[d];
      const int j = static_cast<int>(idx % static_cast<std::size_t>(b));
      idx /= static_cast<std::size_t>(b);
      sides[d] = Interval{edge(d, j), edge(d, j + 1)};
    }
    return Region(std::move(sides));
  }

  /// Cell index of a point given in *client* coordinates.
  std::size_t cell_index_client(std::span<const double> point) const {
    if (point.size() != bounds_.dim()) {
      throw std::invalid_argument("point dimension does not match policy");
    }
    std::size_t idx = 0;
    for (std::size_t d = 0; d < bounds_.dim(); ++d) {
      if (point[d] < bounds_.lo(d) || point[d] > bounds_.hi(d)) {
        throw std::invalid_argument("point lies outside the policy partition");
      }
      const double w = bounds_.side(d).width();
      int j = static_cast<int>(std::floor((point[d] - bounds_.lo(d)) / w *
                                          static_cast<double>(bins_[d])));
      j = std::min(j, bins_[d] - 1);  // top boundary belongs to the last cell
      idx = idx * static_cast<std::size_t>(bins_[d]) + static_cast<std::size_t>(j);
    }
    return idx;
  }

  /// Action for a point given in data coordinates.
  Action action_at(std::span<const double> data_point) const {
    if (!map_) return actions_[cell_index_client(data_point)];
    const std::vector<double> client = map_->point_to_client(data_point);
    return actions_[cell_index_client(client)];
  }

  void write(std::ostream& os) const {
    os << "# straq-schema v1 policy\n";
    os << "dims " << bounds_.dim() << "\n";
    os << "bins";
    for (int b : bins_) os << " " << b;
    os << "\n";
    os << "bounds";
    for (std::size_t d = 0; d < bounds_.dim(); ++d) {
      os << " " << fmt_double(bounds_.lo(d)) << " " << fmt_double(bounds_.hi(d));
    }
    os << "\n";
    if (map_) {
      os << "transform";
      for (std::size_t d = 0; d < bounds_.dim(); ++d) {
        os << " " << fmt_double(map_->offset[d]) << " " << fmt_double(map_->scale[d]);
      }
      os << "\n";
    }
    for (std::size_t c = 0; c < actions_.size(); ++c) {
      const Region cell = cell_region(c);
      os << "cell";
      for (std::size_t d = 0; d < bounds_.dim(); ++d) {
        os << " " << fmt_double(cell.lo(d)) << " " << fmt_double(cell.hi(d));
      }
      os << " " << (actions_[c] == Action::treat ? "treat" : "control") << "\n";
    }
  }

  static TargetingPolicy read(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line.rfind("# straq-schema v1 policy", 0) != 0) {
      throw std::runtime_error("not a policy file");
    }
    std::size_t dims = 0;
    std::vector<int> bins;
    std::vector<Interval> bsides;
    std::optional<AffineMap> map;
    std::vector<Action> actions;
    while (std::getline(is, line)) {
      if (line.empty()) continue;
      std::istringstream ls(line);
      std::string tag;
      ls >> tag;
      if (tag == "dims") {
        ls >> dims;
      } else if (tag == "bins") {
        int b;
        while (ls >> b) bins.push_back(b);
      } else if (tag == "bounds") {
        double lo, hi;
        while (ls >> lo >> hi) bsides.push_back(Interval{lo, hi});
      } else if (tag == "transform") {
        AffineMap m;
        double off, sc;
        while (ls >> off >> sc) {
          m.offset.push_back(off);
          m.scale.push_back(sc);
        }
        map = std::move(m);
      } else if (tag == "cell") {
        std::vector<double> nums(2 * dims);
        for (auto& v : nums) {
          if (!(ls >> v)) throw std::runtime_error("malformed policy cell line");
        }
        std::string act;
        ls >> act;
        if (act == "treat") {
          actions.push_back(Action::treat);
        } else if (act == "control") {
          actions.push_back(Action::control);
        } else {
          throw std::runtime_error("unknown action in policy file: " + act);
        }
      } else {
        throw std::runtime_error("unknown policy file tag: " + tag);
      }
    }
    if (dims == 0 || bins.size() != dims || bsides.size() != dims) {
      throw std::runtime_error("incomplete policy file header");
    }
    return TargetingPolicy(Bounds(std::move(bsides)), std::move(bins), std::move(actions),
                           std::move(map));
  }

 private:
  double edge(std::size_t d, int j) const {
    const int b = bins_[d];
    if (j == 0) return bounds_.lo(d);
    if (j == b) return bounds_.hi(d);
    return bounds_.lo(d) +
           bounds_.side(d).width() * static_cast<double>(j) / static_cast<double>(b);
  }

  Bounds bounds_;
  std::vector<int> bins_;
  std::vector<Action> actions_;
  std::optional<AffineMap> map_;
};

}  // namespace straq

#endif  // STRAQ_POLICY_HPP
