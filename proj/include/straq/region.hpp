/*
 * Copyright 2026 The straq Authors
 * License: Apache License 2.0
 */
#ifndef STRAQ_REGION_HPP
#define STRAQ_REGION_HPP

#include <cmath>
#include <cstddef>
#include <span>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <vector>

namespace straq {

/// A closed real interval [lo, hi].
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double width() const { return hi - lo; }
  bool operator==(const Interval&) const = default;
};

namespace detail {
inline void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) {
    throw std::invalid_argument(std::string(what) + " must be finite");
  }
}
}  // namespace detail

/// Axis-aligned hyperrectangle: one closed interval per covariate dimension.
/// Degenerate sides (lo == hi) are allowed; inverted sides are not.
class Region {
 public:
  Region() = default;
  explicit Region(std::vector<Interval> dims) : dims_(std::move(dims)) {
    for (const auto& d : dims_) {
      detail::require_finite(d.lo, "region lo");
      detail::require_finite(d.hi, "region hi");
      if (d.lo > d.hi) {
        throw std::invalid_argument("region interval has lo > hi");
      }
    }
  }

  std::size_t dim() const { return dims_.size(); }
  const Interval& side(std::size_t d) const { return dims_[d]; }
  const std::vector<Interval>& sides() const { return dims_; }
  double lo(std::size_t d) const { return dims_[d].lo; }
  double hi(std::size_t d) const { return dims_[d].hi; }

  bool degenerate() const {
    for (const auto& d : dims_) {
      if (d.width() <= 0.0) return true;
    }
    return false;
  }

  bool operator==(const Region&) const = default;

  std::string describe() const {
    std::ostringstream os;
    for (std::size_t d = 0; d < dims_.size(); ++d) {
      os << (d ? " x " : "") << "[" << dims_[d].lo << ", " << dims_[d].hi << "]";
    }
    return os.str();
  }

 private:
  std::vector<Interval> dims_;
};

/// The ambient covariate box. Strictly non-degenerate in every dimension.
class Bounds {
 public:
  Bounds() = default;
  explicit Bounds(std::vector<Interval> dims) : dims_(std::move(dims)) {
    if (dims_.empty()) {
      throw std::invalid_argument("bounds need at least one dimension");
    }
    for (const auto& d : dims_) {
      detail::require_finite(d.lo, "bounds lo");
      detail::require_finite(d.hi, "bounds hi");
      if (d.lo >= d.hi) {
        throw std::invalid_argument("bounds interval has lo >= hi");
      }
    }
  }

  /// Same interval replicated over `dim` dimensions.
  static Bounds cube(double lo, double hi, std::size_t dim) {
    return Bounds(std::vector<Interval>(dim, Interval{lo, hi}));
  }

  std::size_t dim() const { return dims_.size(); }
  const Interval& side(std::size_t d) const { return dims_[d]; }
  double lo(std::size_t d) const { return dims_[d].lo; }
  double hi(std::size_t d) const { return dims_[d].hi; }

  Region as_region() const { return Region(dims_); }

  bool operator==(const Bounds&) const = default;

 private:
  std::vector<Interval> dims_;
};

inline double region_volume(const Region& region) {
  double v = 1.0;
  for (const auto& d : region.sides()) v *= d.width();
  return v;
}

/// Closed-interval membership on both ends.
inline bool region_contains(const Region& region, std::span<const double> point) {
  if (point.size() != region.dim()) {
    throw std::invalid_argument("point dimension does not match region");
  }
  for (std::size_t d = 0; d < region.dim(); ++d) {
    if (point[d] < region.lo(d) || point[d] > region.hi(d)) return false;
  }
  return true;
}

/// Per-dimension intersection with the ambient box.
inline Region clip_region(const Region& region, const Bounds& bounds) {
  if (region.dim() != bounds.dim()) {
    throw std::invalid_argument("region dimension does not match bounds");
  }
  std::vector<Interval> out(region.dim());
  for (std::size_t d = 0; d < region.dim(); ++d) {
    out[d].lo = std::max(region.lo(d), bounds.lo(d));
    out[d].hi = std::min(region.hi(d), bounds.hi(d));
    if (out[d].lo > out[d].hi) {
      throw std::invalid_argument("region does not intersect bounds in dimension " +
                                  std::to_string(d));
    }
  }
  return Region(std::move(out));
}

/// Side lengths as fractions of the ambient side lengths, each in [0, 1].
inline std::vector<double> side_fractions(const Region& region, const Bounds& bounds) {
  if (region.dim() != bounds.dim()) {
    throw std::invalid_argument("region dimension does not match bounds");
  }
  std::vector<double> f(region.dim());
  for (std::size_t d = 0; d < region.dim(); ++d) {
    f[d] = region.side(d).width() / bounds.side(d).width();
  }
  return f;
}

/// Row-major list of equal-width grid cells covering `bounds` exactly; cell
/// edges are computed so the outer faces coincide with the bounds bit-exactly.
inline std::vector<Region> grid_cells(const Bounds& bounds,
                                      const std::vector<int>& bins_per_dim) {
  if (bins_per_dim.size() != bounds.dim()) {
    throw std::invalid_argument("bins_per_dim must have one entry per dimension");
  }
  std::size_t total = 1;
  for (int b : bins_per_dim) {
    if (b < 1) throw std::invalid_argument("bins must be >= 1");
    total *= static_cast<std::size_t>(b);
  }
  auto edge = [&](std::size_t d, int j) {
    const int b = bins_per_dim[d];
    if (j == 0) return bounds.lo(d);
    if (j == b) return bounds.hi(d);
    return bounds.lo(d) + bounds.side(d).width() * static_cast<double>(j) /
                              static_cast<double>(b);
  };
  std::vector<Region> cells;
  cells.reserve(total);
  std::vector<int> idx(bounds.dim(), 0);
  for (std::size_t c = 0; c < total; ++c) {
    std::vector<Interval> sides(bounds.dim());
    for (std::size_t d = 0; d < bounds.dim(); ++d) {
      sides[d] = Interval{edge(d, idx[d]), edge(d, idx[d] + 1)};
    }
    cells.emplace_back(std::move(sides));
    for (std::size_t d = bounds.dim(); d-- > 0;) {
      if (++idx[d] < bins_per_dim[d]) break;
      idx[d] = 0;
    }
  }
  return cells;
}

/// Per-dimension affine change of coordinates, data = offset + scale * client.
/// Used by the empirical path where the client reasons in standardized
/// coordinates but queries must carry original-scale predicates.
struct AffineMap {
  std::vector<double> offset;
  std::vector<double> scale;  // strictly positive

  std::size_t dim() const { return offset.size(); }

  static AffineMap identity(std::size_t dim) {
    return AffineMap{std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0)};
  }

  double to_data(std::size_t d, double client) const {
    return offset[d] + scale[d] * client;
  }
  double to_client(std::size_t d, double data) const {
    return (data - offset[d]) / scale[d];
  }

  Region region_to_data(const Region& client) const {
    std::vector<Interval> out(client.dim());
    for (std::size_t d = 0; d < client.dim(); ++d) {
      out[d] = Interval{to_data(d, client.lo(d)), to_data(d, client.hi(d))};
    }
    return Region(std::move(out));
  }

  std::vector<double> point_to_client(std::span<const double> data) const {
    std::vector<double> out(data.size());
    for (std::size_t d = 0; d < data.size(); ++d) out[d] = to_client(d, data[d]);
    return out;
  }
};

}  // namespace straq

#endif  // STRAQ_REGION_HPP
