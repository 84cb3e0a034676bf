/*
 * Copyright 2026 The straq Authors
 * License: Apache License 2.0
 */
#ifndef STRAQ_DATA_HPP
#define STRAQ_DATA_HPP

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "straq/region.hpp"

namespace straq {

/// Individual-level experimental data: covariates, binary treatment, outcome.
/// Row storage is flat row-major; rows are immutable once built.
class Dataset {
 public:
  Dataset(std::size_t dim, double propensity) : dim_(dim), propensity_(propensity) {
    if (dim == 0) throw std::invalid_argument("dataset dimension must be >= 1");
    if (!(propensity > 0.0 && propensity < 1.0)) {
      throw std::invalid_argument("treatment propensity must lie strictly in (0,1)");
    }
  }

  void push_row(std::span<const double> covariates, int treatment, double outcome) {
    if (covariates.size() != dim_) {
      throw std::invalid_argument("covariate dimension mismatch");
    }
    if (treatment != 0 && treatment != 1) {
      throw std::invalid_argument("treatment must be 0 or 1");
    }
    x_.insert(x_.end(), covariates.begin(), covariates.end());
    w_.push_back(static_cast<std::uint8_t>(treatment));
    y_.push_back(outcome);
  }

  std::size_t size() const { return w_.size(); }
  std::size_t dim() const { return dim_; }
  double propensity() const { return propensity_; }

  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(x_.data() + i * dim_, dim_);
  }
  int treatment(std::size_t i) const { return w_[i]; }
  double outcome(std::size_t i) const { return y_[i]; }

 private:
  std::size_t dim_;
  double propensity_;
  std::vector<double> x_;
  std::vector<std::uint8_t> w_;
  std::vector<double> y_;
};

/// Ground-truth carrier for the synthetic harness: covariates plus the true
/// conditional treatment effect at each unit.
class Population {
 public:
  explicit Population(std::size_t dim) : dim_(dim) {
    if (dim == 0) throw std::invalid_argument("population dimension must be >= 1");
  }

  void push_row(std::span<const double> covariates, double true_effect) {
    if (covariates.size() != dim_) {
      throw std::invalid_argument("covariate dimension mismatch");
    }
    x_.insert(x_.end(), covariates.begin(), covariates.end());
    tau_.push_back(true_effect);
  }

  std::size_t size() const { return tau_.size(); }
  std::size_t dim() const { return dim_; }

  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(x_.data() + i * dim_, dim_);
  }
  double true_effect(std::size_t i) const { return tau_[i]; }

 private:
  std::size_t dim_;
  std::vector<double> x_;
  std::vector<double> tau_;
};

}  // namespace straq

#endif  // STRAQ_DATA_HPP
