#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dgm/errors.hpp"

namespace dgm {

/// A set of points in R^d stored contiguously (point-major).
class PointSet {
 public:
  PointSet() = default;
  explicit PointSet(std::size_t dim) : dim_(dim) {}
  PointSet(std::size_t dim, std::vector<double> coords) : dim_(dim), coords_(std::move(coords)) {
    if (dim_ == 0 || coords_.size() % dim_ != 0)
      throw DimensionError("point coordinates not a multiple of the dimension");
  }

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return dim_ ? coords_.size() / dim_ : 0; }
  bool empty() const { return coords_.empty(); }

  std::span<const double> operator[](std::size_t i) const { return {coords_.data() + i * dim_, dim_}; }
  std::span<double> operator[](std::size_t i) { return {coords_.data() + i * dim_, dim_}; }

  void push_back(std::span<const double> x) {
    if (x.size() != dim_) throw DimensionError("point dimension mismatch");
    coords_.insert(coords_.end(), x.begin(), x.end());
  }
  void reserve(std::size_t n) { coords_.reserve(n * dim_); }

  const std::vector<double>& coords() const { return coords_; }

  friend bool operator==(const PointSet&, const PointSet&) = default;

 private:
  std::size_t dim_ = 0;
  std::vector<double> coords_;
};

}  // namespace dgm
