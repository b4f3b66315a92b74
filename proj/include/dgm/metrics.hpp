#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "dgm/network.hpp"
#include "dgm/points.hpp"
#include "dgm/problem.hpp"

namespace dgm {

/// Mean Euclidean distance between paired d-vectors (flat, point-major).
double err_l1(std::span<const double> pred, std::span<const double> exact, std::size_t dim);
/// Mean squared Euclidean distance (no square root).
double err_l2(std::span<const double> pred, std::span<const double> exact, std::size_t dim);

/// Uniform grid on [0,1]^d with inclusive endpoints. For d >= 3 one axis is
/// held at `slice` (default: the last axis at 0.5).
struct GridSpec {
  std::size_t dim = 2;
  std::size_t resolution = 101;
  double slice = 0.5;
  std::size_t slice_axis = 2;

  /// Number of nodes (resolution^(free axes)).
  std::size_t node_count() const;
};

PointSet make_grid(const GridSpec& spec);

struct EvalGrid {
  GridSpec spec;
  PointSet points;
  FieldValues predicted;
  // Present when the problem has an exact solution.
  std::optional<FieldValues> exact;
  std::vector<double> err_u;  // |U - u| per node
  std::vector<double> err_p;  // |(P - mean P) - (p - mean p)| per node
  double err_l1 = 0.0;
  double err_l2 = 0.0;
  double pressure_err_l2 = 0.0;  // mean of err_p^2
};

/// Fills every node with the network prediction and, if available, the exact
/// solution and pointwise errors. Throws DomainError for a slice outside [0,1].
EvalGrid eval_grid(const NetworkParams& params, const StokesProblem& problem, const GridSpec& spec);

/// Subtracts the mean in place; returns the mean.
double remove_mean(std::span<double> values);

}  // namespace dgm
