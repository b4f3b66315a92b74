#include "dgm/metrics.hpp"

#include <cmath>

#include "dgm/errors.hpp"

namespace dgm {

namespace {

void check_pair(std::span<const double> pred, std::span<const double> exact, std::size_t dim) {
  if (dim == 0 || pred.size() != exact.size() || pred.size() % dim != 0)
    throw DimensionError("error norm: fields have lengths " + std::to_string(pred.size()) + " and " +
                         std::to_string(exact.size()) + " for dimension " + std::to_string(dim));
  if (pred.empty()) throw DimensionError("error norm: empty fields");
}

double sq_dist(const double* a, const double* b, std::size_t dim) {
  double s = 0.0;
  for (std::size_t k = 0; k < dim; ++k) {
    const double e = a[k] - b[k];
    s += e * e;
  }
  return s;
}

}  // namespace

double err_l1(std::span<const double> pred, std::span<const double> exact, std::size_t dim) {
  check_pair(pred, exact, dim);
  const std::size_t n = pred.size() / dim;
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::sqrt(sq_dist(pred.data() + i * dim, exact.data() + i * dim, dim));
  return s / static_cast<double>(n);
}

double err_l2(std::span<const double> pred, std::span<const double> exact, std::size_t dim) {
  check_pair(pred, exact, dim);
  const std::size_t n = pred.size() / dim;
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += sq_dist(pred.data() + i * dim, exact.data() + i * dim, dim);
  return s / static_cast<double>(n);
}

std::size_t GridSpec::node_count() const {
  std::size_t n = 1;
  const std::size_t free_axes = dim >= 3 ? dim - 1 : dim;
  for (std::size_t a = 0; a < free_axes; ++a) n *= resolution;
  return n;
}

PointSet make_grid(const GridSpec& spec) {
  if (spec.dim < 2) throw ConfigError("grid dimension must be >= 2");
  if (spec.resolution < 2) throw ConfigError("grid resolution must be >= 2");
  if (spec.dim >= 3) {
    if (!(spec.slice >= 0.0 && spec.slice <= 1.0))
      throw DomainError("slice coordinate " + std::to_string(spec.slice) + " outside [0, 1]");
    if (spec.slice_axis >= spec.dim) throw ConfigError("slice axis out of range");
  }
  const std::size_t d = spec.dim;
  const std::size_t n = spec.node_count();
  const double h = 1.0 / static_cast<double>(spec.resolution - 1);
  PointSet pts(d);
  pts.reserve(n);
  std::vector<double> x(d);
  std::vector<std::size_t> free_axes;
  for (std::size_t a = 0; a < d; ++a)
    if (d < 3 || a != spec.slice_axis) free_axes.push_back(a);
  for (std::size_t node = 0; node < n; ++node) {
    // First free axis varies fastest.
    std::size_t rem = node;
    for (std::size_t a : free_axes) {
      x[a] = static_cast<double>(rem % spec.resolution) * h;
      rem /= spec.resolution;
    }
    if (d >= 3) x[spec.slice_axis] = spec.slice;
    pts.push_back(x);
  }
  return pts;
}

double remove_mean(std::span<double> values) {
  if (values.empty()) return 0.0;
  double s = 0.0;
  for (double v : values) s += v;
  const double mean = s / static_cast<double>(values.size());
  for (double& v : values) v -= mean;
  return mean;
}

EvalGrid eval_grid(const NetworkParams& params, const StokesProblem& problem, const GridSpec& spec) {
  if (spec.dim != problem.dim || params.arch.input_dim != problem.dim)
    throw DimensionError("eval_grid: grid, network and problem dimensions disagree");
  EvalGrid grid;
  grid.spec = spec;
  grid.points = make_grid(spec);
  grid.predicted = predict_batch(params, grid.points);
  if (!problem.exact) return grid;

  const std::size_t d = problem.dim;
  const std::size_t n = grid.points.size();
  FieldValues ex;
  ex.dim = d;
  ex.u.resize(n * d);
  ex.p.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const FlowPoint e = (*problem.exact)(grid.points[i]);
    std::copy(e.u.begin(), e.u.end(), ex.u.begin() + i * d);
    ex.p[i] = e.p;
  }
  std::vector<double> pc = grid.predicted.p, ec = ex.p;
  remove_mean(pc);
  remove_mean(ec);
  grid.err_u.resize(n);
  grid.err_p.resize(n);
  double p2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    grid.err_u[i] = std::sqrt(sq_dist(grid.predicted.u.data() + i * d, ex.u.data() + i * d, d));
    grid.err_p[i] = std::abs(pc[i] - ec[i]);
    p2 += grid.err_p[i] * grid.err_p[i];
  }
  grid.err_l1 = err_l1(grid.predicted.u, ex.u, d);
  grid.err_l2 = err_l2(grid.predicted.u, ex.u, d);
  grid.pressure_err_l2 = p2 / static_cast<double>(n);
  grid.exact = std::move(ex);
  return grid;
}

}  // namespace dgm
