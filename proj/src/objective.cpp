#include "dgm/objective.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dgm/autodiff.hpp"
#include "dgm/errors.hpp"

namespace dgm {

namespace {

std::string point_string(std::span<const double> x) {
  std::ostringstream os;
  os.precision(17);
  os << '(';
  for (std::size_t i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
  os << ')';
  return os.str();
}

void check_inputs(const NetworkParams& params, const StokesProblem& problem, const PointSet& interior,
                  const PointSet& boundary) {
  if (interior.empty() || boundary.empty()) throw DimensionError("objective needs non-empty interior and boundary batches");
  const std::size_t d = problem.dim;
  if (params.arch.input_dim != d || interior.dim() != d || boundary.dim() != d)
    throw DimensionError("objective: network, problem and batch dimensions disagree");
}

// Points are processed in chunks so the tape of one chunk stays cache-resident;
// chunks are visited in ascending order, which keeps the reduction deterministic.
constexpr std::size_t kChunk = 128;

PointSet slice(const PointSet& pts, std::size_t start, std::size_t n) {
  const auto first = pts.coords().begin() + static_cast<std::ptrdiff_t>(start * pts.dim());
  return PointSet(pts.dim(), std::vector<double>(first, first + static_cast<std::ptrdiff_t>(n * pts.dim())));
}

ObjectiveGradient evaluate(const NetworkParams& params, const StokesProblem& problem, const PointSet& interior,
                           const PointSet& boundary, const LossWeights& w, bool with_gradient) {
  check_inputs(params, problem, interior, boundary);
  const std::size_t d = problem.dim;
  const std::size_t ni = interior.size();
  const std::size_t nb = boundary.size();
  const double inv_i = 1.0 / static_cast<double>(ni);
  const double inv_b = 1.0 / static_cast<double>(nb);

  ObjectiveGradient out;
  std::span<double> g1, g2;
  if (with_gradient) {
    out.gradient.assign(params.size(), 0.0);
    g1 = std::span<double>(out.gradient.data(), params.theta1.size());
    g2 = std::span<double>(out.gradient.data() + params.theta1.size(), params.theta2.size());
  }

  std::vector<double> u(d), lap(d), gp(d), res(d), g(d);
  double residual_sum = 0.0, divergence_sum = 0.0, boundary_sum = 0.0;

  for (std::size_t start = 0; start < ni; start += kChunk) {
    const std::size_t n = std::min(kChunk, ni - start);
    PointSet part;
    const PointSet& pts = n == ni ? interior : (part = slice(interior, start, n));
    const ExtendedEval ev = forward_extended(params, Net::velocity, pts, DerivOrder::second);
    const ExtendedEval ep = forward_extended(params, Net::pressure, pts, DerivOrder::first);
    ExtendedBlock sv, sp;
    if (with_gradient) {
      sv = ev.make_seed();
      sp = ep.make_seed();
    }
    for (std::size_t p = 0; p < n; ++p) {
      double div = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        u[k] = ev.value(k, p);
        lap[k] = ev.laplacian(k, p);
        gp[k] = ep.jac(0, k, p);
        div += ev.jac(k, k, p);
      }
      apply_operator(problem, pts[p], u, lap, gp, res);
      double r2 = 0.0;
      for (double r : res) r2 += r * r;
      if (!std::isfinite(r2) || !std::isfinite(div))
        throw NumericError("non-finite residual at interior point " + point_string(pts[p]));
      residual_sum += r2;
      divergence_sum += div * div;
      if (with_gradient) {
        const double cr = 2.0 * w.residual * inv_i;
        const double cd = 2.0 * w.divergence * inv_i * div;
        for (std::size_t k = 0; k < d; ++k) {
          sv.value(k, p) = cr * res[k] * problem.alpha;
          for (std::size_t j = 0; j < d; ++j) sv.d2(k, j, p) = -cr * res[k] * problem.nu;
          sp.jac(0, k, p) = cr * res[k];
          sv.jac(k, k, p) = cd;
        }
      }
    }
    if (with_gradient) {
      backward_params_accumulate(ev, sv, g1);
      backward_params_accumulate(ep, sp, g2);
    }
  }

  for (std::size_t start = 0; start < nb; start += kChunk) {
    const std::size_t n = std::min(kChunk, nb - start);
    PointSet part;
    const PointSet& pts = n == nb ? boundary : (part = slice(boundary, start, n));
    const ExtendedEval eb = forward_extended(params, Net::velocity, pts, DerivOrder::value);
    ExtendedBlock sb;
    if (with_gradient) sb = eb.make_seed();
    for (std::size_t q = 0; q < n; ++q) {
      problem.boundary(pts[q], g);
      double e2 = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        const double e = eb.value(k, q) - g[k];
        e2 += e * e;
        if (with_gradient) sb.value(k, q) = 2.0 * w.boundary * inv_b * e;
      }
      if (!std::isfinite(e2)) throw NumericError("non-finite boundary mismatch at point " + point_string(pts[q]));
      boundary_sum += e2;
    }
    if (with_gradient) backward_params_accumulate(eb, sb, g1);
  }

  out.loss.residual = residual_sum * inv_i;
  out.loss.divergence = divergence_sum * inv_i;
  out.loss.boundary = boundary_sum * inv_b;
  out.loss.total = w.residual * out.loss.residual + w.divergence * out.loss.divergence +
                   w.boundary * out.loss.boundary;
  return out;
}

PointSet single(std::span<const double> x) {
  PointSet s(x.size());
  s.push_back(x);
  return s;
}

}  // namespace

LossBreakdown batch_objective(const NetworkParams& params, const StokesProblem& problem, const PointSet& interior,
                              const PointSet& boundary, const LossWeights& weights) {
  return evaluate(params, problem, interior, boundary, weights, false).loss;
}

ObjectiveGradient objective_gradient(const NetworkParams& params, const StokesProblem& problem,
                                     const PointSet& interior, const PointSet& boundary,
                                     const LossWeights& weights) {
  return evaluate(params, problem, interior, boundary, weights, true);
}

double point_loss(const NetworkParams& params, const StokesProblem& problem, std::span<const double> x,
                  std::span<const double> r) {
  return batch_objective(params, problem, single(x), single(r)).total;
}

ObjectiveGradient point_loss_gradient(const NetworkParams& params, const StokesProblem& problem,
                                      std::span<const double> x, std::span<const double> r) {
  return objective_gradient(params, problem, single(x), single(r));
}

}  // namespace dgm
