#include <algorithm>
#include <cmath>
#include <string>

#include "doctest.h"
#include "dgm/errors.hpp"
#include "dgm/objective.hpp"
#include "dgm/verifier.hpp"
#include "test_support.hpp"

using namespace dgm;

namespace {

StokesProblem homogeneous(std::size_t dim) {
  StokesProblem p = make_problem(dim == 2 ? "stokes2d" : "stokes3d");
  p.forcing = [](std::span<const double>, std::span<double> out) { std::fill(out.begin(), out.end(), 0.0); };
  p.boundary = p.forcing;
  p.exact.reset();
  return p;
}

PointSet one(std::vector<double> x) {
  PointSet s(x.size());
  s.push_back(x);
  return s;
}

}  // namespace

TEST_SUITE("objective") {

TEST_CASE("zero network on a homogeneous problem has zero loss and zero gradient") {
  const NetworkParams p(Architecture::arch(2, 2));
  const StokesProblem problem = homogeneous(2);
  CHECK(point_loss(p, problem, std::vector<double>{0.3, 0.4}, std::vector<double>{0.0, 0.5}) == 0.0);
  const ObjectiveGradient g =
      objective_gradient(p, problem, test::random_interior(2, 20, 1), test::random_boundary(2, 5, 2));
  CHECK(g.loss.total == 0.0);
  for (double v : g.gradient) CHECK(v == 0.0);
}

TEST_CASE("zero network on a manufactured problem: loss is |f|^2") {
  const NetworkParams p(Architecture::arch(1, 3));
  const StokesProblem problem = make_problem("general_stokes3d");
  const std::vector<double> x{0.2, 0.6, 0.3}, r{0.4, 1.0, 0.2};
  const std::vector<double> f = problem.f(x);
  double f2 = 0.0;
  for (double v : f) f2 += v * v;
  CHECK(point_loss(p, problem, x, r) == doctest::Approx(f2).epsilon(1e-15));
}

TEST_CASE("point loss equals a predict-plus-finite-difference recomputation") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const NetworkParams p = test::random_params(Architecture::arch(1, 2), seed);
    const StokesProblem problem = make_problem(seed % 2 ? "stokes2d" : "general_stokes2d");
    const std::vector<double> x{0.3 + 0.05 * static_cast<double>(seed), 0.7}, r{1.0, 0.25};
    const double ad = point_loss(p, problem, x, r);
    const double fd = fd_objective(network_field(p), problem, one(x), one(r)).total;
    CHECK(std::abs(ad - fd) <= 1e-5 * std::abs(fd));
  }
}

TEST_CASE("single-point batches reproduce the point loss decomposition") {
  const NetworkParams p = test::random_params(Architecture::arch(2, 2), 3);
  const StokesProblem problem = make_problem("stokes2d");
  const std::vector<double> x{0.1, 0.9}, r{0.0, 0.4};
  const LossBreakdown b = batch_objective(p, problem, one(x), one(r));
  CHECK(b.total == point_loss(p, problem, x, r));
  CHECK(b.total == doctest::Approx(b.residual + b.divergence + b.boundary).epsilon(1e-15));
}

TEST_CASE("duplicating every point leaves the breakdown unchanged") {
  const NetworkParams p = test::random_params(Architecture::arch(2, 3), 4);
  const StokesProblem problem = make_problem("stokes3d");
  const PointSet in = test::random_interior(3, 30, 1), bd = test::random_boundary(3, 10, 2);
  PointSet in2(3), bd2(3);
  for (std::size_t i = 0; i < in.size(); ++i) {
    in2.push_back(in[i]);
    in2.push_back(in[i]);
  }
  for (std::size_t i = 0; i < bd.size(); ++i) {
    bd2.push_back(bd[i]);
    bd2.push_back(bd[i]);
  }
  const LossBreakdown a = batch_objective(p, problem, in, bd), b = batch_objective(p, problem, in2, bd2);
  CHECK(a.residual == doctest::Approx(b.residual).epsilon(1e-14));
  CHECK(a.divergence == doctest::Approx(b.divergence).epsilon(1e-14));
  CHECK(a.boundary == doctest::Approx(b.boundary).epsilon(1e-14));
}

TEST_CASE("terms are non-negative and total is their sum") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const std::size_t d = 2 + seed % 2;
    const NetworkParams p = test::random_params(Architecture::arch(1 + seed % 3, d), seed);
    const StokesProblem problem = make_problem(d == 2 ? "cavity2d" : "general_stokes3d");
    const LossBreakdown b =
        batch_objective(p, problem, test::random_interior(d, 300, seed), test::random_boundary(d, 70, seed));
    CHECK(b.residual >= 0.0);
    CHECK(b.divergence >= 0.0);
    CHECK(b.boundary >= 0.0);
    CHECK(std::abs(b.total - (b.residual + b.divergence + b.boundary)) <= 1e-14 * b.total);
  }
}

TEST_CASE("loss weights scale the total only") {
  const NetworkParams p = test::random_params(Architecture::arch(1, 2), 6);
  const StokesProblem problem = make_problem("stokes2d");
  const PointSet in = test::random_interior(2, 10, 3), bd = test::random_boundary(2, 4, 3);
  const LossBreakdown u = batch_objective(p, problem, in, bd);
  const LossBreakdown w = batch_objective(p, problem, in, bd, LossWeights{2.0, 0.5, 3.0});
  CHECK(w.residual == u.residual);
  CHECK(w.boundary == u.boundary);
  CHECK(w.total == doctest::Approx(2.0 * u.residual + 0.5 * u.divergence + 3.0 * u.boundary).epsilon(1e-15));
}

TEST_CASE("objective gradient matches parameter finite differences") {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const NetworkParams p = test::random_params(Architecture::arch(1, 2), seed);
    const StokesProblem problem = make_problem(seed == 1 ? "cavity2d" : "stokes2d");
    const PointSet in = test::random_interior(2, 10, seed), bd = test::random_boundary(2, 10, seed + 50);
    const ObjectiveGradient g = objective_gradient(p, problem, in, bd);
    const std::vector<double> fd =
        fd_param_gradient([&](const NetworkParams& q) { return batch_objective(q, problem, in, bd).total; }, p);
    CHECK(relative_error(g.gradient, fd) <= 1e-5);
  }
}

TEST_CASE("mean of paired single-sample gradients equals the batch gradient") {
  const NetworkParams p = test::random_params(Architecture::arch(2, 2), 9);
  const StokesProblem problem = make_problem("general_stokes2d");
  const PointSet in = test::random_interior(2, 12, 1), bd = test::random_boundary(2, 12, 2);
  std::vector<double> mean(p.size(), 0.0);
  for (std::size_t n = 0; n < in.size(); ++n) {
    const ObjectiveGradient g = point_loss_gradient(p, problem, in[n], bd[n]);
    for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += g.gradient[k] / 12.0;
  }
  const ObjectiveGradient full = objective_gradient(p, problem, in, bd);
  double worst = 0.0, scale = 0.0;
  for (std::size_t k = 0; k < mean.size(); ++k) {
    worst = std::max(worst, std::abs(mean[k] - full.gradient[k]));
    scale = std::max(scale, std::abs(full.gradient[k]));
  }
  CHECK(worst <= 1e-12 * scale);
}

TEST_CASE("pressure gauge: a constant shift of P changes no term") {
  NetworkParams p = test::random_params(Architecture::arch(2, 2), 10);
  const StokesProblem problem = make_problem("stokes2d");
  const PointSet in = test::random_interior(2, 40, 1), bd = test::random_boundary(2, 10, 2);
  const LossBreakdown before = batch_objective(p, problem, in, bd);
  p.theta2[p.pressure_layout.layers().back().bias_offset] += 3.25;
  const LossBreakdown after = batch_objective(p, problem, in, bd);
  CHECK(after.residual == before.residual);
  CHECK(after.divergence == before.divergence);
  CHECK(after.boundary == before.boundary);
}

TEST_CASE("gradients separate into the velocity and pressure blocks") {
  const NetworkParams p = test::random_params(Architecture::arch(1, 2), 12);
  const StokesProblem problem = make_problem("stokes2d");
  const ObjectiveGradient g =
      objective_gradient(p, problem, test::random_interior(2, 8, 1), test::random_boundary(2, 4, 1));
  CHECK(g.gradient.size() == p.theta1.size() + p.theta2.size());
  // The pressure output bias enters only through grad P, so its gradient is exactly zero.
  CHECK(g.gradient[p.theta1.size() + p.pressure_layout.layers().back().bias_offset] == 0.0);
}

TEST_CASE("error reporting") {
  const NetworkParams p = test::random_params(Architecture::arch(1, 2), 1);
  StokesProblem problem = make_problem("stokes2d");
  CHECK_THROWS_AS(batch_objective(p, problem, PointSet(2), test::random_boundary(2, 3, 1)), DimensionError);
  CHECK_THROWS_AS(batch_objective(p, problem, test::random_interior(2, 3, 1), PointSet(2)), DimensionError);
  CHECK_THROWS_AS(batch_objective(p, make_problem("stokes3d"), test::random_interior(3, 3, 1),
                                  test::random_boundary(3, 3, 1)),
                  DimensionError);
  problem.forcing = [](std::span<const double> x, std::span<double> out) {
    out[0] = x[0] > 0.5 ? NAN : 0.0;
    out[1] = 0.0;
  };
  try {
    point_loss(p, problem, std::vector<double>{0.75, 0.5}, std::vector<double>{0.0, 0.5});
    FAIL("expected a NumericError");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("(0.75, 0.5)") != std::string::npos);
  }
}

TEST_CASE("the exact solution zeroes the objective") {
  for (const char* name : {"stokes2d", "general_stokes2d", "stokes3d", "general_stokes3d"}) {
    const StokesProblem problem = make_problem(name);
    const LossBreakdown b = fd_objective(*problem.exact, problem, test::random_interior(problem.dim, 50, 1),
                                         test::random_boundary(problem.dim, 20, 2));
    CHECK(b.total <= 1e-8);
  }
}

}  // TEST_SUITE
