#include <atomic>
#include <cmath>
#include <memory>

#include "doctest.h"
#include "dgm/errors.hpp"
#include "dgm/trainer.hpp"
#include "test_support.hpp"

using namespace dgm;

namespace {

TrainConfig small_config(std::int64_t iterations) {
  TrainConfig c;
  c.max_iterations = iterations;
  c.interior_batch = 16;
  c.boundary_batch = 8;
  c.eval_every = 10;
  c.eval_resolution = 11;
  c.seed = 5;
  c.deterministic = true;
  return c;
}

}  // namespace

TEST_SUITE("trainer") {

TEST_CASE("learning-rate schedule") {
  TrainConfig c;
  c.lr0 = 0.01;
  c.lr_decay = 1e-4;
  CHECK(lr_schedule(c, 0) == 0.01);
  CHECK(lr_schedule(c, 10000) == doctest::Approx(0.005).epsilon(1e-15));
  CHECK(lr_schedule(c, 20) < lr_schedule(c, 19));
  c.lr_decay = 0.0;
  CHECK(lr_schedule(c, 123456) == 0.01);
}

TEST_CASE("default decay depends on the optimizer") {
  TrainConfig c;
  c.optimizer = Optimizer::adam;
  CHECK(c.decay() == 0.0);
  c.optimizer = Optimizer::sgd;
  CHECK(c.decay() == 1e-4);
  c.lr_decay = 3e-3;
  CHECK(c.decay() == 3e-3);
}

TEST_CASE("invalid configurations") {
  TrainConfig c;
  c.lr0 = 1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.lr0 = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = TrainConfig{};
  c.max_iterations = -1;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = TrainConfig{};
  c.interior_batch = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = TrainConfig{};
  c.lr_decay = -1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK_THROWS_AS(parse_optimizer("rmsprop"), ConfigError);
  CHECK(parse_optimizer("sgd") == Optimizer::sgd);
}

TEST_CASE("eval-only run records the initial state and leaves params unchanged") {
  const StokesProblem problem = make_problem("stokes2d");
  const Dataset ds = sample_dataset(2, 100, 0.2, 1);
  const NetworkParams p0 = init_params(Architecture::arch(1, 2), 3);
  const TrainHistory h = train(problem, ds, p0, small_config(0));
  REQUIRE(h.records.size() == 1);
  CHECK(h.records[0].iteration == 0);
  CHECK(h.iterations == 0);
  CHECK(h.reason == TerminationReason::max_iters);
  CHECK(h.final_params.flat() == p0.flat());
  CHECK(h.records[0].loss.total == batch_objective(p0, problem, ds.interior, ds.boundary).total);
}

TEST_CASE("one small SGD step decreases the batch objective") {
  for (std::uint64_t cfg = 0; cfg < 20; ++cfg) {
    const std::size_t d = 2 + cfg % 2;
    const StokesProblem problem = make_problem(d == 2 ? "general_stokes2d" : "stokes3d");
    NetworkParams p = test::random_params(Architecture::arch(1 + cfg % 3, d), cfg);
    const PointSet in = test::random_interior(d, 16, cfg), bd = test::random_boundary(d, 8, cfg + 100);
    const ObjectiveGradient g = objective_gradient(p, problem, in, bd);
    OptimizerState opt(Optimizer::sgd, p.size());
    std::vector<double> flat = p.flat();
    opt.step(flat, g.gradient, 1e-6);
    p.assign_flat(flat);
    const double after = batch_objective(p, problem, in, bd).total;
    CHECK(after - g.loss.total <= 1e-15);
  }
}

TEST_CASE("1-unit net on a single fixed sample: point loss strictly decreases") {
  const StokesProblem problem = make_problem("stokes2d");
  Dataset ds;
  ds.interior = PointSet(2);
  ds.boundary = PointSet(2);
  ds.interior.push_back(std::vector<double>{0.3, 0.6});
  ds.boundary.push_back(std::vector<double>{0.0, 0.4});
  ds.total = 2;
  TrainConfig c = small_config(100);
  c.optimizer = Optimizer::sgd;
  c.lr0 = 1e-3;
  c.lr_decay = 0.0;
  c.interior_batch = c.boundary_batch = 1;
  c.eval_every = 1;
  c.grad_norm_tolerance = 0.0;
  const TrainHistory h = train(problem, ds, test::random_params(Architecture::arch(1, 2, 1), 4), c);
  REQUIRE(h.records.size() == 101);
  for (std::size_t i = 1; i <= 10; ++i) CHECK(h.records[i].loss.total < h.records[i - 1].loss.total);
  const NetworkParams& fin = h.final_params;
  CHECK(h.records.back().loss.total == point_loss(fin, problem, ds.interior[0], ds.boundary[0]));
}

TEST_CASE("a tolerance above the initial gradient norm stops at iteration 1") {
  TrainConfig c = small_config(1000);
  c.grad_norm_tolerance = 1e12;
  const TrainHistory h =
      train(make_problem("stokes2d"), sample_dataset(2, 100, 0.2, 1), Architecture::arch(1, 2), c);
  CHECK(h.reason == TerminationReason::grad_norm);
  CHECK(h.iterations == 1);
  CHECK(h.records.back().iteration == 1);
}

TEST_CASE("histories are deterministic and well ordered") {
  const StokesProblem problem = make_problem("stokes2d");
  const Dataset ds = sample_dataset(2, 100, 0.2, 9);
  const TrainHistory a = train(problem, ds, Architecture::arch(2, 2), small_config(60));
  const TrainHistory b = train(problem, ds, Architecture::arch(2, 2), small_config(60));
  REQUIRE(a.records.size() == 7);
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].iteration == b.records[i].iteration);
    CHECK(a.records[i].loss.total == b.records[i].loss.total);
    CHECK(a.records[i].err_l2 == b.records[i].err_l2);
    CHECK(a.records[i].wall_ms == 0.0);
    if (i) CHECK(a.records[i].iteration > a.records[i - 1].iteration);
  }
  CHECK(a.final_params.flat() == b.final_params.flat());
  CHECK(a.sampler_state == b.sampler_state);

  TrainConfig timed = small_config(30);
  timed.deterministic = false;
  const TrainHistory t = train(problem, ds, Architecture::arch(1, 2), timed);
  for (std::size_t i = 1; i < t.records.size(); ++i) CHECK(t.records[i].wall_ms >= t.records[i - 1].wall_ms);
}

TEST_CASE("training reduces the objective") {
  TrainConfig c = small_config(1000);
  c.eval_every = 1000;
  const TrainHistory h =
      train(make_problem("stokes2d"), sample_dataset(2, 200, 0.2, 2), Architecture::arch(1, 2), c);
  REQUIRE(h.records.size() == 2);
  CHECK(h.records.back().loss.total < h.records.front().loss.total);
  CHECK(h.records.back().err_l2 < h.records.front().err_l2);
}

TEST_CASE("divergence keeps the last finite parameters") {
  StokesProblem problem = make_problem("stokes2d");
  auto calls = std::make_shared<int>(0);
  const VectorField f = problem.forcing;
  problem.forcing = [calls, f](std::span<const double> x, std::span<double> out) {
    f(x, out);
    if (++*calls > 300) out[0] = NAN;
  };
  TrainConfig c = small_config(1000);
  c.eval_every = 1;
  NetworkParams last_recorded;
  TrainHooks hooks;
  hooks.on_record = [&](const HistoryRecord&, const NetworkParams& p) { last_recorded = p; };
  const TrainHistory h = train(problem, sample_dataset(2, 40, 0.2, 3), Architecture::arch(1, 2), c, hooks);
  CHECK(h.reason == TerminationReason::diverged);
  CHECK(h.iterations < 1000);
  CHECK(h.final_params.flat() == last_recorded.flat());
  for (const HistoryRecord& r : h.records) CHECK(std::isfinite(r.loss.total));
}

TEST_CASE("a raised stop flag ends training with reason user") {
  std::atomic<bool> stop{true};
  TrainHooks hooks;
  hooks.stop = &stop;
  const TrainHistory h = train(make_problem("stokes2d"), sample_dataset(2, 100, 0.2, 1),
                               Architecture::arch(1, 2), small_config(100), hooks);
  CHECK(h.reason == TerminationReason::user);
  CHECK(h.iterations == 0);
  CHECK(h.records.size() == 1);
}

TEST_CASE("dimension mismatches are rejected") {
  CHECK_THROWS_AS(train(make_problem("stokes3d"), sample_dataset(2, 100, 0.2, 1), Architecture::arch(1, 2),
                        small_config(1)),
                  DimensionError);
}

TEST_CASE("optimizer updates") {
  SUBCASE("sgd is theta - lr * g") {
    OptimizerState opt(Optimizer::sgd, 2);
    std::vector<double> th{1.0, -2.0};
    opt.step(th, std::vector<double>{0.5, 4.0}, 0.25);
    CHECK(th == std::vector<double>{0.875, -3.0});
  }
  SUBCASE("first Adam step moves each coordinate by lr * g / (|g| + eps)") {
    OptimizerState opt(Optimizer::adam, 2);
    std::vector<double> th{0.0, 0.0};
    opt.step(th, std::vector<double>{2.0, -1e-3}, 1e-2);
    CHECK(th[0] == doctest::Approx(-1e-2 * 2.0 / (2.0 + 1e-8)).epsilon(1e-12));
    CHECK(th[1] == doctest::Approx(1e-2 * 1e-3 / (1e-3 + 1e-8)).epsilon(1e-12));
    CHECK(opt.steps() == 1);
  }
  SUBCASE("length mismatch") {
    OptimizerState opt(Optimizer::adam, 2);
    std::vector<double> th{0.0, 0.0};
    CHECK_THROWS_AS(opt.step(th, std::vector<double>{1.0}, 0.1), DimensionError);
  }
}

}  // TEST_SUITE
