#include <cmath>
#include <numbers>

#include "doctest.h"
#include "dgm/errors.hpp"
#include "dgm/metrics.hpp"
#include "dgm/problem.hpp"
#include "dgm/verifier.hpp"
#include "test_support.hpp"

using namespace dgm;
using std::numbers::pi;

// Regression constants below come from tests/oracles/manufactured.py (exact
// symbolic differentiation), computed before these tests were written.

TEST_SUITE("problem") {

TEST_CASE("2D manufactured solution at reference points") {
  const std::vector<double> edge{0.0, 0.3};
  FlowPoint f = exact_solution_2d(edge);
  CHECK(f.u[0] == 0.0);
  CHECK(std::abs(f.u[1]) <= 1e-15);

  f = exact_solution_2d(std::vector<double>{0.5, 0.5});
  CHECK(std::abs(f.u[0]) <= 1e-15);
  CHECK(std::abs(f.u[1]) <= 1e-15);
  CHECK(std::abs(f.p) <= 1e-15);

  f = exact_solution_2d(std::vector<double>{0.25, 0.25});
  CHECK(f.u[0] == doctest::Approx(1.5707963267948966).epsilon(1e-15));
  CHECK(f.u[1] == doctest::Approx(-1.5707963267948966).epsilon(1e-15));
  CHECK(f.p == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("3D manufactured solution at reference points") {
  FlowPoint f = exact_solution_3d(std::vector<double>{0.5, 0.5, 0.5});
  for (double v : f.u) CHECK(std::abs(v) <= 1e-15);
  CHECK(std::abs(f.p) <= 1e-15);

  f = exact_solution_3d(std::vector<double>{0.25, 0.5, 0.75});
  CHECK(f.u[0] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(f.u[1] == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(f.u[2] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(f.p == doctest::Approx(-0.5).epsilon(1e-14));
}

TEST_CASE("manufactured velocities vanish on the boundary") {
  for (std::size_t d : {2u, 3u}) {
    const PointSet pts = test::random_boundary(d, 500, 10 + d);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const FlowPoint f = d == 2 ? exact_solution_2d(pts[i]) : exact_solution_3d(pts[i]);
      double n2 = 0.0;
      for (double v : f.u) n2 += v * v;
      CHECK(std::sqrt(n2) <= 1e-12);
    }
  }
}

TEST_CASE("closed-form forcing at reference points") {
  const std::vector<double> x2{0.25, 0.25};
  std::vector<double> f(2);
  derive_forcing(0.0, 0.025, 2)(x2, f);
  CHECK(f[0] == doctest::Approx(-0.02048249277990561).epsilon(1e-12));
  CHECK(f[1] == doctest::Approx(-3.1211101608098875).epsilon(1e-13));
  derive_forcing(1.0, 1.0, 2)(x2, f);
  CHECK(f[0] == doctest::Approx(62.01255336059964).epsilon(1e-13));
  CHECK(f[1] == doctest::Approx(-65.154146014189436).epsilon(1e-13));

  const std::vector<double> x3{0.25, 0.5, 0.75};
  std::vector<double> g(3);
  derive_forcing(0.0, 0.025, 3)(x3, g);
  CHECK(g[0] == doctest::Approx(-0.83057599671319471).epsilon(1e-13));
  CHECK(g[1] == doctest::Approx(-1.4804406601634037).epsilon(1e-13));
  CHECK(g[2] == doctest::Approx(-0.83057599671319471).epsilon(1e-13));
  derive_forcing(1.0, 1.0, 3)(x3, g);
  CHECK(g[0] == doctest::Approx(28.538016876473179).epsilon(1e-13));
  CHECK(g[1] == doctest::Approx(-60.217626406536155).epsilon(1e-13));
  CHECK(g[2] == doctest::Approx(28.538016876473179).epsilon(1e-13));
}

TEST_CASE("forcing is linear in alpha") {
  for (std::size_t d : {2u, 3u}) {
    const PointSet pts = test::random_interior(d, 50, d);
    std::vector<double> f0(d), f1(d);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      derive_forcing(0.0, 0.7, d)(pts[i], f0);
      derive_forcing(1.0, 0.7, d)(pts[i], f1);
      const FlowPoint e = d == 2 ? exact_solution_2d(pts[i]) : exact_solution_3d(pts[i]);
      for (std::size_t k = 0; k < d; ++k) CHECK(std::abs((f0[k] - f1[k]) + e.u[k]) <= 1e-12);
    }
  }
}

TEST_CASE("closed-form forcing agrees with finite differences of the exact solution") {
  for (std::size_t d : {2u, 3u}) {
    for (auto [alpha, nu] : {std::pair{0.0, 0.025}, std::pair{1.0, 1.0}}) {
      const StokesProblem problem = make_problem(d == 2 ? "stokes2d" : "stokes3d", alpha, nu);
      const PointSet pts = test::random_interior(d, 100, 31 + d);
      for (std::size_t i = 0; i < pts.size(); ++i) {
        const FieldBundle b = fd_field_bundle(*problem.exact, pts[i], d);
        const std::vector<double> r = apply_operator(problem, pts[i], b);
        for (double v : r) CHECK(std::abs(v) <= 1e-5);
      }
    }
  }
}

TEST_CASE("manufactured velocities are divergence-free") {
  for (std::size_t d : {2u, 3u}) {
    const StokesProblem problem = make_problem(d == 2 ? "stokes2d" : "stokes3d");
    const PointSet pts = test::random_interior(d, 1000, 77 + d);
    double worst = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const FieldBundle b = fd_field_bundle(*problem.exact, pts[i], d);
      double div = 0.0;
      for (std::size_t k = 0; k < d; ++k) div += b.u_jac[k * d + k];
      worst = std::max(worst, std::abs(div));
    }
    CHECK(worst <= 1e-6);
  }
}

TEST_CASE("manufactured pressures have zero mean on the evaluation grid") {
  for (std::size_t d : {2u, 3u}) {
    GridSpec spec{d, 101, 0.5, d - 1};
    double mean = 0.0;
    const PointSet grid = make_grid(spec);
    for (std::size_t i = 0; i < grid.size(); ++i)
      mean += (d == 2 ? exact_solution_2d(grid[i]) : exact_solution_3d(grid[i])).p;
    CHECK(std::abs(mean / static_cast<double>(grid.size())) <= 1e-3);
  }
}

TEST_CASE("operator residual of a zero network is minus the forcing") {
  const StokesProblem problem = make_problem("general_stokes2d");
  const std::vector<double> x{0.3, 0.8};
  FieldBundle zero{2, {0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}, {0, 0}};
  const std::vector<double> r = apply_operator(problem, x, zero);
  const std::vector<double> f = problem.f(x);
  CHECK(r[0] == -f[0]);
  CHECK(r[1] == -f[1]);
}

TEST_CASE("operator residual vanishes for a harmonic field balanced by the pressure gradient") {
  StokesProblem problem = make_problem("stokes2d");
  problem.forcing = [](std::span<const double>, std::span<double> out) {
    out[0] = 1.0;
    out[1] = -2.0;
  };
  // u = (x, -y) is harmonic; grad p = f.
  const std::vector<double> x{0.4, 0.1};
  FieldBundle b{2, {0.4, -0.1}, {1, 0, 0, -1}, {0, 0, 0, 0}, {1.0, -2.0}};
  const std::vector<double> r = apply_operator(problem, x, b);
  CHECK(r[0] == 0.0);
  CHECK(r[1] == 0.0);
}

TEST_CASE("operator rejects missing derivative blocks") {
  const StokesProblem problem = make_problem("stokes2d");
  FieldBundle b{2, {0, 0}, {}, {}, {0, 0}};
  CHECK_THROWS_AS(apply_operator(problem, std::vector<double>{0.5, 0.5}, b), DimensionError);
}

TEST_CASE("cavity boundary data") {
  const CavitySpec spec = CavitySpec::unit_lid(2);
  CHECK(cavity_boundary(spec, std::vector<double>{0.5, 1.0}) == std::vector<double>{1.0, 0.0});
  CHECK(cavity_boundary(spec, std::vector<double>{0.5, 0.0}) == std::vector<double>{0.0, 0.0});
  CHECK(cavity_boundary(spec, std::vector<double>{0.0, 0.3}) == std::vector<double>{0.0, 0.0});
  CHECK(cavity_boundary(spec, std::vector<double>{1.0, 1.0}) == std::vector<double>{1.0, 0.0});
  CHECK(cavity_boundary(spec, std::vector<double>{0.0, 1.0}) == std::vector<double>{1.0, 0.0});
  CHECK_THROWS_AS(cavity_boundary(spec, std::vector<double>{0.5, 0.5}), DomainError);

  const CavitySpec spec3 = CavitySpec::unit_lid(3);
  CHECK(cavity_boundary(spec3, std::vector<double>{0.2, 0.7, 1.0}) == std::vector<double>{1.0, 0.0, 0.0});
  CHECK(cavity_boundary(spec3, std::vector<double>{0.2, 1.0, 0.5}) == std::vector<double>{0.0, 0.0, 0.0});
}

TEST_CASE("named problems carry their coefficients") {
  CHECK(make_problem("stokes2d").alpha == 0.0);
  CHECK(make_problem("stokes2d").nu == 0.025);
  CHECK(make_problem("general_stokes3d").alpha == 1.0);
  CHECK(make_problem("general_stokes3d").nu == 1.0);
  CHECK(make_problem("general_stokes3d").dim == 3);
  CHECK(make_problem("cavity2d").cavity.has_value());
  CHECK_FALSE(make_problem("cavity3d").exact.has_value());
  CHECK(make_problem("cavity2d").alpha == 0.0);
  CHECK(make_problem("cavity3d").nu == 0.025);
  CHECK(make_problem("stokes2d", 2.0, 0.5).alpha == 2.0);
  CHECK(make_problem("stokes2d", 2.0, 0.5).nu == 0.5);
  CHECK_THROWS_AS(make_problem("navier_stokes2d"), ConfigError);
  CHECK_THROWS_AS(make_problem("stokes2d", std::nullopt, 0.0), ConfigError);
  CHECK_THROWS_AS(make_problem("stokes2d", -1.0), ConfigError);
  CHECK_FALSE(is_known_problem("stokes4d"));
}

TEST_CASE("cavity forcing is zero") {
  const StokesProblem problem = make_problem("cavity3d");
  CHECK(problem.f(std::vector<double>{0.2, 0.4, 0.6}) == std::vector<double>{0.0, 0.0, 0.0});
}

TEST_CASE("exact Laplacian and pressure gradient agree with finite differences") {
  for (std::size_t d : {2u, 3u}) {
    const StokesProblem problem = make_problem(d == 2 ? "stokes2d" : "stokes3d");
    const PointSet pts = test::random_interior(d, 50, 5);
    std::vector<double> lap(d), gp(d);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const FieldBundle b = fd_field_bundle(*problem.exact, pts[i], d);
      if (d == 2) {
        exact_laplacian_2d(pts[i], lap);
        exact_pressure_gradient_2d(pts[i], gp);
      } else {
        exact_laplacian_3d(pts[i], lap);
        exact_pressure_gradient_3d(pts[i], gp);
      }
      for (std::size_t k = 0; k < d; ++k) {
        double fd_lap = 0.0;
        for (std::size_t j = 0; j < d; ++j) fd_lap += b.u_d2[k * d + j];
        CHECK(std::abs(fd_lap - lap[k]) <= 1e-6);
        CHECK(std::abs(b.p_grad[k] - gp[k]) <= 1e-8);
      }
    }
  }
}

}  // TEST_SUITE
