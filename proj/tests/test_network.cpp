#include <cmath>

#include "doctest.h"
#include "dgm/autodiff.hpp"
#include "dgm/errors.hpp"
#include "dgm/network.hpp"
#include "test_support.hpp"

using namespace dgm;

TEST_SUITE("network") {

TEST_CASE("ARCH-1 parameter counts in 2D") {
  const NetworkParams p = init_params(Architecture::arch(1, 2), 1);
  CHECK(p.theta1.size() == 82);  // (2*16 + 16) + (16*2 + 2)
  CHECK(p.theta2.size() == 65);  // (2*16 + 16) + (16*1 + 1)
  CHECK(p.size() == 147);
}

TEST_CASE("ARCH-3 in 3D has four affine stages per net") {
  const NetworkParams p = init_params(Architecture::arch(3, 3), 1);
  CHECK(p.velocity_layout.layer_count() == 4);
  CHECK(p.pressure_layout.layer_count() == 4);
  CHECK(p.velocity_layout.layer(3).out == 3);
  CHECK(p.pressure_layout.layer(3).out == 1);
}

TEST_CASE("initialization is reproducible and Glorot-bounded with zero biases") {
  const Architecture arch = Architecture::arch(2, 2);
  const NetworkParams a = init_params(arch, 17);
  const NetworkParams b = init_params(arch, 17);
  CHECK(a.theta1 == b.theta1);
  CHECK(a.theta2 == b.theta2);
  CHECK(init_params(arch, 18).theta1 != a.theta1);
  for (Net net : {Net::velocity, Net::pressure}) {
    const auto th = a.theta(net);
    for (const LayerShape& s : a.layout(net).layers()) {
      const double bound = std::sqrt(6.0 / static_cast<double>(s.in + s.out));
      for (std::size_t i = 0; i < s.in * s.out; ++i) CHECK(std::abs(th[s.weight_offset + i]) <= bound);
      for (std::size_t i = 0; i < s.out; ++i) CHECK(th[s.bias_offset + i] == 0.0);
    }
  }
}

TEST_CASE("structured and flat layouts round-trip losslessly") {
  const NetworkParams p = test::random_params(Architecture::arch(3, 3), 2);
  NetworkParams q(p.arch);
  q.assign_structured(Net::velocity, p.structured(Net::velocity));
  q.assign_structured(Net::pressure, p.structured(Net::pressure));
  CHECK(q.theta1 == p.theta1);
  CHECK(q.theta2 == p.theta2);
  NetworkParams r(p.arch);
  r.assign_flat(p.flat());
  CHECK(r.flat() == p.flat());
  CHECK_THROWS_AS(r.assign_flat(std::vector<double>(3)), DimensionError);
}

TEST_CASE("layout indices address disjoint slots") {
  const NetLayout layout(2, 2, 4, 2);
  std::vector<int> hits(layout.size(), 0);
  for (std::size_t l = 0; l < layout.layer_count(); ++l) {
    const LayerShape& s = layout.layer(l);
    for (std::size_t i = 0; i < s.out; ++i) {
      ++hits[layout.bias_index(l, i)];
      for (std::size_t j = 0; j < s.in; ++j) ++hits[layout.weight_index(l, i, j)];
    }
  }
  for (int h : hits) CHECK(h == 1);
  CHECK_THROWS_AS(layout.weight_index(0, 4, 0), DimensionError);
}

TEST_CASE("zero parameters predict zero") {
  const NetworkParams p(Architecture::arch(2, 3));
  const std::vector<double> x{0.3, 0.6, 0.9};
  const Prediction pr = predict(p, x);
  CHECK(pr.u == std::vector<double>{0.0, 0.0, 0.0});
  CHECK(pr.p == 0.0);
}

TEST_CASE("predict agrees with the extended forward value") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const std::size_t d = 2 + seed % 2;
    const NetworkParams p = test::random_params(Architecture::arch(1 + seed % 3, d), seed);
    const PointSet pts = test::random_interior(d, 5, seed + 100);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const Prediction pr = predict(p, pts[i]);
      const ExtendedEval ev = forward_extended(p, Net::velocity, pts[i]);
      const ExtendedEval ep = forward_extended(p, Net::pressure, pts[i]);
      for (std::size_t k = 0; k < d; ++k) CHECK(std::abs(pr.u[k] - ev.value(k)) <= 1e-14);
      CHECK(std::abs(pr.p - ep.value(0)) <= 1e-14);
    }
  }
}

TEST_CASE("batched prediction matches pointwise prediction") {
  const NetworkParams p = test::random_params(Architecture::arch(2, 2), 4);
  const PointSet pts = test::random_interior(2, 1100, 9);  // spans several internal chunks
  const FieldValues fv = predict_batch(p, pts);
  REQUIRE(fv.p.size() == pts.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Prediction pr = predict(p, pts[i]);
    worst = std::max({worst, std::abs(pr.p - fv.p[i]), std::abs(pr.u[0] - fv.u[2 * i]),
                      std::abs(pr.u[1] - fv.u[2 * i + 1])});
  }
  CHECK(worst <= 1e-14);
}

TEST_CASE("velocity and pressure parameters are separated") {
  NetworkParams p = test::random_params(Architecture::arch(2, 2), 8);
  const std::vector<double> x{0.2, 0.7};
  const Prediction base = predict(p, x);
  for (double& t : p.theta2) t += 0.1;
  CHECK(predict(p, x).u == base.u);
  CHECK(predict(p, x).p != base.p);
  NetworkParams q = test::random_params(Architecture::arch(2, 2), 8);
  for (double& t : q.theta1) t -= 0.1;
  CHECK(predict(q, x).p == base.p);
  CHECK(predict(q, x).u != base.u);
}

TEST_CASE("prediction is continuous at unit-scale parameters") {
  const NetworkParams p = test::random_params(Architecture::arch(3, 2), 12);
  const std::vector<double> x{0.4, 0.4}, y{0.4 + 1e-8, 0.4 - 1e-8};
  const Prediction a = predict(p, x), b = predict(p, y);
  CHECK(std::abs(a.u[0] - b.u[0]) <= 1e-6);
  CHECK(std::abs(a.u[1] - b.u[1]) <= 1e-6);
  CHECK(std::abs(a.p - b.p) <= 1e-6);
}

TEST_CASE("invalid architectures and activations are rejected") {
  Architecture a = Architecture::arch(1, 2);
  a.hidden_layers = 0;
  CHECK_THROWS_AS(a.validate(), ConfigError);
  a = Architecture::arch(1, 2, 0);
  CHECK_THROWS_AS(init_params(a, 1), ConfigError);
  CHECK_THROWS_AS(parse_activation("relu"), ConfigError);
  CHECK(parse_activation("sigmoid") == Activation::sigmoid);
  CHECK(to_string(Activation::tanh) == "tanh");
}

TEST_CASE("predict rejects non-finite or mis-sized input") {
  const NetworkParams p = init_params(Architecture::arch(1, 2), 1);
  CHECK_THROWS_AS(predict(p, std::vector<double>{0.1, NAN}), NumericError);
  CHECK_THROWS_AS(predict(p, std::vector<double>{0.1, 0.2, 0.3}), DimensionError);
}

TEST_CASE("activation derivatives match closed forms") {
  for (double z : {-2.0, -0.3, 0.0, 0.7, 3.0}) {
    const double t = std::tanh(z);
    const ActivationDerivs dt = activation_derivs(Activation::tanh, z);
    CHECK(dt.s0 == doctest::Approx(t).epsilon(1e-15));
    CHECK(dt.s1 == doctest::Approx(1 - t * t).epsilon(1e-14));
    CHECK(dt.s2 == doctest::Approx(-2 * t * (1 - t * t)).epsilon(1e-14));
    CHECK(dt.s3 == doctest::Approx(-2 * (1 - t * t) * (1 - 3 * t * t)).epsilon(1e-13));
    const double g = 1.0 / (1.0 + std::exp(-z));
    const ActivationDerivs ds = activation_derivs(Activation::sigmoid, z);
    CHECK(ds.s0 == doctest::Approx(g).epsilon(1e-15));
    CHECK(ds.s1 == doctest::Approx(g * (1 - g)).epsilon(1e-14));
    CHECK(ds.s2 == doctest::Approx(g * (1 - g) * (1 - 2 * g)).epsilon(1e-13));
    CHECK(ds.s3 == doctest::Approx(g * (1 - g) * (1 - 6 * g + 6 * g * g)).epsilon(1e-12));
  }
}

}  // TEST_SUITE
