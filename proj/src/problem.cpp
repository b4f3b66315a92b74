#include "dgm/problem.hpp"

#include <cmath>
#include <numbers>

#include "dgm/errors.hpp"

namespace dgm {

namespace {

constexpr double kPi = std::numbers::pi;

void require_dim(std::span<const double> x, std::size_t d, const char* what) {
  if (x.size() != d)
    throw DimensionError(std::string(what) + ": expected a point of dimension " + std::to_string(d) +
                         ", got " + std::to_string(x.size()));
}

// Factors of the 3D manufactured velocity: A(t) = sin^2(pi t), S(t) = sin(2 pi t).
struct Factor {
  double a, s, a2, s2;  // value and second derivatives
  explicit Factor(double t) {
    const double st = std::sin(kPi * t);
    a = st * st;
    s = std::sin(2.0 * kPi * t);
    a2 = 2.0 * kPi * kPi * std::cos(2.0 * kPi * t);
    s2 = -4.0 * kPi * kPi * s;
  }
};

}  // namespace

CavitySpec CavitySpec::unit_lid(std::size_t dim) {
  CavitySpec spec;
  spec.dim = dim;
  spec.lid_velocity.assign(dim, 0.0);
  spec.lid_velocity[0] = 1.0;
  return spec;
}

void StokesProblem::validate() const {
  if (!(nu > 0.0)) throw ConfigError("nu must be > 0");
  if (!(alpha >= 0.0)) throw ConfigError("alpha must be >= 0");
  if (dim < 2) throw ConfigError("problem dimension must be >= 2");
  if (!forcing || !boundary) throw ConfigError("problem '" + name + "' lacks forcing or boundary data");
}

std::vector<double> StokesProblem::f(std::span<const double> x) const {
  std::vector<double> out(dim);
  forcing(x, out);
  return out;
}

std::vector<double> StokesProblem::g(std::span<const double> x) const {
  std::vector<double> out(dim);
  boundary(x, out);
  return out;
}

FlowPoint exact_solution_2d(std::span<const double> x) {
  require_dim(x, 2, "exact_solution_2d");
  const double s1 = std::sin(kPi * x[0]), c1 = std::cos(kPi * x[0]);
  const double s2 = std::sin(kPi * x[1]), c2 = std::cos(kPi * x[1]);
  return {{2.0 * s1 * s1 * s2 * c2 * kPi, -2.0 * s1 * s2 * s2 * c1 * kPi}, c1 * c2};
}

FlowPoint exact_solution_3d(std::span<const double> x) {
  require_dim(x, 3, "exact_solution_3d");
  const Factor fx(x[0]), fy(x[1]), fz(x[2]);
  FlowPoint out;
  out.u = {fx.a * (fy.s * fz.a - fy.a * fz.s),
           fy.a * (fz.s * fx.a - fz.a * fx.s),
           fz.a * (fx.s * fy.a - fx.a * fy.s)};
  out.p = std::sin(kPi * x[0]) * std::sin(kPi * x[1]) * std::cos(kPi * x[2]);
  return out;
}

void exact_laplacian_2d(std::span<const double> x, std::span<double> lap) {
  require_dim(x, 2, "exact_laplacian_2d");
  const double s1 = std::sin(kPi * x[0]), s2 = std::sin(kPi * x[1]);
  const double pi3 = kPi * kPi * kPi;
  lap[0] = 2.0 * pi3 * std::sin(2.0 * kPi * x[1]) * (1.0 - 4.0 * s1 * s1);
  lap[1] = -2.0 * pi3 * std::sin(2.0 * kPi * x[0]) * (1.0 - 4.0 * s2 * s2);
}

void exact_laplacian_3d(std::span<const double> x, std::span<double> lap) {
  require_dim(x, 3, "exact_laplacian_3d");
  const Factor f[3] = {Factor(x[0]), Factor(x[1]), Factor(x[2])};
  // u_k = A(a) [S(b) A(c) - A(b) S(c)] with (a, b, c) the cyclic shift starting at k.
  for (std::size_t k = 0; k < 3; ++k) {
    const Factor& a = f[k];
    const Factor& b = f[(k + 1) % 3];
    const Factor& c = f[(k + 2) % 3];
    const double bracket = b.s * c.a - b.a * c.s;
    lap[k] = a.a2 * bracket + a.a * (b.s2 * c.a - b.a2 * c.s) + a.a * (b.s * c.a2 - b.a * c.s2);
  }
}

void exact_pressure_gradient_2d(std::span<const double> x, std::span<double> grad) {
  require_dim(x, 2, "exact_pressure_gradient_2d");
  grad[0] = -kPi * std::sin(kPi * x[0]) * std::cos(kPi * x[1]);
  grad[1] = -kPi * std::cos(kPi * x[0]) * std::sin(kPi * x[1]);
}

void exact_pressure_gradient_3d(std::span<const double> x, std::span<double> grad) {
  require_dim(x, 3, "exact_pressure_gradient_3d");
  const double sx = std::sin(kPi * x[0]), cx = std::cos(kPi * x[0]);
  const double sy = std::sin(kPi * x[1]), cy = std::cos(kPi * x[1]);
  const double sz = std::sin(kPi * x[2]), cz = std::cos(kPi * x[2]);
  grad[0] = kPi * cx * sy * cz;
  grad[1] = kPi * sx * cy * cz;
  grad[2] = -kPi * sx * sy * sz;
}

VectorField derive_forcing(double alpha, double nu, std::size_t dim) {
  if (dim == 2) {
    return [alpha, nu](std::span<const double> x, std::span<double> out) {
      const FlowPoint e = exact_solution_2d(x);
      double lap[2], gp[2];
      exact_laplacian_2d(x, lap);
      exact_pressure_gradient_2d(x, gp);
      for (std::size_t k = 0; k < 2; ++k) out[k] = alpha * e.u[k] - nu * lap[k] + gp[k];
    };
  }
  if (dim == 3) {
    return [alpha, nu](std::span<const double> x, std::span<double> out) {
      const FlowPoint e = exact_solution_3d(x);
      double lap[3], gp[3];
      exact_laplacian_3d(x, lap);
      exact_pressure_gradient_3d(x, gp);
      for (std::size_t k = 0; k < 3; ++k) out[k] = alpha * e.u[k] - nu * lap[k] + gp[k];
    };
  }
  throw ConfigError("manufactured solutions exist for d = 2 and d = 3 only");
}

bool on_unit_boundary(std::span<const double> x, double tol) {
  bool on_face = false;
  for (double v : x) {
    if (v < -tol || v > 1.0 + tol) return false;
    if (std::abs(v) <= tol || std::abs(v - 1.0) <= tol) on_face = true;
  }
  return on_face;
}

std::vector<double> cavity_boundary(const CavitySpec& spec, std::span<const double> x) {
  require_dim(x, spec.dim, "cavity_boundary");
  if (!on_unit_boundary(x))
    throw DomainError("cavity_boundary: point is not on the boundary of the unit cube");
  if (std::abs(x[spec.dim - 1] - 1.0) <= 1e-12) return spec.lid_velocity;
  return std::vector<double>(spec.dim, 0.0);
}

bool is_known_problem(std::string_view name) {
  return name == "stokes2d" || name == "stokes3d" || name == "general_stokes2d" ||
         name == "general_stokes3d" || name == "cavity2d" || name == "cavity3d";
}

StokesProblem make_problem(std::string_view name, std::optional<double> alpha, std::optional<double> nu) {
  if (!is_known_problem(name))
    throw ConfigError("unknown problem '" + std::string(name) +
                      "' (expected stokes2d, stokes3d, general_stokes2d, general_stokes3d, cavity2d, cavity3d)");
  StokesProblem pb;
  pb.name = std::string(name);
  pb.dim = name.ends_with("3d") ? 3 : 2;
  const bool cavity = name.starts_with("cavity");
  const bool general = name.starts_with("general");
  pb.alpha = alpha.value_or(general ? 1.0 : 0.0);
  // alpha = 0 makes the cavity velocity independent of nu; it shares the Stokes value.
  pb.nu = nu.value_or(general ? 1.0 : 0.025);

  if (cavity) {
    const CavitySpec spec = CavitySpec::unit_lid(pb.dim);
    pb.cavity = spec;
    pb.forcing = [](std::span<const double>, std::span<double> out) {
      for (double& v : out) v = 0.0;
    };
    pb.boundary = [spec](std::span<const double> x, std::span<double> out) {
      const bool lid = std::abs(x[spec.dim - 1] - 1.0) <= 1e-12;
      for (std::size_t k = 0; k < spec.dim; ++k) out[k] = lid ? spec.lid_velocity[k] : 0.0;
    };
  } else {
    pb.forcing = derive_forcing(pb.alpha, pb.nu, pb.dim);
    ExactField exact = pb.dim == 2 ? ExactField(exact_solution_2d) : ExactField(exact_solution_3d);
    pb.exact = exact;
    pb.boundary = [exact](std::span<const double> x, std::span<double> out) {
      const FlowPoint e = exact(x);
      std::copy(e.u.begin(), e.u.end(), out.begin());
    };
  }
  pb.validate();
  return pb;
}

std::vector<double> apply_operator(const StokesProblem& problem, std::span<const double> x,
                                   const FieldBundle& bundle) {
  const std::size_t d = problem.dim;
  if (bundle.dim != d || bundle.u.size() != d || bundle.u_d2.size() != d * d || bundle.p_grad.size() != d)
    throw DimensionError("apply_operator: bundle lacks value, second-derivative or pressure-gradient blocks of dimension " +
                         std::to_string(d));
  std::vector<double> lap(d, 0.0);
  for (std::size_t k = 0; k < d; ++k)
    for (std::size_t j = 0; j < d; ++j) lap[k] += bundle.u_d2[k * d + j];
  std::vector<double> out(d);
  apply_operator(problem, x, bundle.u, lap, bundle.p_grad, out);
  return out;
}

void apply_operator(const StokesProblem& problem, std::span<const double> x, std::span<const double> u,
                    std::span<const double> lap_u, std::span<const double> p_grad, std::span<double> out) {
  problem.forcing(x, out);
  for (std::size_t k = 0; k < problem.dim; ++k)
    out[k] = problem.alpha * u[k] - problem.nu * lap_u[k] + p_grad[k] - out[k];
}

}  // namespace dgm
