#pragma once

// General Stokes problems  alpha*u - nu*lap(u) + grad(p) = f,  div(u) = 0  in (0,1)^d,
// u = g on the boundary.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dgm {

/// Velocity vector and pressure at one point.
struct FlowPoint {
  std::vector<double> u;
  double p = 0.0;
};

using VectorField = std::function<void(std::span<const double> x, std::span<double> out)>;
using ExactField = std::function<FlowPoint(std::span<const double> x)>;

/// Lid-driven cavity: the face x_d = 1 moves with `lid_velocity`, every other face is at rest.
struct CavitySpec {
  std::size_t dim = 2;
  std::vector<double> lid_velocity;  // defaults to (1, 0[, 0])

  static CavitySpec unit_lid(std::size_t dim);
};

struct StokesProblem {
  std::string name;
  double alpha = 0.0;
  double nu = 1.0;
  std::size_t dim = 2;
  VectorField forcing;
  VectorField boundary;
  std::optional<ExactField> exact;
  std::optional<CavitySpec> cavity;

  /// Throws ConfigError unless nu > 0, alpha >= 0 and dim >= 2.
  void validate() const;

  std::vector<double> f(std::span<const double> x) const;
  std::vector<double> g(std::span<const double> x) const;
};

/// Known names: stokes2d, stokes3d, general_stokes2d, general_stokes3d, cavity2d, cavity3d.
/// alpha/nu overrides replace the named problem's defaults.
StokesProblem make_problem(std::string_view name, std::optional<double> alpha = std::nullopt,
                           std::optional<double> nu = std::nullopt);

bool is_known_problem(std::string_view name);

/// Manufactured 2D solution on the unit square (vanishes on the boundary).
FlowPoint exact_solution_2d(std::span<const double> x);
/// Manufactured 3D solution on the unit cube (vanishes on the boundary).
FlowPoint exact_solution_3d(std::span<const double> x);

/// Hand-derived Laplacian of the manufactured velocity and gradient of its pressure.
void exact_laplacian_2d(std::span<const double> x, std::span<double> lap);
void exact_laplacian_3d(std::span<const double> x, std::span<double> lap);
void exact_pressure_gradient_2d(std::span<const double> x, std::span<double> grad);
void exact_pressure_gradient_3d(std::span<const double> x, std::span<double> grad);

/// f = alpha*u - nu*lap(u) + grad(p) for the manufactured solution of dimension `dim`.
VectorField derive_forcing(double alpha, double nu, std::size_t dim);

/// Derivative information needed to evaluate the momentum residual at one point.
/// u_jac and u_d2 are d x d row-major: entry (k, j) is d u_k / d x_j (resp. d^2 u_k / d x_j^2).
struct FieldBundle {
  std::size_t dim = 0;
  std::vector<double> u;
  std::vector<double> u_jac;
  std::vector<double> u_d2;
  std::vector<double> p_grad;
};

/// alpha*U - nu*lap(U) + grad(P) - f(x), componentwise.
std::vector<double> apply_operator(const StokesProblem& problem, std::span<const double> x,
                                   const FieldBundle& bundle);

/// Same, writing into `out` and taking the Laplacian directly (hot path of the objective).
void apply_operator(const StokesProblem& problem, std::span<const double> x,
                    std::span<const double> u, std::span<const double> lap_u,
                    std::span<const double> p_grad, std::span<double> out);

/// Lid velocity on the lid face (corners included: the lid wins), zero elsewhere.
/// Throws DomainError if x is not on the boundary within 1e-12.
std::vector<double> cavity_boundary(const CavitySpec& spec, std::span<const double> x);

/// True if x lies on the boundary of the unit cube within `tol`.
bool on_unit_boundary(std::span<const double> x, double tol = 1e-12);

}  // namespace dgm
