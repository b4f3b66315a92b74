#pragma once

// Finite-difference and brute-force oracles. Nothing in here touches the
// extended forward pass: networks are only evaluated through predict(). The
// oracle suite at the bottom is what compares the two.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "dgm/network.hpp"
#include "dgm/objective.hpp"
#include "dgm/problem.hpp"
#include "dgm/sampler.hpp"

namespace dgm {

using VectorFunction = std::function<std::vector<double>(std::span<const double>)>;
using ScalarFunction = std::function<double(std::span<const double>)>;

/// Central-difference Jacobian and pure second derivatives of fn at x.
/// jac and d2 are (outputs x inputs) row-major.
///
/// The three-point second difference (f(x+h) - 2f(x) + f(x-h)) / h^2 carries
/// roughly 4 eps |f| / h^2 of rounding error, about 1e-7 relative at h = 1e-4,
/// which is too coarse for a 1e-6 comparison. The five-point stencil
/// (-f(x+2h) + 16f(x+h) - 30f(x) + 16f(x-h) - f(x-2h)) / (12 h^2) is fourth-order
/// accurate, so a larger step keeps both truncation and rounding near 1e-9.
struct FdDerivatives {
  std::size_t outputs = 0;
  std::size_t inputs = 0;
  std::vector<double> jac;
  std::vector<double> d2;
};

inline constexpr double kFirstDerivativeStep = 1e-5;
inline constexpr double kSecondDerivativeStep = 1e-4;
inline constexpr double kFivePointStep = 2e-3;

enum class Stencil { three_point, five_point };

FdDerivatives fd_input_derivatives(const VectorFunction& fn, std::span<const double> x,
                                   double h1 = kFirstDerivativeStep, double h2 = kSecondDerivativeStep,
                                   Stencil stencil = Stencil::three_point);

/// Per-coordinate central differences; the step is h * max(1, |theta_k|).
std::vector<double> fd_gradient(const ScalarFunction& loss, std::span<const double> theta, double h = 1e-5);

/// fd_gradient over the flat (theta1, theta2) vector of `params`.
std::vector<double> fd_param_gradient(const std::function<double(const NetworkParams&)>& loss,
                                      const NetworkParams& params, double h = 1e-5);

/// ||a - b||_2 / max(||a||_2, ||b||_2), or the absolute difference when both norms are below `floor`.
double relative_error(std::span<const double> a, std::span<const double> b, double floor = 1e-300);

/// Value, FD Jacobian, FD pure second derivatives (five-point) of a velocity
/// field and the FD pressure gradient.
FieldBundle fd_field_bundle(const ExactField& field, std::span<const double> x, std::size_t dim);

/// Objective assembled purely from a black-box field and finite differences.
LossBreakdown fd_objective(const ExactField& field, const StokesProblem& problem, const PointSet& interior,
                           const PointSet& boundary);

/// The network as a black-box field (predict only).
ExactField network_field(const NetworkParams& params);

struct UnbiasednessReport {
  bool pass = false;
  double max_rel_error = 0.0;  // max_i |mean_i - full_i| / ||full||_inf
  std::size_t samples = 0;
};

/// Pairs s_n = (x_{n mod Ni}, r_{n mod Nb}) for n < lcm(Ni, Nb), so every interior and every
/// boundary point is used equally often; the mean single-sample gradient must then equal the
/// gradient of the full-dataset objective.
UnbiasednessReport check_unbiasedness(const NetworkParams& params, const StokesProblem& problem,
                                      const Dataset& dataset, double tolerance = 1e-10);

/// One line of the oracle suite.
struct OracleCheck {
  std::string name;
  bool pass = false;
  double worst = 0.0;      // worst observed error
  double threshold = 0.0;  // pass iff worst <= threshold
  std::string detail;
};

struct OracleSuiteOptions {
  std::size_t derivative_draws = 100;
  std::size_t unbiasedness_configs = 20;
  std::size_t manufactured_points = 100;
  std::uint64_t seed = 2024;
};

/// Derivative, unbiasedness, manufactured-consistency and objective-soundness checks.
std::vector<OracleCheck> run_oracle_suite(const OracleSuiteOptions& options);

}  // namespace dgm
