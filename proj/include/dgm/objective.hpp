#pragma once

// Monte-Carlo DGM objective
//   J = mean_interior |G[U,P]|^2 + mean_interior (div U)^2 + mean_boundary |U - g|^2
// and its exact gradient with respect to theta1 (+) theta2.

#include <span>
#include <vector>

#include "dgm/network.hpp"
#include "dgm/points.hpp"
#include "dgm/problem.hpp"

namespace dgm {

/// Multipliers on the three terms. Unit weights reproduce the plain objective.
struct LossWeights {
  double residual = 1.0;
  double divergence = 1.0;
  double boundary = 1.0;
  friend bool operator==(const LossWeights&, const LossWeights&) = default;
};

/// Unweighted term means; `total` is their weighted sum (the plain sum under unit weights).
struct LossBreakdown {
  double residual = 0.0;
  double divergence = 0.0;
  double boundary = 0.0;
  double total = 0.0;
};

struct ObjectiveGradient {
  LossBreakdown loss;
  std::vector<double> gradient;  // theta1 followed by theta2
};

/// Interior terms averaged over the interior batch, boundary term over the boundary batch.
LossBreakdown batch_objective(const NetworkParams& params, const StokesProblem& problem,
                              const PointSet& interior, const PointSet& boundary,
                              const LossWeights& weights = {});

ObjectiveGradient objective_gradient(const NetworkParams& params, const StokesProblem& problem,
                                     const PointSet& interior, const PointSet& boundary,
                                     const LossWeights& weights = {});

/// G(theta, s) for the paired sample s = (x, r): squared residual and divergence at the
/// interior point x plus squared boundary mismatch at r.
double point_loss(const NetworkParams& params, const StokesProblem& problem,
                  std::span<const double> x, std::span<const double> r);

ObjectiveGradient point_loss_gradient(const NetworkParams& params, const StokesProblem& problem,
                                      std::span<const double> x, std::span<const double> r);

}  // namespace dgm
