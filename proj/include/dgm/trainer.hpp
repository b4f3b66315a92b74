#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dgm/network.hpp"
#include "dgm/objective.hpp"
#include "dgm/problem.hpp"
#include "dgm/sampler.hpp"

namespace dgm {

enum class Optimizer { sgd, adam };
Optimizer parse_optimizer(std::string_view name);
std::string_view to_string(Optimizer opt);

enum class TerminationReason { max_iters, grad_norm, user, diverged };
std::string_view to_string(TerminationReason reason);

struct AdamSettings {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct TrainConfig {
  std::int64_t max_iterations = 20000;  // 0 runs the initial evaluation only
  Optimizer optimizer = Optimizer::adam;
  double lr0 = 1e-3;
  /// Inverse-time decay constant; unset means 0 for Adam and 1e-4 for SGD.
  std::optional<double> lr_decay;
  std::size_t interior_batch = 128;
  std::size_t boundary_batch = 32;
  double grad_norm_tolerance = 1e-8;
  std::size_t grad_norm_window = 100;
  std::int64_t eval_every = 1000;
  std::uint64_t seed = 0;
  SamplingMode sampling = SamplingMode::fixed;
  LossWeights weights;
  AdamSettings adam;
  bool deterministic = false;
  std::size_t eval_resolution = 101;
  double eval_slice = 0.5;

  double decay() const;
  /// Throws ConfigError unless 0 < lr0 < 1, max_iterations >= 0, and the strides/batches are positive.
  void validate() const;
};

/// alpha_n = lr0 / (1 + kappa * n)
double lr_schedule(const TrainConfig& config, std::int64_t n);

struct HistoryRecord {
  std::int64_t iteration = 0;
  LossBreakdown loss;  // over the full dataset
  double err_l1 = 0.0;  // NaN when the problem has no exact solution
  double err_l2 = 0.0;
  double lr = 0.0;
  double wall_ms = 0.0;  // 0 in deterministic mode
};

struct TrainHistory {
  std::vector<HistoryRecord> records;
  NetworkParams final_params;
  TerminationReason reason = TerminationReason::max_iters;
  std::int64_t iterations = 0;
  std::string sampler_state;
  double elapsed_ms = 0.0;  // always measured, never written to the history table
};

struct TrainHooks {
  /// Called after every history record with the parameters it describes.
  std::function<void(const HistoryRecord&, const NetworkParams&)> on_record;
  /// Checked between iterations; when set, training stops with reason `user`.
  const std::atomic<bool>* stop = nullptr;
};

TrainHistory train(const StokesProblem& problem, const Dataset& dataset, NetworkParams initial,
                   const TrainConfig& config, const TrainHooks& hooks = {});

/// Initializes parameters from `arch` and config.seed, then trains.
TrainHistory train(const StokesProblem& problem, const Dataset& dataset, const Architecture& arch,
                   const TrainConfig& config, const TrainHooks& hooks = {});

/// Plain SGD / Adam update over a flat parameter vector.
class OptimizerState {
 public:
  OptimizerState(Optimizer kind, std::size_t size, AdamSettings adam = {});
  void step(std::span<double> theta, std::span<const double> grad, double lr);
  std::int64_t steps() const { return t_; }

 private:
  Optimizer kind_;
  AdamSettings adam_;
  std::vector<double> m_, v_;
  std::int64_t t_ = 0;
};

}  // namespace dgm
