#include "dgm/trainer.hpp"

#include <chrono>
#include <cmath>
#include <deque>
#include <limits>

#include "dgm/errors.hpp"
#include "dgm/metrics.hpp"

namespace dgm {

Optimizer parse_optimizer(std::string_view name) {
  if (name == "sgd") return Optimizer::sgd;
  if (name == "adam") return Optimizer::adam;
  throw ConfigError("unknown optimizer '" + std::string(name) + "' (expected sgd or adam)");
}

std::string_view to_string(Optimizer opt) { return opt == Optimizer::sgd ? "sgd" : "adam"; }

std::string_view to_string(TerminationReason reason) {
  switch (reason) {
    case TerminationReason::max_iters: return "max_iters";
    case TerminationReason::grad_norm: return "grad_norm";
    case TerminationReason::user: return "user";
    case TerminationReason::diverged: return "diverged";
  }
  return "unknown";
}

double TrainConfig::decay() const {
  return lr_decay.value_or(optimizer == Optimizer::sgd ? 1e-4 : 0.0);
}

void TrainConfig::validate() const {
  if (!(lr0 > 0.0 && lr0 < 1.0)) throw ConfigError("lr0 must lie in (0, 1)");
  if (max_iterations < 0) throw ConfigError("max_iterations must be >= 0");
  if (decay() < 0.0) throw ConfigError("lr_decay must be >= 0");
  if (interior_batch == 0 || boundary_batch == 0) throw ConfigError("batch sizes must be positive");
  if (eval_every < 1) throw ConfigError("eval_every must be >= 1");
  if (grad_norm_window < 1) throw ConfigError("grad_norm_window must be >= 1");
  if (!(grad_norm_tolerance >= 0.0)) throw ConfigError("grad_norm_tolerance must be >= 0");
  if (eval_resolution < 2) throw ConfigError("eval_resolution must be >= 2");
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0 && adam.beta2 >= 0.0 && adam.beta2 < 1.0 && adam.eps > 0.0))
    throw ConfigError("invalid Adam settings");
  if (!(weights.residual >= 0.0 && weights.divergence >= 0.0 && weights.boundary >= 0.0))
    throw ConfigError("loss weights must be non-negative");
}

double lr_schedule(const TrainConfig& config, std::int64_t n) {
  return config.lr0 / (1.0 + config.decay() * static_cast<double>(n));
}

OptimizerState::OptimizerState(Optimizer kind, std::size_t size, AdamSettings adam) : kind_(kind), adam_(adam) {
  if (kind_ == Optimizer::adam) {
    m_.assign(size, 0.0);
    v_.assign(size, 0.0);
  }
}

void OptimizerState::step(std::span<double> theta, std::span<const double> grad, double lr) {
  if (theta.size() != grad.size()) throw DimensionError("optimizer: gradient length mismatch");
  ++t_;
  if (kind_ == Optimizer::sgd) {
    for (std::size_t i = 0; i < theta.size(); ++i) theta[i] -= lr * grad[i];
    return;
  }
  const double b1 = adam_.beta1, b2 = adam_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t i = 0; i < theta.size(); ++i) {
    m_[i] = b1 * m_[i] + (1.0 - b1) * grad[i];
    v_[i] = b2 * v_[i] + (1.0 - b2) * grad[i] * grad[i];
    theta[i] -= lr * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + adam_.eps);
  }
}

namespace {

bool all_finite(std::span<const double> v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace

TrainHistory train(const StokesProblem& problem, const Dataset& dataset, NetworkParams params,
                   const TrainConfig& config, const TrainHooks& hooks) {
  config.validate();
  problem.validate();
  if (params.arch.input_dim != problem.dim || dataset.dim() != problem.dim)
    throw DimensionError("train: problem, architecture and dataset dimensions disagree");

  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  const auto elapsed_ms = [&] {
    return std::chrono::duration<double, std::milli>(clock::now() - t0).count();
  };

  GridSpec grid{problem.dim, config.eval_resolution, config.eval_slice, problem.dim - 1};
  BatchSampler sampler(dataset, config.interior_batch, config.boundary_batch, config.seed, config.sampling);
  OptimizerState opt(config.optimizer, params.size(), config.adam);

  TrainHistory hist;
  NetworkParams last_good = params;

  // Returns false if the evaluation is not finite.
  const auto record = [&](std::int64_t n) {
    HistoryRecord rec;
    rec.iteration = n;
    try {
      rec.loss = batch_objective(params, problem, dataset.interior, dataset.boundary, config.weights);
    } catch (const NumericError&) {
      return false;
    }
    if (!std::isfinite(rec.loss.total)) return false;
    if (problem.exact) {
      const EvalGrid eg = eval_grid(params, problem, grid);
      rec.err_l1 = eg.err_l1;
      rec.err_l2 = eg.err_l2;
    } else {
      rec.err_l1 = rec.err_l2 = std::numeric_limits<double>::quiet_NaN();
    }
    rec.lr = lr_schedule(config, n);
    rec.wall_ms = config.deterministic ? 0.0 : elapsed_ms();
    hist.records.push_back(rec);
    last_good = params;
    if (hooks.on_record) hooks.on_record(rec, params);
    return true;
  };

  if (!record(0)) {
    hist.reason = TerminationReason::diverged;
    hist.final_params = std::move(params);
    hist.elapsed_ms = elapsed_ms();
    return hist;
  }

  std::deque<double> window;
  double window_sum = 0.0;
  std::int64_t n = 0;
  bool diverged = false;
  hist.reason = TerminationReason::max_iters;

  while (n < config.max_iterations) {
    if (hooks.stop && hooks.stop->load()) {
      hist.reason = TerminationReason::user;
      break;
    }
    const Batch batch = sampler.next();
    ObjectiveGradient og;
    try {
      og = objective_gradient(params, problem, batch.interior, batch.boundary, config.weights);
    } catch (const NumericError&) {
      diverged = true;
      break;
    }
    if (!std::isfinite(og.loss.total) || !all_finite(og.gradient)) {
      diverged = true;
      break;
    }
    double g2 = 0.0;
    for (double g : og.gradient) g2 += g * g;
    const double gnorm = std::sqrt(g2);
    window.push_back(gnorm);
    window_sum += gnorm;
    if (window.size() > config.grad_norm_window) {
      window_sum -= window.front();
      window.pop_front();
    }

    std::vector<double> flat = params.flat();
    opt.step(flat, og.gradient, lr_schedule(config, n));
    params.assign_flat(flat);
    ++n;

    const bool stop_on_norm = window_sum / static_cast<double>(window.size()) <= config.grad_norm_tolerance;
    if (n % config.eval_every == 0 || stop_on_norm || n == config.max_iterations) {
      if (!record(n)) {
        diverged = true;
        break;
      }
    }
    if (stop_on_norm) {
      hist.reason = TerminationReason::grad_norm;
      break;
    }
  }

  if (diverged) {
    hist.reason = TerminationReason::diverged;
    params = last_good;
  } else if (hist.records.back().iteration != n) {
    record(n);
  }
  hist.iterations = n;
  hist.sampler_state = sampler.state();
  hist.final_params = std::move(params);
  hist.elapsed_ms = elapsed_ms();
  return hist;
}

TrainHistory train(const StokesProblem& problem, const Dataset& dataset, const Architecture& arch,
                   const TrainConfig& config, const TrainHooks& hooks) {
  return train(problem, dataset, init_params(arch, mix_seed(config.seed, 1)), config, hooks);
}

}  // namespace dgm
