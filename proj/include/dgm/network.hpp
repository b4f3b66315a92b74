#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dgm/points.hpp"

namespace dgm {

enum class Activation { tanh, sigmoid };

Activation parse_activation(std::string_view name);
std::string_view to_string(Activation act);

/// Which of the two disjoint networks.
enum class Net { velocity, pressure };

/// ARCH-k: k hidden layers of `units` neurons, shared by the velocity and pressure nets.
struct Architecture {
  std::size_t hidden_layers = 1;
  std::size_t units = 16;
  Activation activation = Activation::tanh;
  std::size_t input_dim = 2;

  std::size_t velocity_outputs() const { return input_dim; }
  std::size_t pressure_outputs() const { return 1; }
  std::size_t outputs(Net net) const { return net == Net::velocity ? velocity_outputs() : pressure_outputs(); }

  /// Throws ConfigError if the descriptor is unusable.
  void validate() const;

  static Architecture arch(std::size_t k, std::size_t dim, std::size_t units = 16) {
    return Architecture{k, units, Activation::tanh, dim};
  }

  friend bool operator==(const Architecture&, const Architecture&) = default;
};

/// One affine stage: W (out x in, row-major) at weight_offset, b (out) at bias_offset.
struct LayerShape {
  std::size_t in = 0;
  std::size_t out = 0;
  std::size_t weight_offset = 0;
  std::size_t bias_offset = 0;
};

/// Maps (layer, row, col) to a flat parameter index. Layers are stored
/// back to back, each as its weight matrix followed by its bias vector.
class NetLayout {
 public:
  NetLayout() = default;
  NetLayout(std::size_t input_dim, std::size_t hidden_layers, std::size_t units, std::size_t outputs);

  std::size_t layer_count() const { return layers_.size(); }
  const LayerShape& layer(std::size_t l) const { return layers_.at(l); }
  const std::vector<LayerShape>& layers() const { return layers_; }
  std::size_t size() const { return size_; }
  std::size_t input_dim() const { return layers_.empty() ? 0 : layers_.front().in; }
  std::size_t outputs() const { return layers_.empty() ? 0 : layers_.back().out; }

  std::size_t weight_index(std::size_t l, std::size_t row, std::size_t col) const;
  std::size_t bias_index(std::size_t l, std::size_t row) const;

  friend bool operator==(const NetLayout&, const NetLayout&) = default;

 private:
  std::vector<LayerShape> layers_;
  std::size_t size_ = 0;
};

/// Structured view of one layer, used for the structured <-> flat round trip.
struct LayerParams {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> weights;  // rows x cols, row-major
  std::vector<double> bias;
  friend bool operator==(const LayerParams&, const LayerParams&) = default;
};

/// theta1 (velocity) and theta2 (pressure) with their layouts.
struct NetworkParams {
  Architecture arch;
  NetLayout velocity_layout;
  NetLayout pressure_layout;
  std::vector<double> theta1;
  std::vector<double> theta2;
  std::uint64_t seed = 0;

  NetworkParams() = default;
  explicit NetworkParams(const Architecture& a);  // all zeros

  const NetLayout& layout(Net net) const { return net == Net::velocity ? velocity_layout : pressure_layout; }
  std::span<const double> theta(Net net) const { return net == Net::velocity ? theta1 : theta2; }
  std::span<double> theta(Net net) { return net == Net::velocity ? std::span<double>(theta1) : std::span<double>(theta2); }

  std::size_t size() const { return theta1.size() + theta2.size(); }
  /// theta1 followed by theta2.
  std::vector<double> flat() const;
  void assign_flat(std::span<const double> flat);

  std::vector<LayerParams> structured(Net net) const;
  void assign_structured(Net net, const std::vector<LayerParams>& layers);
};

/// Glorot-uniform weights, zero biases, reproducible from `seed`.
NetworkParams init_params(const Architecture& arch, std::uint64_t seed);

struct Prediction {
  std::vector<double> u;
  double p = 0.0;
};

/// Plain forward pass at a single point (no derivative channels).
Prediction predict(const NetworkParams& params, std::span<const double> x);

/// Forward pass over many points; u is point-major (N x d).
struct FieldValues {
  std::size_t dim = 0;
  std::vector<double> u;
  std::vector<double> p;
  std::span<const double> u_at(std::size_t i) const { return {u.data() + i * dim, dim}; }
};
FieldValues predict_batch(const NetworkParams& params, const PointSet& points);

double activate(Activation act, double z);

/// sigma and its first three derivatives at z.
struct ActivationDerivs {
  double s0, s1, s2, s3;
};
ActivationDerivs activation_derivs(Activation act, double z);

}  // namespace dgm
