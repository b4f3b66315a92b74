#pragma once

// Extended forward propagation of (value, input-Jacobian, pure second input
// derivatives) through an MLP, recorded on a tape, with a reverse sweep that
// yields parameter gradients of any linear functional of those quantities.
//
// Mixed partials d^2/dx_i dx_j (i != j) are not carried: only the Laplacian
// is needed downstream, and each pure second derivative propagates on its own.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "dgm/network.hpp"
#include "dgm/points.hpp"

namespace dgm {

enum class DerivOrder : int { value = 0, first = 1, second = 2 };

/// Value / Jacobian / pure-second-derivative channels of `width` quantities
/// at `points` points, as functions of `inputs` input coordinates.
class ExtendedBlock {
 public:
  ExtendedBlock() = default;
  ExtendedBlock(std::size_t width, std::size_t inputs, std::size_t points, DerivOrder order);

  /// value = x, jac = I, d2 = 0 at every point of `pts`.
  static ExtendedBlock seed(const PointSet& pts, DerivOrder order);
  static ExtendedBlock seed(std::span<const double> x, DerivOrder order = DerivOrder::second);

  std::size_t width() const { return width_; }
  std::size_t inputs() const { return inputs_; }
  std::size_t points() const { return points_; }
  DerivOrder order() const { return order_; }
  std::size_t channels() const { return 1 + static_cast<std::size_t>(order_) * inputs_; }
  std::size_t cols() const { return channels() * points_; }

  double value(std::size_t i, std::size_t p) const { return data_[i * cols() + p]; }
  double& value(std::size_t i, std::size_t p) { return data_[i * cols() + p]; }
  double jac(std::size_t i, std::size_t j, std::size_t p) const { return data_[jac_index(i, j, p)]; }
  double& jac(std::size_t i, std::size_t j, std::size_t p) { return data_[jac_index(i, j, p)]; }
  double d2(std::size_t i, std::size_t j, std::size_t p) const { return data_[d2_index(i, j, p)]; }
  double& d2(std::size_t i, std::size_t j, std::size_t p) { return data_[d2_index(i, j, p)]; }
  double laplacian(std::size_t i, std::size_t p) const;

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

  bool same_shape(const ExtendedBlock& other) const {
    return width_ == other.width_ && inputs_ == other.inputs_ && points_ == other.points_ &&
           order_ == other.order_;
  }
  std::string shape_string() const;

  friend bool operator==(const ExtendedBlock&, const ExtendedBlock&) = default;

 private:
  std::size_t jac_index(std::size_t i, std::size_t j, std::size_t p) const;
  std::size_t d2_index(std::size_t i, std::size_t j, std::size_t p) const;

  std::size_t width_ = 0;
  std::size_t inputs_ = 0;
  std::size_t points_ = 0;
  DerivOrder order_ = DerivOrder::value;
  std::vector<double> data_;
};

/// Row-major read-only matrix view.
struct MatrixRef {
  std::span<const double> data;
  std::size_t rows = 0;
  std::size_t cols = 0;
};

/// value' = W value + b; jac' = W jac; d2' = W d2.
ExtendedBlock extend_affine(const ExtendedBlock& in, MatrixRef w, std::span<const double> b);

/// Elementwise sigma with the second-order chain rule on every channel.
ExtendedBlock extend_activation(const ExtendedBlock& in, Activation act);

/// Ordered record of the affine and activation stages of one extended pass.
/// blocks()[0] is the seed; node i maps blocks()[i] to blocks()[i + 1].
class Tape {
 public:
  enum class Kind { affine, activation };

  struct Node {
    Kind kind = Kind::affine;
    // affine
    std::size_t layer = 0;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> weights;
    std::vector<double> bias;
    // activation: sigma', sigma'', sigma''' at the value channel of the input
    Activation act = Activation::tanh;
    std::vector<double> s1, s2, s3;
  };

  explicit Tape(ExtendedBlock seed);

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<ExtendedBlock>& blocks() const { return blocks_; }
  const ExtendedBlock& output() const { return blocks_.back(); }

  void push_affine(std::size_t layer, MatrixRef w, std::span<const double> b);
  void push_activation(Activation act);

  /// Recomputes every stage from the seed and the recorded weights.
  ExtendedBlock replay() const;

  /// Reverse sweep for adjoint `seed` on the output; adds d<seed, output>/dW and
  /// d<seed, output>/db into `grad` at the offsets given by `layout`.
  void reverse(const ExtendedBlock& seed, const NetLayout& layout, std::span<double> grad) const;

 private:
  std::vector<Node> nodes_;
  std::vector<ExtendedBlock> blocks_;
};

/// Network outputs with derivative channels, plus the tape that produced them.
class ExtendedEval {
 public:
  ExtendedEval(Tape tape, NetLayout layout, Net net)
      : tape_(std::move(tape)), layout_(std::move(layout)), net_(net) {}

  const ExtendedBlock& output() const { return tape_.output(); }
  std::size_t outputs() const { return output().width(); }
  std::size_t points() const { return output().points(); }
  std::size_t inputs() const { return output().inputs(); }
  DerivOrder order() const { return output().order(); }

  double value(std::size_t k, std::size_t p = 0) const { return output().value(k, p); }
  double jac(std::size_t k, std::size_t j, std::size_t p = 0) const { return output().jac(k, j, p); }
  double d2(std::size_t k, std::size_t j, std::size_t p = 0) const { return output().d2(k, j, p); }
  double laplacian(std::size_t k, std::size_t p = 0) const { return output().laplacian(k, p); }

  const Tape& tape() const { return tape_; }
  const NetLayout& layout() const { return layout_; }
  Net net() const { return net_; }

  /// Zero adjoint block with the output's shape, ready to be filled as a seed.
  ExtendedBlock make_seed() const {
    const ExtendedBlock& o = output();
    return ExtendedBlock(o.width(), o.inputs(), o.points(), o.order());
  }

 private:
  Tape tape_;
  NetLayout layout_;
  Net net_;
};

/// Extended pass of one net at a single point (value, jac and pure d2).
ExtendedEval forward_extended(const NetworkParams& params, Net net, std::span<const double> x);

/// Extended pass over a batch of points, carrying channels up to `order`.
ExtendedEval forward_extended(const NetworkParams& params, Net net, const PointSet& points,
                              DerivOrder order);

/// Gradient of <seed, (value, jac, d2)> with respect to the selected net's parameters.
std::vector<double> backward_params(const ExtendedEval& eval, const ExtendedBlock& seed);

/// As backward_params, accumulating into `grad` (length = the net's parameter count).
void backward_params_accumulate(const ExtendedEval& eval, const ExtendedBlock& seed,
                                std::span<double> grad);

}  // namespace dgm
