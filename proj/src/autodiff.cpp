#include "dgm/autodiff.hpp"

#include <cmath>
#include <sstream>

#include "dgm/errors.hpp"
#include "dgm/kernels.hpp"

namespace dgm {

ExtendedBlock::ExtendedBlock(std::size_t width, std::size_t inputs, std::size_t points, DerivOrder order)
    : width_(width), inputs_(inputs), points_(points), order_(order) {
  data_.assign(width_ * cols(), 0.0);
}

ExtendedBlock ExtendedBlock::seed(const PointSet& pts, DerivOrder order) {
  const std::size_t d = pts.dim();
  ExtendedBlock b(d, d, pts.size(), order);
  for (std::size_t p = 0; p < pts.size(); ++p) {
    const auto x = pts[p];
    for (std::size_t i = 0; i < d; ++i) {
      b.value(i, p) = x[i];
      if (order != DerivOrder::value) b.jac(i, i, p) = 1.0;
    }
  }
  return b;
}

ExtendedBlock ExtendedBlock::seed(std::span<const double> x, DerivOrder order) {
  PointSet pts(x.size());
  pts.push_back(x);
  return seed(pts, order);
}

std::size_t ExtendedBlock::jac_index(std::size_t i, std::size_t j, std::size_t p) const {
  return i * cols() + (1 + j) * points_ + p;
}

std::size_t ExtendedBlock::d2_index(std::size_t i, std::size_t j, std::size_t p) const {
  return i * cols() + (1 + inputs_ + j) * points_ + p;
}

double ExtendedBlock::laplacian(std::size_t i, std::size_t p) const {
  double s = 0.0;
  for (std::size_t j = 0; j < inputs_; ++j) s += d2(i, j, p);
  return s;
}

std::string ExtendedBlock::shape_string() const {
  std::ostringstream os;
  os << "[width=" << width_ << ", inputs=" << inputs_ << ", points=" << points_
     << ", order=" << static_cast<int>(order_) << "]";
  return os.str();
}

namespace {

kernels::ActivationShape act_shape(const ExtendedBlock& b) {
  return {b.width(), b.points(), b.inputs(), static_cast<int>(b.order())};
}

void check_affine(const ExtendedBlock& in, MatrixRef w, std::span<const double> b) {
  if (w.cols != in.width() || w.data.size() != w.rows * w.cols || b.size() != w.rows) {
    std::ostringstream os;
    os << "extend_affine: W is " << w.rows << "x" << w.cols << " (" << w.data.size()
       << " entries), b has " << b.size() << " entries, input block is " << in.shape_string();
    throw DimensionError(os.str());
  }
}

ExtendedBlock affine_apply(const ExtendedBlock& in, MatrixRef w, std::span<const double> b) {
  ExtendedBlock out(w.rows, in.inputs(), in.points(), in.order());
  kernels::active().affine_forward(w.data.data(), b.data(), w.rows, w.cols, in.data().data(),
                                   out.data().data(), in.cols(), in.points());
  return out;
}

struct ActTables {
  std::vector<double> s0, s1, s2, s3;
};

ActTables activation_tables(const ExtendedBlock& in, Activation act, bool need_s3) {
  const std::size_t n = in.width() * in.points();
  ActTables t;
  t.s0.resize(n);
  t.s1.resize(n);
  t.s2.resize(n);
  if (need_s3) t.s3.resize(n);
  for (std::size_t i = 0; i < in.width(); ++i) {
    for (std::size_t p = 0; p < in.points(); ++p) {
      const ActivationDerivs d = activation_derivs(act, in.value(i, p));
      const std::size_t q = i * in.points() + p;
      t.s0[q] = d.s0;
      t.s1[q] = d.s1;
      t.s2[q] = d.s2;
      if (need_s3) t.s3[q] = d.s3;
    }
  }
  return t;
}

ExtendedBlock activation_apply(const ExtendedBlock& in, const ActTables& t) {
  ExtendedBlock out(in.width(), in.inputs(), in.points(), in.order());
  kernels::active().activation_forward(act_shape(in), t.s0.data(), t.s1.data(), t.s2.data(),
                                       in.data().data(), out.data().data());
  return out;
}

}  // namespace

ExtendedBlock extend_affine(const ExtendedBlock& in, MatrixRef w, std::span<const double> b) {
  check_affine(in, w, b);
  return affine_apply(in, w, b);
}

ExtendedBlock extend_activation(const ExtendedBlock& in, Activation act) {
  if (act != Activation::tanh && act != Activation::sigmoid)
    throw ConfigError("extend_activation: unknown activation id");
  return activation_apply(in, activation_tables(in, act, false));
}

Tape::Tape(ExtendedBlock seed) { blocks_.push_back(std::move(seed)); }

void Tape::push_affine(std::size_t layer, MatrixRef w, std::span<const double> b) {
  check_affine(blocks_.back(), w, b);
  Node node;
  node.kind = Kind::affine;
  node.layer = layer;
  node.rows = w.rows;
  node.cols = w.cols;
  node.weights.assign(w.data.begin(), w.data.end());
  node.bias.assign(b.begin(), b.end());
  ExtendedBlock out = affine_apply(blocks_.back(), w, b);
  nodes_.push_back(std::move(node));
  blocks_.push_back(std::move(out));
}

void Tape::push_activation(Activation act) {
  if (act != Activation::tanh && act != Activation::sigmoid)
    throw ConfigError("push_activation: unknown activation id");
  ActTables t = activation_tables(blocks_.back(), act, true);
  ExtendedBlock out = activation_apply(blocks_.back(), t);
  Node node;
  node.kind = Kind::activation;
  node.act = act;
  node.s1 = std::move(t.s1);
  node.s2 = std::move(t.s2);
  node.s3 = std::move(t.s3);
  nodes_.push_back(std::move(node));
  blocks_.push_back(std::move(out));
}

ExtendedBlock Tape::replay() const {
  ExtendedBlock cur = blocks_.front();
  for (const Node& node : nodes_) {
    if (node.kind == Kind::affine) {
      cur = affine_apply(cur, MatrixRef{node.weights, node.rows, node.cols}, node.bias);
    } else {
      cur = activation_apply(cur, activation_tables(cur, node.act, false));
    }
  }
  return cur;
}

void Tape::reverse(const ExtendedBlock& seed, const NetLayout& layout, std::span<double> grad) const {
  if (!seed.same_shape(output()))
    throw DimensionError("backward seed shape " + seed.shape_string() + " does not match output " +
                         output().shape_string());
  if (grad.size() != layout.size())
    throw DimensionError("gradient buffer has length " + std::to_string(grad.size()) + ", expected " +
                         std::to_string(layout.size()));
  const kernels::Table& k = kernels::active();
  std::vector<double> bar(seed.data().begin(), seed.data().end());
  std::vector<double> next;
  for (std::size_t idx = nodes_.size(); idx-- > 0;) {
    const Node& node = nodes_[idx];
    const ExtendedBlock& in = blocks_[idx];
    if (node.kind == Kind::affine) {
      const LayerShape& s = layout.layer(node.layer);
      k.affine_backward_params(bar.data(), in.data().data(), node.rows, node.cols, in.cols(),
                               in.points(), grad.data() + s.weight_offset, grad.data() + s.bias_offset);
      if (idx == 0) break;  // the seed block does not depend on parameters
      next.assign(in.width() * in.cols(), 0.0);
      k.affine_backward_input(node.weights.data(), node.rows, node.cols, bar.data(), next.data(), in.cols());
    } else {
      next.assign(in.width() * in.cols(), 0.0);
      k.activation_backward(act_shape(in), node.s1.data(), node.s2.data(), node.s3.data(),
                            in.data().data(), bar.data(), next.data());
    }
    bar.swap(next);
  }
}

namespace {

void check_finite_layer(std::span<const double> theta, const LayerShape& s, Net net, std::size_t l) {
  for (std::size_t i = s.weight_offset; i < s.bias_offset + s.out; ++i) {
    if (!std::isfinite(theta[i]))
      throw NumericError(std::string("non-finite parameter in ") +
                         (net == Net::velocity ? "velocity" : "pressure") + " layer " + std::to_string(l));
  }
}

}  // namespace

ExtendedEval forward_extended(const NetworkParams& params, Net net, const PointSet& points,
                              DerivOrder order) {
  const NetLayout& layout = params.layout(net);
  if (points.dim() != layout.input_dim())
    throw DimensionError("forward_extended: points have dimension " + std::to_string(points.dim()) +
                         ", network expects " + std::to_string(layout.input_dim()));
  for (double v : points.coords())
    if (!std::isfinite(v)) throw NumericError("forward_extended: non-finite input coordinate at layer 0");
  const auto theta = params.theta(net);
  Tape tape(ExtendedBlock::seed(points, order));
  for (std::size_t l = 0; l < layout.layer_count(); ++l) {
    const LayerShape& s = layout.layer(l);
    check_finite_layer(theta, s, net, l);
    tape.push_affine(l, MatrixRef{theta.subspan(s.weight_offset, s.in * s.out), s.out, s.in},
                     theta.subspan(s.bias_offset, s.out));
    if (l + 1 < layout.layer_count()) tape.push_activation(params.arch.activation);
  }
  return ExtendedEval(std::move(tape), layout, net);
}

ExtendedEval forward_extended(const NetworkParams& params, Net net, std::span<const double> x) {
  if (x.size() != params.arch.input_dim)
    throw DimensionError("forward_extended: point has dimension " + std::to_string(x.size()) +
                         ", network expects " + std::to_string(params.arch.input_dim));
  PointSet pts(x.size());
  pts.push_back(x);
  return forward_extended(params, net, pts, DerivOrder::second);
}

void backward_params_accumulate(const ExtendedEval& eval, const ExtendedBlock& seed, std::span<double> grad) {
  eval.tape().reverse(seed, eval.layout(), grad);
}

std::vector<double> backward_params(const ExtendedEval& eval, const ExtendedBlock& seed) {
  std::vector<double> grad(eval.layout().size(), 0.0);
  backward_params_accumulate(eval, seed, grad);
  return grad;
}

}  // namespace dgm
