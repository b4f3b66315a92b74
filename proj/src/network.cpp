#include "dgm/network.hpp"

#include <cmath>

#include "dgm/autodiff.hpp"
#include "dgm/errors.hpp"
#include "dgm/random.hpp"

namespace dgm {

Activation parse_activation(std::string_view name) {
  if (name == "tanh") return Activation::tanh;
  if (name == "sigmoid") return Activation::sigmoid;
  throw ConfigError("unknown activation '" + std::string(name) + "' (expected tanh or sigmoid)");
}

std::string_view to_string(Activation act) {
  return act == Activation::tanh ? "tanh" : "sigmoid";
}

void Architecture::validate() const {
  if (hidden_layers < 1) throw ConfigError("hidden_layers must be >= 1");
  if (units < 1) throw ConfigError("units must be >= 1");
  if (input_dim < 2) throw ConfigError("input_dim must be >= 2");
}

NetLayout::NetLayout(std::size_t input_dim, std::size_t hidden_layers, std::size_t units,
                     std::size_t outputs) {
  std::size_t in = input_dim;
  for (std::size_t l = 0; l <= hidden_layers; ++l) {
    const std::size_t out = (l == hidden_layers) ? outputs : units;
    LayerShape shape{in, out, size_, size_ + in * out};
    size_ += in * out + out;
    layers_.push_back(shape);
    in = out;
  }
}

std::size_t NetLayout::weight_index(std::size_t l, std::size_t row, std::size_t col) const {
  const LayerShape& s = layers_.at(l);
  if (row >= s.out || col >= s.in) throw DimensionError("weight index out of range");
  return s.weight_offset + row * s.in + col;
}

std::size_t NetLayout::bias_index(std::size_t l, std::size_t row) const {
  const LayerShape& s = layers_.at(l);
  if (row >= s.out) throw DimensionError("bias index out of range");
  return s.bias_offset + row;
}

NetworkParams::NetworkParams(const Architecture& a)
    : arch(a),
      velocity_layout(a.input_dim, a.hidden_layers, a.units, a.velocity_outputs()),
      pressure_layout(a.input_dim, a.hidden_layers, a.units, a.pressure_outputs()),
      theta1(velocity_layout.size(), 0.0),
      theta2(pressure_layout.size(), 0.0) {
  a.validate();
}

std::vector<double> NetworkParams::flat() const {
  std::vector<double> out;
  out.reserve(size());
  out.insert(out.end(), theta1.begin(), theta1.end());
  out.insert(out.end(), theta2.begin(), theta2.end());
  return out;
}

void NetworkParams::assign_flat(std::span<const double> flat) {
  if (flat.size() != size())
    throw DimensionError("flat parameter vector has length " + std::to_string(flat.size()) +
                         ", expected " + std::to_string(size()));
  std::copy(flat.begin(), flat.begin() + theta1.size(), theta1.begin());
  std::copy(flat.begin() + theta1.size(), flat.end(), theta2.begin());
}

std::vector<LayerParams> NetworkParams::structured(Net net) const {
  const NetLayout& lay = layout(net);
  const auto th = theta(net);
  std::vector<LayerParams> out;
  for (const LayerShape& s : lay.layers()) {
    LayerParams lp;
    lp.rows = s.out;
    lp.cols = s.in;
    lp.weights.assign(th.begin() + s.weight_offset, th.begin() + s.weight_offset + s.in * s.out);
    lp.bias.assign(th.begin() + s.bias_offset, th.begin() + s.bias_offset + s.out);
    out.push_back(std::move(lp));
  }
  return out;
}

void NetworkParams::assign_structured(Net net, const std::vector<LayerParams>& layers) {
  const NetLayout& lay = layout(net);
  if (layers.size() != lay.layer_count()) throw DimensionError("layer count mismatch");
  auto th = theta(net);
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const LayerShape& s = lay.layer(l);
    const LayerParams& lp = layers[l];
    if (lp.rows != s.out || lp.cols != s.in || lp.weights.size() != s.in * s.out || lp.bias.size() != s.out)
      throw DimensionError("layer " + std::to_string(l) + " shape mismatch");
    std::copy(lp.weights.begin(), lp.weights.end(), th.begin() + s.weight_offset);
    std::copy(lp.bias.begin(), lp.bias.end(), th.begin() + s.bias_offset);
  }
}

NetworkParams init_params(const Architecture& arch, std::uint64_t seed) {
  NetworkParams params(arch);
  params.seed = seed;
  for (Net net : {Net::velocity, Net::pressure}) {
    Rng rng(mix_seed(seed, net == Net::velocity ? 11 : 12));
    auto th = params.theta(net);
    for (const LayerShape& s : params.layout(net).layers()) {
      const double limit = std::sqrt(6.0 / static_cast<double>(s.in + s.out));
      for (std::size_t i = 0; i < s.in * s.out; ++i) th[s.weight_offset + i] = rng.uniform(-limit, limit);
    }
  }
  return params;
}

double activate(Activation act, double z) {
  if (act == Activation::tanh) return std::tanh(z);
  return 1.0 / (1.0 + std::exp(-z));
}

ActivationDerivs activation_derivs(Activation act, double z) {
  if (act == Activation::tanh) {
    const double t = std::tanh(z);
    const double s = 1.0 - t * t;
    return {t, s, -2.0 * t * s, -2.0 * s * (1.0 - 3.0 * t * t)};
  }
  const double g = 1.0 / (1.0 + std::exp(-z));
  const double g1 = g * (1.0 - g);
  const double g2 = g1 * (1.0 - 2.0 * g);
  const double g3 = g2 * (1.0 - 2.0 * g) - 2.0 * g1 * g1;
  return {g, g1, g2, g3};
}

namespace {

std::vector<double> plain_forward(const NetLayout& layout, std::span<const double> theta,
                                  Activation act, std::span<const double> x) {
  std::vector<double> cur(x.begin(), x.end());
  std::vector<double> next;
  for (std::size_t l = 0; l < layout.layer_count(); ++l) {
    const LayerShape& s = layout.layer(l);
    next.assign(s.out, 0.0);
    for (std::size_t i = 0; i < s.out; ++i) {
      double acc = 0.0;
      for (std::size_t k = 0; k < s.in; ++k) acc += theta[s.weight_offset + i * s.in + k] * cur[k];
      acc += theta[s.bias_offset + i];
      next[i] = (l + 1 < layout.layer_count()) ? activate(act, acc) : acc;
    }
    cur.swap(next);
  }
  return cur;
}

}  // namespace

Prediction predict(const NetworkParams& params, std::span<const double> x) {
  if (x.size() != params.arch.input_dim)
    throw DimensionError("predict: point has dimension " + std::to_string(x.size()) + ", expected " +
                         std::to_string(params.arch.input_dim));
  for (double v : x)
    if (!std::isfinite(v)) throw NumericError("predict: non-finite input coordinate");
  Prediction out;
  out.u = plain_forward(params.velocity_layout, params.theta1, params.arch.activation, x);
  out.p = plain_forward(params.pressure_layout, params.theta2, params.arch.activation, x)[0];
  return out;
}

FieldValues predict_batch(const NetworkParams& params, const PointSet& points) {
  FieldValues out;
  const std::size_t d = params.arch.input_dim;
  out.dim = d;
  out.u.assign(points.size() * d, 0.0);
  out.p.assign(points.size(), 0.0);
  constexpr std::size_t kChunk = 512;
  for (std::size_t start = 0; start < points.size(); start += kChunk) {
    const std::size_t n = std::min(kChunk, points.size() - start);
    PointSet chunk(d, std::vector<double>(points.coords().begin() + start * d,
                                          points.coords().begin() + (start + n) * d));
    const ExtendedEval ev = forward_extended(params, Net::velocity, chunk, DerivOrder::value);
    const ExtendedEval ep = forward_extended(params, Net::pressure, chunk, DerivOrder::value);
    for (std::size_t q = 0; q < n; ++q) {
      for (std::size_t k = 0; k < d; ++k) out.u[(start + q) * d + k] = ev.value(k, q);
      out.p[start + q] = ep.value(0, q);
    }
  }
  return out;
}

}  // namespace dgm
