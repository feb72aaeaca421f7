#include "rnnode/network.hpp"

#include <cmath>
#include <string>

#include "rnnode/errors.hpp"
#include "rnnode/time_grid.hpp"

namespace rnnode {

TimeGrid::TimeGrid(double t_end, double step) : t_end_(t_end), step_(step), num_steps_(0) {
  if (!std::isfinite(t_end) || t_end <= 0.0) {
    throw ConfigError("time grid horizon must be positive and finite");
  }
  if (!std::isfinite(step) || step <= 0.0) {
    throw ConfigError("time grid step must be positive and finite");
  }
  if (step > t_end * (1.0 + 1e-12)) throw ConfigError("time grid step exceeds horizon");
  const double n = std::max(1.0, std::round(t_end / step));
  num_steps_ = static_cast<std::size_t>(n);
}

std::string_view to_string(Activation kind) {
  switch (kind) {
    case Activation::identity: return "identity";
    case Activation::relu: return "relu";
    case Activation::tanh: return "tanh";
    case Activation::sigmoid: return "sigmoid";
    case Activation::softmax: return "softmax";
  }
  return "identity";
}

Activation activation_from_string(std::string_view tag) {
  if (tag == "identity") return Activation::identity;
  if (tag == "relu") return Activation::relu;
  if (tag == "tanh") return Activation::tanh;
  if (tag == "sigmoid") return Activation::sigmoid;
  if (tag == "softmax") return Activation::softmax;
  throw ConfigError("unknown activation '" + std::string(tag) + "'");
}

Vector activation_apply(Activation kind, const Vector& v) {
  if (!v.allFinite()) throw DomainError("activation input is not finite");
  switch (kind) {
    case Activation::identity:
      return v;
    case Activation::relu:
      return v.cwiseMax(0.0);
    case Activation::tanh:
      return v.array().tanh().matrix();
    case Activation::sigmoid:
      return (1.0 / (1.0 + (-v.array()).exp())).matrix();
    case Activation::softmax: {
      if (v.size() == 0) throw DimensionError("softmax of an empty vector");
      const Vector e = (v.array() - v.maxCoeff()).exp().matrix();
      return e / e.sum();
    }
  }
  return v;
}

void LayerParams::validate() const {
  if (weights.rows() != bias.size()) {
    throw DimensionError("layer weights have " + std::to_string(weights.rows()) +
                         " rows but bias has length " + std::to_string(bias.size()));
  }
  if (weights.rows() == 0 || weights.cols() == 0) {
    throw DimensionError("layer has an empty weight matrix");
  }
  if (!weights.allFinite() || !bias.allFinite()) {
    throw DomainError("layer parameters are not finite");
  }
}

Vector layer_apply(const LayerParams& layer, const Vector& x) {
  if (static_cast<std::size_t>(x.size()) != layer.input_dim()) {
    throw DimensionError("layer expects input of length " + std::to_string(layer.input_dim()) +
                         ", got " + std::to_string(x.size()));
  }
  return activation_apply(layer.activation, layer.weights * x + layer.bias);
}

std::size_t MlpParams::input_dim() const {
  if (layers.empty()) throw DimensionError("hidden map has no layers");
  return layers.front().input_dim();
}

std::size_t MlpParams::output_dim() const {
  if (layers.empty()) throw DimensionError("hidden map has no layers");
  return layers.back().output_dim();
}

void MlpParams::validate(bool require_square) const {
  if (layers.empty()) throw DimensionError("hidden map has no layers");
  for (std::size_t k = 0; k < layers.size(); ++k) {
    layers[k].validate();
    if (k > 0 && layers[k - 1].output_dim() != layers[k].input_dim()) {
      throw DimensionError("hidden layer " + std::to_string(k) + " expects input " +
                           std::to_string(layers[k].input_dim()) + " but previous layer emits " +
                           std::to_string(layers[k - 1].output_dim()));
    }
  }
  if (require_square && input_dim() != output_dim()) {
    throw DimensionError("hidden map must satisfy d_0 == d_L, got " + std::to_string(input_dim()) +
                         " -> " + std::to_string(output_dim()));
  }
}

Vector mlp_apply(const MlpParams& theta, const Vector& x) {
  if (theta.layers.empty()) throw DimensionError("hidden map has no layers");
  Vector h = layer_apply(theta.layers.front(), x);
  for (std::size_t k = 1; k < theta.layers.size(); ++k) h = layer_apply(theta.layers[k], h);
  return h;
}

void RnnOdeSpec::validate() const {
  embed.validate();
  hidden.validate(true);
  readout.validate();
  if (embed.output_dim() != hidden.input_dim()) {
    throw DimensionError("embedding emits " + std::to_string(embed.output_dim()) +
                         " but hidden map expects " + std::to_string(hidden.input_dim()));
  }
  if (hidden.output_dim() != readout.input_dim()) {
    throw DimensionError("hidden map emits " + std::to_string(hidden.output_dim()) +
                         " but readout expects " + std::to_string(readout.input_dim()));
  }
  if (readout.activation != Activation::softmax) {
    throw ConfigError("readout activation must be softmax");
  }
  if (!(tau > 0.0) || !std::isfinite(tau)) throw ConfigError("tau must be positive");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ConfigError("horizon must be positive");
  if (n_steps == 0) throw ConfigError("n_steps must be positive");
  const double expected = horizon / static_cast<double>(n_steps);
  if (std::abs(tau - expected) > 1e-12 * expected) {
    throw ConfigError("tau must equal horizon / n_steps");
  }
}

MlpParams single_layer_map(Matrix weights, Vector bias, Activation activation) {
  MlpParams theta;
  theta.layers.push_back(LayerParams{std::move(weights), std::move(bias), activation});
  theta.validate(true);
  return theta;
}

DiscreteRollout rnn_unroll_discrete(const RnnOdeSpec& spec, const Vector& x, std::size_t n) {
  if (static_cast<std::size_t>(x.size()) != spec.input_dim()) {
    throw DimensionError("input has length " + std::to_string(x.size()) + ", spec expects " +
                         std::to_string(spec.input_dim()));
  }
  DiscreteRollout out;
  out.hidden.reserve(n + 1);
  out.outputs.reserve(n + 1);
  out.hidden.push_back(layer_apply(spec.embed, x));
  out.outputs.push_back(layer_apply(spec.readout, out.hidden.back()));
  for (std::size_t t = 0; t < n; ++t) {
    out.hidden.push_back(mlp_apply(spec.hidden, out.hidden.back()));
    out.outputs.push_back(layer_apply(spec.readout, out.hidden.back()));
  }
  return out;
}

}  // namespace rnnode
