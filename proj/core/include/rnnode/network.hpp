#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "rnnode/linalg.hpp"

namespace rnnode {

enum class Activation { identity, relu, tanh, sigmoid, softmax };

std::string_view to_string(Activation kind);
// Throws ConfigError on an unknown tag.
Activation activation_from_string(std::string_view tag);

// Softmax acts on the whole vector (max-shifted); every other kind is
// elementwise. Throws DomainError on non-finite input.
Vector activation_apply(Activation kind, const Vector& v);

// One dense layer x -> sigma(W x + b).
struct LayerParams {
  Matrix weights;
  Vector bias;
  Activation activation = Activation::identity;

  std::size_t input_dim() const noexcept { return static_cast<std::size_t>(weights.cols()); }
  std::size_t output_dim() const noexcept { return static_cast<std::size_t>(weights.rows()); }

  // Row count equals bias length and every entry is finite.
  void validate() const;
};

Vector layer_apply(const LayerParams& layer, const Vector& x);

// The hidden map xi: an ordered composition of dense layers.
struct MlpParams {
  std::vector<LayerParams> layers;

  std::size_t input_dim() const;
  std::size_t output_dim() const;

  // Non-empty, chained dimensions agree. With `require_square`, the map
  // must send R^d to R^d.
  void validate(bool require_square = true) const;
};

Vector mlp_apply(const MlpParams& theta, const Vector& x);

// All trainable parameters of the RNN ODE plus its time discretization.
//   a(0)  = embed(x)
//   a+    = hidden(a)                   (discrete)
//   da/dt = (hidden(a) - a) / tau        (continuous)
//   y     = softmax(W_y a + b_y)
struct RnnOdeSpec {
  LayerParams embed;
  MlpParams hidden;
  LayerParams readout;
  double tau = 0.1;
  double horizon = 5.0;
  std::size_t n_steps = 50;

  std::size_t input_dim() const noexcept { return embed.input_dim(); }
  std::size_t state_dim() const noexcept { return embed.output_dim(); }
  std::size_t num_labels() const noexcept { return readout.output_dim(); }

  // Checks every structural invariant, including tau == horizon / n_steps
  // (relative tolerance 1e-12) and a softmax readout.
  void validate() const;
};

// Builds the one-layer hidden map of a single-layer (Class I) recurrent net.
MlpParams single_layer_map(Matrix weights, Vector bias, Activation activation);

struct DiscreteRollout {
  std::vector<Vector> hidden;   // a<0> .. a<n>
  std::vector<Vector> outputs;  // y<0> .. y<n>
};

DiscreteRollout rnn_unroll_discrete(const RnnOdeSpec& spec, const Vector& x, std::size_t n);

}  // namespace rnnode
