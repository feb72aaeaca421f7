#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "rnnode/datasets.hpp"
#include "rnnode/linalg.hpp"
#include "rnnode/network.hpp"

namespace rnnode {

// log(y) is evaluated as log(max(y, kLogClip)).
inline constexpr double kLogClip = 1e-12;

struct LayerGradient {
  Matrix weights;
  Vector bias;
};

// Same shapes as the model it was computed for. Flattened order is
// embed (W, b), hidden layers in order (W, b), readout (W, b), each W row-major.
struct GradientBundle {
  LayerGradient embed;
  std::vector<LayerGradient> hidden;
  LayerGradient readout;

  static GradientBundle zeros_like(const RnnOdeSpec& spec);

  std::size_t size() const;
  std::vector<double> flatten() const;
  static GradientBundle unflatten(const RnnOdeSpec& shape, std::span<const double> values);

  double norm() const;

  GradientBundle& operator*=(double s);
  GradientBundle& operator+=(const GradientBundle& other);
};

// Mutable views of every trainable scalar, in GradientBundle order.
std::vector<double*> parameter_pointers(RnnOdeSpec& spec);

// theta <- theta + alpha * direction.
void add_scaled(RnnOdeSpec& spec, double alpha, const GradientBundle& direction);

// Sum over k = 0..n_steps and over the selected data of -log y_true<k>.
double cross_entropy_loss(const RnnOdeSpec& spec, const Dataset& data, std::size_t n_steps);
double cross_entropy_loss(const RnnOdeSpec& spec, const Dataset& data, std::span<const std::size_t> batch,
                          std::size_t n_steps);

struct LossAndGradient {
  double loss = 0.0;
  GradientBundle gradient;
};

// Reverse-mode gradient of cross_entropy_loss through the unrolled recursion.
LossAndGradient loss_and_gradient(const RnnOdeSpec& spec, const Dataset& data, std::span<const std::size_t> batch,
                                  std::size_t n_steps);
GradientBundle bptt_gradient(const RnnOdeSpec& spec, const Dataset& data, std::span<const std::size_t> batch,
                             std::size_t n_steps);
GradientBundle bptt_gradient(const RnnOdeSpec& spec, const Dataset& data, std::size_t n_steps);

// Central differences, one loss pair per scalar parameter. h in [1e-7, 1e-3].
GradientBundle finite_diff_gradient(const RnnOdeSpec& spec, const Dataset& data, std::span<const std::size_t> batch,
                                    std::size_t n_steps, double h);
GradientBundle finite_diff_gradient(const RnnOdeSpec& spec, const Dataset& data, std::size_t n_steps, double h);

// max_i |a_i - b_i| / max(|a_i|, |b_i|, floor).
double max_relative_error(const GradientBundle& a, const GradientBundle& b, double floor);

struct Architecture {
  std::size_t input_dim = 2;
  std::size_t state_dim = 3;
  std::size_t num_labels = 3;
  // Widths of the layers inside the hidden map before its final d -> d layer;
  // empty means a single d -> d layer.
  std::vector<std::size_t> hidden_widths{8};
  Activation embed_activation = Activation::tanh;
  Activation hidden_activation = Activation::tanh;
  double tau = 0.1;
  std::size_t n_steps = 50;

  void validate() const;
};

// Weights and biases uniform in [-init_scale / sqrt(d_in), init_scale / sqrt(d_in)].
RnnOdeSpec initialize_spec(const Architecture& arch, std::uint64_t seed, double init_scale);

enum class Optimizer { sgd, sgd_momentum };

struct TrainConfig {
  double learning_rate = 0.03;
  std::size_t epochs = 500;
  std::size_t batch_size = 32;
  Optimizer optimizer = Optimizer::sgd_momentum;
  double momentum = 0.9;
  std::uint64_t seed = 0;
  double init_scale = 3.0;
  // Rescale each normalized batch gradient to at most this Euclidean norm;
  // 0 disables clipping.
  double clip_norm = 0.5;

  void validate(std::size_t dataset_size) const;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double loss = 0.0;
  double train_error = 0.0;  // misclassified fraction
};

struct TrainResult {
  RnnOdeSpec spec;
  double initial_loss = 0.0;
  std::vector<EpochRecord> history;
  bool diverged = false;
  std::string divergence_message;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

// Mini-batch gradient descent on the loss. Each step moves along the batch
// gradient divided by batch_size * (n_steps + 1), norm-clipped if configured. On divergence the result
// carries the model from the last finite epoch.
TrainResult train(const TrainConfig& config, const Dataset& data, const Architecture& arch,
                  const EpochCallback& on_epoch = {});
TrainResult train_from(const TrainConfig& config, const Dataset& data, RnnOdeSpec initial,
                       const EpochCallback& on_epoch = {});

struct Evaluation {
  std::size_t misclassified = 0;
  double accuracy = 0.0;
  // confusion[true][predicted], 0-based.
  std::vector<std::vector<std::size_t>> confusion;
};

// Classifies each datum by the terminal output y<n_steps>.
Evaluation evaluate(const RnnOdeSpec& spec, const Dataset& data, std::size_t n_steps);

// Header "epoch,loss,train_error".
void write_history_csv(const std::vector<EpochRecord>& history, std::ostream& out);
void write_history_csv(const std::vector<EpochRecord>& history, const std::string& path);

}  // namespace rnnode
