#include "rnnode/training.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <string>

#include "rnnode/errors.hpp"
#include "rnnode/odeflow.hpp"
#include "rnnode/rng.hpp"

namespace rnnode {
namespace {

// Columns are data.
using Block = Eigen::MatrixXd;

constexpr std::size_t kChunk = 512;

void apply_activation(Activation kind, Block& m) {
  switch (kind) {
    case Activation::identity:
      break;
    case Activation::relu:
      m = m.cwiseMax(0.0);
      break;
    case Activation::tanh:
      m = m.array().tanh().matrix();
      break;
    case Activation::sigmoid:
      m = (1.0 / (1.0 + (-m.array()).exp())).matrix();
      break;
    case Activation::softmax:
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        auto col = m.col(c);
        col = (col.array() - col.maxCoeff()).exp().matrix();
        col /= col.sum();
      }
      break;
  }
}

// Gradient w.r.t. the pre-activation, given the activation output.
Block activation_backward(Activation kind, const Block& out, const Block& grad) {
  switch (kind) {
    case Activation::identity:
      return grad;
    case Activation::relu:
      return (out.array() > 0.0).select(grad, 0.0);
    case Activation::tanh:
      return (grad.array() * (1.0 - out.array().square())).matrix();
    case Activation::sigmoid:
      return (grad.array() * out.array() * (1.0 - out.array())).matrix();
    case Activation::softmax: {
      const Eigen::RowVectorXd dots = out.cwiseProduct(grad).colwise().sum();
      return (out.array() * (grad.rowwise() - dots).array()).matrix();
    }
  }
  return grad;
}

Block layer_forward(const LayerParams& layer, const Block& x) {
  Block pre = layer.weights * x;
  pre.colwise() += layer.bias;
  apply_activation(layer.activation, pre);
  return pre;
}

void check_block(const Block& m, std::size_t step, double tau) {
  if (!m.allFinite() || m.cwiseAbs().maxCoeff() > kDivergenceBound) {
    throw DivergenceError("unrolled recursion produced a non-finite state at step " + std::to_string(step),
                          static_cast<double>(step) * tau);
  }
}

void check_dims(const RnnOdeSpec& spec, const Dataset& data) {
  if (data.input_dim != spec.input_dim()) {
    throw DimensionError("dataset inputs have length " + std::to_string(data.input_dim) + ", spec expects " +
                         std::to_string(spec.input_dim()));
  }
  if (data.num_labels != spec.num_labels()) {
    throw DimensionError("dataset has " + std::to_string(data.num_labels) + " labels, spec emits " +
                         std::to_string(spec.num_labels()));
  }
}

Block gather_inputs(const Dataset& data, std::span<const std::size_t> batch) {
  Block x(static_cast<Eigen::Index>(data.input_dim), static_cast<Eigen::Index>(batch.size()));
  for (std::size_t b = 0; b < batch.size(); ++b) x.col(static_cast<Eigen::Index>(b)) = data.inputs.at(batch[b]);
  return x;
}

double batch_log_loss(const Block& y, const Dataset& data, std::span<const std::size_t> batch) {
  double loss = 0.0;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const double p = y(static_cast<Eigen::Index>(data.labels[batch[b]]), static_cast<Eigen::Index>(b));
    loss -= std::log(std::max(p, kLogClip));
  }
  return loss;
}

std::vector<std::size_t> all_indices(const Dataset& data) {
  std::vector<std::size_t> idx(data.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return idx;
}

struct ForwardStats {
  double loss = 0.0;
  std::vector<std::size_t> predictions;  // 0-based, terminal step
};

// Loss over every step plus terminal predictions, without caching.
ForwardStats forward_stats(const RnnOdeSpec& spec, const Dataset& data, std::span<const std::size_t> batch,
                           std::size_t n_steps) {
  check_dims(spec, data);
  ForwardStats stats;
  stats.predictions.reserve(batch.size());
  for (std::size_t start = 0; start < batch.size(); start += kChunk) {
    const auto chunk = batch.subspan(start, std::min(kChunk, batch.size() - start));
    Block a = layer_forward(spec.embed, gather_inputs(data, chunk));
    check_block(a, 0, spec.tau);
    Block y = layer_forward(spec.readout, a);
    stats.loss += batch_log_loss(y, data, chunk);
    for (std::size_t k = 1; k <= n_steps; ++k) {
      for (const auto& layer : spec.hidden.layers) a = layer_forward(layer, a);
      check_block(a, k, spec.tau);
      y = layer_forward(spec.readout, a);
      stats.loss += batch_log_loss(y, data, chunk);
    }
    for (Eigen::Index c = 0; c < y.cols(); ++c) {
      Eigen::Index best = 0;
      for (Eigen::Index i = 1; i < y.rows(); ++i) {
        if (y(i, c) > y(best, c)) best = i;
      }
      stats.predictions.push_back(static_cast<std::size_t>(best));
    }
  }
  return stats;
}

void accumulate_layer(LayerGradient& g, const Block& dpre, const Block& input) {
  g.weights.noalias() += dpre * input.transpose();
  g.bias += dpre.rowwise().sum();
}

LayerGradient zero_layer(const LayerParams& layer) {
  return LayerGradient{Matrix::Zero(layer.weights.rows(), layer.weights.cols()),
                       Vector::Zero(layer.bias.size())};
}

void append_flat(std::vector<double>& out, const LayerGradient& g) {
  out.insert(out.end(), g.weights.data(), g.weights.data() + g.weights.size());
  out.insert(out.end(), g.bias.data(), g.bias.data() + g.bias.size());
}

void append_pointers(std::vector<double*>& out, LayerParams& layer) {
  for (Eigen::Index i = 0; i < layer.weights.size(); ++i) out.push_back(layer.weights.data() + i);
  for (Eigen::Index i = 0; i < layer.bias.size(); ++i) out.push_back(layer.bias.data() + i);
}

std::size_t read_flat(LayerGradient& g, std::span<const double> values, std::size_t offset) {
  for (Eigen::Index i = 0; i < g.weights.size(); ++i) g.weights.data()[i] = values[offset++];
  for (Eigen::Index i = 0; i < g.bias.size(); ++i) g.bias(i) = values[offset++];
  return offset;
}

void init_layer(LayerParams& layer, std::size_t d_out, std::size_t d_in, Activation act, double scale, Rng& rng) {
  const double bound = scale / std::sqrt(static_cast<double>(d_in));
  layer.weights.resize(static_cast<Eigen::Index>(d_out), static_cast<Eigen::Index>(d_in));
  layer.bias.resize(static_cast<Eigen::Index>(d_out));
  for (Eigen::Index i = 0; i < layer.weights.size(); ++i) layer.weights.data()[i] = rng.uniform(-bound, bound);
  for (Eigen::Index i = 0; i < layer.bias.size(); ++i) layer.bias(i) = rng.uniform(-bound, bound);
  layer.activation = act;
}

}  // namespace

GradientBundle GradientBundle::zeros_like(const RnnOdeSpec& spec) {
  GradientBundle g;
  g.embed = zero_layer(spec.embed);
  for (const auto& layer : spec.hidden.layers) g.hidden.push_back(zero_layer(layer));
  g.readout = zero_layer(spec.readout);
  return g;
}

std::size_t GradientBundle::size() const {
  auto count = [](const LayerGradient& g) { return static_cast<std::size_t>(g.weights.size() + g.bias.size()); };
  std::size_t n = count(embed) + count(readout);
  for (const auto& h : hidden) n += count(h);
  return n;
}

std::vector<double> GradientBundle::flatten() const {
  std::vector<double> out;
  out.reserve(size());
  append_flat(out, embed);
  for (const auto& h : hidden) append_flat(out, h);
  append_flat(out, readout);
  return out;
}

GradientBundle GradientBundle::unflatten(const RnnOdeSpec& shape, std::span<const double> values) {
  GradientBundle g = zeros_like(shape);
  if (values.size() != g.size()) throw DimensionError("flat gradient length does not match spec");
  std::size_t offset = read_flat(g.embed, values, 0);
  for (auto& h : g.hidden) offset = read_flat(h, values, offset);
  read_flat(g.readout, values, offset);
  return g;
}

double GradientBundle::norm() const {
  double sq = embed.weights.squaredNorm() + embed.bias.squaredNorm() + readout.weights.squaredNorm() +
              readout.bias.squaredNorm();
  for (const auto& h : hidden) sq += h.weights.squaredNorm() + h.bias.squaredNorm();
  return std::sqrt(sq);
}

GradientBundle& GradientBundle::operator*=(double s) {
  auto scale = [s](LayerGradient& g) {
    g.weights *= s;
    g.bias *= s;
  };
  scale(embed);
  for (auto& h : hidden) scale(h);
  scale(readout);
  return *this;
}

GradientBundle& GradientBundle::operator+=(const GradientBundle& other) {
  if (other.hidden.size() != hidden.size()) throw DimensionError("gradient bundles have different depth");
  auto add = [](LayerGradient& g, const LayerGradient& o) {
    g.weights += o.weights;
    g.bias += o.bias;
  };
  add(embed, other.embed);
  for (std::size_t k = 0; k < hidden.size(); ++k) add(hidden[k], other.hidden[k]);
  add(readout, other.readout);
  return *this;
}

std::vector<double*> parameter_pointers(RnnOdeSpec& spec) {
  std::vector<double*> out;
  append_pointers(out, spec.embed);
  for (auto& layer : spec.hidden.layers) append_pointers(out, layer);
  append_pointers(out, spec.readout);
  return out;
}

void add_scaled(RnnOdeSpec& spec, double alpha, const GradientBundle& direction) {
  if (direction.hidden.size() != spec.hidden.layers.size()) {
    throw DimensionError("gradient depth does not match spec");
  }
  auto step = [alpha](LayerParams& layer, const LayerGradient& g) {
    layer.weights += alpha * g.weights;
    layer.bias += alpha * g.bias;
  };
  step(spec.embed, direction.embed);
  for (std::size_t k = 0; k < direction.hidden.size(); ++k) step(spec.hidden.layers[k], direction.hidden[k]);
  step(spec.readout, direction.readout);
}

double cross_entropy_loss(const RnnOdeSpec& spec, const Dataset& data, std::size_t n_steps) {
  const auto idx = all_indices(data);
  return cross_entropy_loss(spec, data, idx, n_steps);
}

double cross_entropy_loss(const RnnOdeSpec& spec, const Dataset& data, std::span<const std::size_t> batch,
                          std::size_t n_steps) {
  return forward_stats(spec, data, batch, n_steps).loss;
}

LossAndGradient loss_and_gradient(const RnnOdeSpec& spec, const Dataset& data, std::span<const std::size_t> batch,
                                  std::size_t n_steps) {
  check_dims(spec, data);
  LossAndGradient result{0.0, GradientBundle::zeros_like(spec)};
  if (batch.empty()) return result;
  const std::size_t depth = spec.hidden.layers.size();

  const Block x = gather_inputs(data, batch);
  // states[k] = a<k>; inner[k][l] = output of hidden layer l < depth-1 applied to a<k>.
  std::vector<Block> states;
  std::vector<std::vector<Block>> inner(n_steps);
  std::vector<Block> outputs;
  states.reserve(n_steps + 1);
  outputs.reserve(n_steps + 1);

  states.push_back(layer_forward(spec.embed, x));
  check_block(states.back(), 0, spec.tau);
  outputs.push_back(layer_forward(spec.readout, states.back()));
  result.loss += batch_log_loss(outputs.back(), data, batch);
  for (std::size_t k = 0; k < n_steps; ++k) {
    Block h = states.back();
    for (std::size_t l = 0; l < depth; ++l) {
      h = layer_forward(spec.hidden.layers[l], h);
      if (l + 1 < depth) inner[k].push_back(h);
    }
    check_block(h, k + 1, spec.tau);
    states.push_back(std::move(h));
    outputs.push_back(layer_forward(spec.readout, states.back()));
    result.loss += batch_log_loss(outputs.back(), data, batch);
  }

  GradientBundle& g = result.gradient;
  const Matrix& w_y = spec.readout.weights;
  Block grad_a = Block::Zero(states.front().rows(), states.front().cols());
  for (std::size_t k = n_steps + 1; k-- > 0;) {
    Block dz = outputs[k];
    for (std::size_t b = 0; b < batch.size(); ++b) {
      const auto col = static_cast<Eigen::Index>(b);
      const auto row = static_cast<Eigen::Index>(data.labels[batch[b]]);
      if (dz(row, col) < kLogClip) {
        dz.col(col).setZero();  // clipped term is locally constant
      } else {
        dz(row, col) -= 1.0;
      }
    }
    accumulate_layer(g.readout, dz, states[k]);
    grad_a.noalias() += w_y.transpose() * dz;

    if (k == 0) {
      const Block dpre = activation_backward(spec.embed.activation, states[0], grad_a);
      accumulate_layer(g.embed, dpre, x);
      break;
    }
    // Back through a<k> = hidden(a<k-1>).
    for (std::size_t l = depth; l-- > 0;) {
      const LayerParams& layer = spec.hidden.layers[l];
      const Block& out = (l + 1 == depth) ? states[k] : inner[k - 1][l];
      const Block& in = (l == 0) ? states[k - 1] : inner[k - 1][l - 1];
      const Block dpre = activation_backward(layer.activation, out, grad_a);
      accumulate_layer(g.hidden[l], dpre, in);
      grad_a.noalias() = layer.weights.transpose() * dpre;
    }
  }
  return result;
}

GradientBundle bptt_gradient(const RnnOdeSpec& spec, const Dataset& data, std::span<const std::size_t> batch,
                             std::size_t n_steps) {
  return loss_and_gradient(spec, data, batch, n_steps).gradient;
}

GradientBundle bptt_gradient(const RnnOdeSpec& spec, const Dataset& data, std::size_t n_steps) {
  const auto idx = all_indices(data);
  return bptt_gradient(spec, data, idx, n_steps);
}

GradientBundle finite_diff_gradient(const RnnOdeSpec& spec, const Dataset& data, std::span<const std::size_t> batch,
                                    std::size_t n_steps, double h) {
  if (!(h >= 1e-7 && h <= 1e-3)) throw ConfigError("finite-difference step must lie in [1e-7, 1e-3]");
  RnnOdeSpec probe = spec;
  const auto params = parameter_pointers(probe);
  std::vector<double> flat(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double saved = *params[i];
    *params[i] = saved + h;
    const double up = cross_entropy_loss(probe, data, batch, n_steps);
    *params[i] = saved - h;
    const double down = cross_entropy_loss(probe, data, batch, n_steps);
    *params[i] = saved;
    flat[i] = (up - down) / (2.0 * h);
  }
  return GradientBundle::unflatten(spec, flat);
}

GradientBundle finite_diff_gradient(const RnnOdeSpec& spec, const Dataset& data, std::size_t n_steps, double h) {
  const auto idx = all_indices(data);
  return finite_diff_gradient(spec, data, idx, n_steps, h);
}

double max_relative_error(const GradientBundle& a, const GradientBundle& b, double floor) {
  const auto fa = a.flatten();
  const auto fb = b.flatten();
  if (fa.size() != fb.size()) throw DimensionError("gradient bundles have different sizes");
  double worst = 0.0;
  for (std::size_t i = 0; i < fa.size(); ++i) {
    const double scale = std::max({std::abs(fa[i]), std::abs(fb[i]), floor});
    worst = std::max(worst, std::abs(fa[i] - fb[i]) / scale);
  }
  return worst;
}

void Architecture::validate() const {
  if (input_dim == 0 || state_dim == 0 || num_labels == 0) {
    throw ConfigError("architecture dimensions must be positive");
  }
  for (std::size_t w : hidden_widths) {
    if (w == 0) throw ConfigError("hidden widths must be positive");
  }
  if (num_labels < 2) throw ConfigError("classification needs at least two labels");
  if (!(tau > 0.0) || !std::isfinite(tau)) throw ConfigError("tau must be positive");
  if (n_steps == 0) throw ConfigError("n_steps must be positive");
}

RnnOdeSpec initialize_spec(const Architecture& arch, std::uint64_t seed, double init_scale) {
  arch.validate();
  if (!(init_scale > 0.0) || !std::isfinite(init_scale)) throw ConfigError("init_scale must be positive");
  Rng rng(seed);
  RnnOdeSpec spec;
  init_layer(spec.embed, arch.state_dim, arch.input_dim, arch.embed_activation, init_scale, rng);
  std::size_t d_in = arch.state_dim;
  for (std::size_t width : arch.hidden_widths) {
    LayerParams layer;
    init_layer(layer, width, d_in, arch.hidden_activation, init_scale, rng);
    spec.hidden.layers.push_back(std::move(layer));
    d_in = width;
  }
  LayerParams last;
  init_layer(last, arch.state_dim, d_in, arch.hidden_activation, init_scale, rng);
  spec.hidden.layers.push_back(std::move(last));
  init_layer(spec.readout, arch.num_labels, arch.state_dim, Activation::softmax, init_scale, rng);
  spec.tau = arch.tau;
  spec.n_steps = arch.n_steps;
  spec.horizon = arch.tau * static_cast<double>(arch.n_steps);
  spec.validate();
  return spec;
}

void TrainConfig::validate(std::size_t dataset_size) const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning_rate must be nonnegative and finite");
  }
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (batch_size > dataset_size) {
    throw ConfigError("batch_size " + std::to_string(batch_size) + " exceeds dataset size " +
                      std::to_string(dataset_size));
  }
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must lie in [0, 1)");
  if (!(init_scale > 0.0) || !std::isfinite(init_scale)) throw ConfigError("init_scale must be positive");
  if (!(clip_norm >= 0.0) || !std::isfinite(clip_norm)) throw ConfigError("clip_norm must be nonnegative");
}

TrainResult train(const TrainConfig& config, const Dataset& data, const Architecture& arch,
                  const EpochCallback& on_epoch) {
  if (data.size() == 0) throw ConfigError("training needs a nonempty dataset");
  if (arch.input_dim != data.input_dim || arch.num_labels != data.num_labels) {
    throw DimensionError("architecture does not match dataset dimensions");
  }
  return train_from(config, data, initialize_spec(arch, config.seed, config.init_scale), on_epoch);
}

TrainResult train_from(const TrainConfig& config, const Dataset& data, RnnOdeSpec initial,
                       const EpochCallback& on_epoch) {
  if (data.size() == 0) throw ConfigError("training needs a nonempty dataset");
  config.validate(data.size());
  data.validate();
  initial.validate();
  check_dims(initial, data);

  TrainResult result;
  result.spec = std::move(initial);
  const std::size_t n_steps = result.spec.n_steps;
  const auto everything = all_indices(data);
  try {
    result.initial_loss = forward_stats(result.spec, data, everything, n_steps).loss;
  } catch (const DivergenceError& e) {
    result.diverged = true;
    result.divergence_message = std::string("initial parameters: ") + e.what();
    return result;
  }

  // Separate stream from initialization, still a function of the seed.
  Rng shuffler(config.seed ^ 0x9e3779b97f4a7c15ULL);
  GradientBundle velocity = GradientBundle::zeros_like(result.spec);
  std::vector<std::size_t> order = everything;
  RnnOdeSpec last_good = result.spec;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    shuffler.shuffle(order);
    try {
      for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
        const std::span<const std::size_t> batch(order.data() + start,
                                                 std::min(config.batch_size, order.size() - start));
        GradientBundle grad = bptt_gradient(result.spec, data, batch, n_steps);
        grad *= 1.0 / (static_cast<double>(batch.size()) * static_cast<double>(n_steps + 1));
        if (config.clip_norm > 0.0) {
          const double norm = grad.norm();
          if (norm > config.clip_norm) grad *= config.clip_norm / norm;
        }
        if (config.optimizer == Optimizer::sgd_momentum) {
          velocity *= config.momentum;
          grad *= -config.learning_rate;
          velocity += grad;
          add_scaled(result.spec, 1.0, velocity);
        } else {
          add_scaled(result.spec, -config.learning_rate, grad);
        }
      }
      const ForwardStats stats = forward_stats(result.spec, data, everything, n_steps);
      if (!std::isfinite(stats.loss)) throw DivergenceError("training loss is not finite", 0.0);
      std::size_t wrong = 0;
      for (std::size_t j = 0; j < data.size(); ++j) wrong += stats.predictions[j] != data.labels[j];
      const EpochRecord record{epoch, stats.loss, static_cast<double>(wrong) / static_cast<double>(data.size())};
      result.history.push_back(record);
      last_good = result.spec;
      if (on_epoch) on_epoch(record);
    } catch (const DivergenceError& e) {
      result.diverged = true;
      result.divergence_message = "epoch " + std::to_string(epoch) + ": " + e.what();
      result.spec = std::move(last_good);
      return result;
    }
  }
  return result;
}

Evaluation evaluate(const RnnOdeSpec& spec, const Dataset& data, std::size_t n_steps) {
  const auto idx = all_indices(data);
  const ForwardStats stats = forward_stats(spec, data, idx, n_steps);
  Evaluation ev;
  ev.confusion.assign(data.num_labels, std::vector<std::size_t>(data.num_labels, 0));
  for (std::size_t j = 0; j < data.size(); ++j) {
    ++ev.confusion[data.labels[j]][stats.predictions[j]];
    ev.misclassified += stats.predictions[j] != data.labels[j];
  }
  ev.accuracy = data.size() == 0
                    ? 0.0
                    : 1.0 - static_cast<double>(ev.misclassified) / static_cast<double>(data.size());
  return ev;
}

void write_history_csv(const std::vector<EpochRecord>& history, std::ostream& out) {
  out << "epoch,loss,train_error\n" << std::setprecision(17);
  for (const auto& r : history) out << r.epoch << ',' << r.loss << ',' << r.train_error << '\n';
}

void write_history_csv(const std::vector<EpochRecord>& history, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open '" + path + "' for writing");
  write_history_csv(history, out);
}

}  // namespace rnnode
