#pragma once

#include <rnnode/network.hpp>
#include <rnnode/training.hpp>

#include <cstdint>
#include <vector>

namespace rnnode::testing {

inline Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  const auto r = static_cast<Eigen::Index>(rows.size());
  const auto c = static_cast<Eigen::Index>(rows.begin()->size());
  Matrix m(r, c);
  Eigen::Index i = 0;
  for (const auto& row : rows) {
    Eigen::Index j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

inline Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v(i++) = x;
  return v;
}

// One input, scalar hidden state a -> w*a, identity embedding, readout z = wy * a.
inline RnnOdeSpec scalar_chain(double w, double tau, const Matrix& wy, std::size_t n_steps = 10) {
  RnnOdeSpec spec;
  spec.embed = LayerParams{Matrix::Identity(1, 1), Vector::Zero(1), Activation::identity};
  spec.hidden = single_layer_map(mat({{w}}), Vector::Zero(1), Activation::identity);
  spec.readout = LayerParams{wy, Vector::Zero(wy.rows()), Activation::softmax};
  spec.tau = tau;
  spec.n_steps = n_steps;
  spec.horizon = tau * static_cast<double>(n_steps);
  return spec;
}

inline RnnOdeSpec identity_hidden_spec(std::size_t m, std::size_t d, std::size_t n, std::uint64_t seed) {
  Architecture arch;
  arch.input_dim = m;
  arch.state_dim = d;
  arch.num_labels = n;
  arch.hidden_widths = {};
  RnnOdeSpec spec = initialize_spec(arch, seed, 1.0);
  spec.hidden = single_layer_map(Matrix::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d)),
                                 Vector::Zero(static_cast<Eigen::Index>(d)), Activation::identity);
  return spec;
}

inline RnnOdeSpec random_spec(std::size_t m, std::size_t d, std::size_t n, std::uint64_t seed,
                              std::vector<std::size_t> widths = {}, double scale = 1.0) {
  Architecture arch;
  arch.input_dim = m;
  arch.state_dim = d;
  arch.num_labels = n;
  arch.hidden_widths = std::move(widths);
  return initialize_spec(arch, seed, scale);
}

}  // namespace rnnode::testing
