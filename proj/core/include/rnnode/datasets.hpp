#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rnnode/linalg.hpp"

namespace rnnode {

// Labelled inputs. Labels are stored 0-based; everything user-facing
// (files, CLI, classify) is 1-based, with one_hot() as the boundary.
struct Dataset {
  std::string name;
  std::optional<std::uint64_t> seed;
  std::string rng;  // generator algorithm id, empty if not generated
  std::size_t input_dim = 0;
  std::size_t num_labels = 0;
  std::vector<Vector> inputs;
  std::vector<std::size_t> labels;
  // Row/column count of image data read from IDX files.
  std::optional<std::pair<std::uint32_t, std::uint32_t>> image_shape;

  std::size_t size() const noexcept { return inputs.size(); }
  Vector label_vector(std::size_t j) const;

  // Throws DimensionError / DomainError if sizes, label range or finiteness fail.
  void validate() const;
};

// 1 at position `label` (1-based), 0 elsewhere.
Vector one_hot(std::size_t label, std::size_t num_labels);

// Gaussian clusters in the plane, one label per center, class-major order.
Dataset gen_blobs(std::size_t n_per_class, const std::vector<std::array<double, 2>>& centers, double sigma,
                  std::uint64_t seed);

// `count` centers spaced evenly on a circle of the given radius.
std::vector<std::array<double, 2>> circle_centers(std::size_t count, double radius);

enum class TwoClassKind { concentric_rings, interleaved_arcs };

// Two non-linearly-separable classes in the plane. Class 1 takes the first
// ceil(n/2) points. Rings: radii 1 and 2.5 with radial noise. Arcs: the
// upper unit half-circle and a shifted, flipped copy, with isotropic noise.
Dataset gen_two_class(TwoClassKind kind, std::size_t n, double noise, std::uint64_t seed);

// MNIST-style IDX pair. Pixels are divided by 255 and digit d becomes label d+1.
Dataset load_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path);
// Inverse of load_idx; every input must be an exact multiple of 1/255.
void save_idx(const Dataset& dataset, const std::filesystem::path& images_path,
              const std::filesystem::path& labels_path);

// Text format:
//   # rnnode-dataset name=<name> M=<M> N=<N> D=<D> seed=<seed|none> rng=<id|none>
//   x_1,...,x_M,label
//   <M values at 17 significant digits>,<1-based label>
void write_csv(const Dataset& dataset, std::ostream& out);
Dataset read_csv(std::istream& in, const std::string& source = "<stream>");
void save_csv(const Dataset& dataset, const std::filesystem::path& path);
Dataset load_csv(const std::filesystem::path& path);

// First `count` data in order.
Dataset take(const Dataset& dataset, std::size_t count);

// Seeded shuffle, then the first round(fraction * D) data go to the first set.
std::pair<Dataset, Dataset> shuffle_split(const Dataset& dataset, double fraction, std::uint64_t seed);

}  // namespace rnnode
