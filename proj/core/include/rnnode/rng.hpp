#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace rnnode {

// Seeded generator with a fully specified output stream so results can be
// reproduced outside C++: the engine is std::mt19937_64, uniforms take the
// top 53 bits, normals use the Box-Muller transform (cosine branch first).
class Rng {
 public:
  static constexpr std::string_view kAlgorithm = "mt19937_64";

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  // Uniform on [0, 1).
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  double normal();
  // Uniform integer in [0, n), rejection-sampled.
  std::uint64_t below(std::uint64_t n);
  // Fisher-Yates, from the back.
  void shuffle(std::span<std::size_t> items);

 private:
  std::mt19937_64 engine_;
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace rnnode
