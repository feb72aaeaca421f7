#pragma once

#include <cstddef>

namespace rnnode {

// Uniform grid 0 = t_0 < t_1 < ... < t_{n-1} with fixed step. The last
// point lands on the horizon to within one step.
class TimeGrid {
 public:
  // Number of steps is round(t_end / step); throws ConfigError for
  // non-positive or non-finite arguments.
  TimeGrid(double t_end, double step);

  double t_end() const noexcept { return t_end_; }
  double step() const noexcept { return step_; }
  std::size_t num_steps() const noexcept { return num_steps_; }
  std::size_t size() const noexcept { return num_steps_ + 1; }
  double time(std::size_t k) const noexcept { return static_cast<double>(k) * step_; }
  double last_time() const noexcept { return time(num_steps_); }

 private:
  double t_end_;
  double step_;
  std::size_t num_steps_;
};

}  // namespace rnnode
