#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "rnnode/linalg.hpp"
#include "rnnode/network.hpp"
#include "rnnode/time_grid.hpp"

namespace rnnode {

enum class Method { euler, rk4 };

std::string_view to_string(Method method);
Method method_from_string(std::string_view tag);

// Any integrated state component beyond this magnitude counts as divergence.
inline constexpr double kDivergenceBound = 1e8;

struct Trajectory {
  TimeGrid grid;
  std::vector<Vector> states;  // one per grid point

  std::size_t state_dim() const { return states.empty() ? 0 : static_cast<std::size_t>(states.front().size()); }
  const Vector& final_state() const { return states.back(); }
};

using VectorField = std::function<Vector(double t, const Vector& s)>;

// One explicit step of size h from (t, s).
Vector integrator_step(const VectorField& field, double t, const Vector& s, double h, Method method);

// Throws DivergenceError at `t` if `s` is non-finite or exceeds kDivergenceBound.
void check_finite_state(const Vector& s, double t);

Trajectory integrate(const VectorField& field, const Vector& x0, const TimeGrid& grid, Method method);

// (hidden(a) - a) / tau.
Vector xi_tilde(const RnnOdeSpec& spec, const Vector& a);

Trajectory hidden_flow(const RnnOdeSpec& spec, const Vector& x, const TimeGrid& grid, Method method);

// Softmax readout applied pointwise in time.
Trajectory output_trace(const RnnOdeSpec& spec, const Trajectory& hidden);

// CSV with header "t,s_0,...,s_{d-1}" and 17 significant digits.
void write_trajectory_csv(const Trajectory& trajectory, std::ostream& out);
void write_trajectory_csv(const Trajectory& trajectory, const std::string& path);

}  // namespace rnnode
