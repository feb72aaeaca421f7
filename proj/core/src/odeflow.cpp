#include "rnnode/odeflow.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>

#include "rnnode/errors.hpp"

namespace rnnode {

std::string_view to_string(Method method) {
  return method == Method::euler ? "euler" : "rk4";
}

Method method_from_string(std::string_view tag) {
  if (tag == "euler") return Method::euler;
  if (tag == "rk4") return Method::rk4;
  throw ConfigError("unknown integrator '" + std::string(tag) + "'");
}

Vector integrator_step(const VectorField& field, double t, const Vector& s, double h, Method method) {
  if (method == Method::euler) return s + h * field(t, s);
  const Vector k1 = field(t, s);
  const Vector k2 = field(t + 0.5 * h, s + (0.5 * h) * k1);
  const Vector k3 = field(t + 0.5 * h, s + (0.5 * h) * k2);
  const Vector k4 = field(t + h, s + h * k3);
  return s + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

void check_finite_state(const Vector& s, double t) {
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (!std::isfinite(s(i)) || std::abs(s(i)) > kDivergenceBound) {
      std::ostringstream msg;
      msg << std::setprecision(17) << "integration diverged at t = " << t << " (component " << i
          << " = " << s(i) << ")";
      throw DivergenceError(msg.str(), t);
    }
  }
}

Trajectory integrate(const VectorField& field, const Vector& x0, const TimeGrid& grid, Method method) {
  check_finite_state(x0, 0.0);
  Trajectory traj{grid, {}};
  traj.states.reserve(grid.size());
  traj.states.push_back(x0);
  for (std::size_t k = 0; k < grid.num_steps(); ++k) {
    Vector next = integrator_step(field, grid.time(k), traj.states.back(), grid.step(), method);
    check_finite_state(next, grid.time(k + 1));
    traj.states.push_back(std::move(next));
  }
  return traj;
}

Vector xi_tilde(const RnnOdeSpec& spec, const Vector& a) {
  if (!(spec.tau > 0.0)) throw ConfigError("tau must be positive");
  return (mlp_apply(spec.hidden, a) - a) / spec.tau;
}

Trajectory hidden_flow(const RnnOdeSpec& spec, const Vector& x, const TimeGrid& grid, Method method) {
  if (static_cast<std::size_t>(x.size()) != spec.input_dim()) {
    throw DimensionError("input has length " + std::to_string(x.size()) + ", spec expects " +
                         std::to_string(spec.input_dim()));
  }
  const Vector a0 = layer_apply(spec.embed, x);
  return integrate([&spec](double, const Vector& a) { return xi_tilde(spec, a); }, a0, grid, method);
}

Trajectory output_trace(const RnnOdeSpec& spec, const Trajectory& hidden) {
  if (hidden.state_dim() != spec.readout.input_dim()) {
    throw DimensionError("hidden trajectory has dimension " + std::to_string(hidden.state_dim()) +
                         ", readout expects " + std::to_string(spec.readout.input_dim()));
  }
  Trajectory out{hidden.grid, {}};
  out.states.reserve(hidden.states.size());
  for (const auto& a : hidden.states) out.states.push_back(layer_apply(spec.readout, a));
  return out;
}

void write_trajectory_csv(const Trajectory& trajectory, std::ostream& out) {
  out << 't';
  for (std::size_t i = 0; i < trajectory.state_dim(); ++i) out << ",s_" << i;
  out << '\n' << std::setprecision(17);
  for (std::size_t k = 0; k < trajectory.states.size(); ++k) {
    out << trajectory.grid.time(k);
    const Vector& s = trajectory.states[k];
    for (Eigen::Index i = 0; i < s.size(); ++i) out << ',' << s(i);
    out << '\n';
  }
}

void write_trajectory_csv(const Trajectory& trajectory, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open '" + path + "' for writing");
  write_trajectory_csv(trajectory, out);
}

}  // namespace rnnode
