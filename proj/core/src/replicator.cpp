#include "rnnode/replicator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rnnode/errors.hpp"

namespace rnnode {
namespace {

void require_same_length(const Vector& p, const Vector& f) {
  if (p.size() != f.size()) {
    throw DimensionError("population state has length " + std::to_string(p.size()) +
                         " but payoff has length " + std::to_string(f.size()));
  }
}

// Runs `method` on a stacked state whose trailing block [offset, offset+n)
// is a simplex coordinate. That block is measured and then projected back
// onto the simplex after every step.
std::vector<Vector> integrate_on_simplex(const VectorField& field, Vector s0, Eigen::Index offset,
                                         Eigen::Index n, const TimeGrid& grid, Method method,
                                         SimplexDrift& drift) {
  std::vector<Vector> states;
  states.reserve(grid.size());
  check_finite_state(s0, 0.0);
  states.push_back(std::move(s0));
  for (std::size_t k = 0; k < grid.num_steps(); ++k) {
    Vector next = integrator_step(field, grid.time(k), states.back(), grid.step(), method);
    check_finite_state(next, grid.time(k + 1));
    const Vector y = next.segment(offset, n);
    drift.observe(y);
    next.segment(offset, n) = project_to_simplex(y);
    states.push_back(std::move(next));
  }
  return states;
}

}  // namespace

SimplexPoint::SimplexPoint(Vector probs) : probs_(std::move(probs)) {
  if (probs_.size() == 0) throw DomainError("simplex point must have at least one component");
  if (!probs_.allFinite()) throw DomainError("simplex point has non-finite components");
  if (probs_.minCoeff() < 0.0) throw DomainError("simplex point has a negative component");
  if (std::abs(probs_.sum() - 1.0) > kSumTolerance) {
    throw DomainError("simplex point components must sum to 1");
  }
}

SimplexPoint SimplexPoint::vertex(std::size_t index, std::size_t n) {
  if (index >= n) throw DimensionError("vertex index out of range");
  Vector e = Vector::Zero(static_cast<Eigen::Index>(n));
  e(static_cast<Eigen::Index>(index)) = 1.0;
  return SimplexPoint(std::move(e));
}

SimplexPoint SimplexPoint::uniform(std::size_t n) {
  if (n == 0) throw DimensionError("uniform distribution needs n >= 1");
  return SimplexPoint(Vector::Constant(static_cast<Eigen::Index>(n), 1.0 / static_cast<double>(n)));
}

Vector replicator_rhs(const Vector& p, const Vector& payoff) {
  require_same_length(p, payoff);
  const double mean_payoff = payoff.dot(p);
  return p.cwiseProduct(payoff - Vector::Constant(payoff.size(), mean_payoff));
}

std::size_t classify(const Vector& y) {
  if (y.size() == 0) throw DimensionError("cannot classify an empty vector");
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < y.size(); ++i) {
    if (y(i) > y(best)) best = i;
  }
  return static_cast<std::size_t>(best) + 1;
}

double log_sum_exp(const Vector& z) {
  if (z.size() == 0) throw DimensionError("log-sum-exp of an empty vector");
  const double m = z.maxCoeff();
  return m + std::log((z.array() - m).exp().sum());
}

void SimplexDrift::observe(const Vector& y) {
  max_sum_error = std::max(max_sum_error, std::abs(y.sum() - 1.0));
  const double lo = y.minCoeff();
  min_component = std::min(min_component, lo);
  if (lo < 0.0) ++clamp_events;
}

Vector project_to_simplex(const Vector& y) {
  Vector p = y.cwiseMax(0.0);
  const double total = p.sum();
  if (!(total > 0.0)) throw DomainError("population state lost all mass");
  return p / total;
}

Vector dynamic_payoff(const RnnOdeSpec& spec, const Vector& a) {
  if (static_cast<std::size_t>(a.size()) != spec.readout.input_dim()) {
    throw DimensionError("hidden vector has length " + std::to_string(a.size()) + ", readout expects " +
                         std::to_string(spec.readout.input_dim()));
  }
  return spec.readout.weights * xi_tilde(spec, a);
}

CascadeDerivative cascade_rhs(const RnnOdeSpec& spec, const CascadeState& state) {
  CascadeDerivative d;
  d.da = xi_tilde(spec, state.a);
  d.dy = replicator_rhs(state.y, spec.readout.weights * d.da);
  return d;
}

CascadeRun integrate_cascade(const RnnOdeSpec& spec, const Vector& x, const TimeGrid& grid, Method method) {
  if (static_cast<std::size_t>(x.size()) != spec.input_dim()) {
    throw DimensionError("input has length " + std::to_string(x.size()) + ", spec expects " +
                         std::to_string(spec.input_dim()));
  }
  const Eigen::Index d = static_cast<Eigen::Index>(spec.state_dim());
  const Eigen::Index n = static_cast<Eigen::Index>(spec.num_labels());
  const Vector a0 = layer_apply(spec.embed, x);
  Vector s0(d + n);
  s0 << a0, layer_apply(spec.readout, a0);

  const VectorField field = [&spec, d, n](double, const Vector& s) {
    const CascadeDerivative der = cascade_rhs(spec, CascadeState{s.head(d), s.tail(n)});
    Vector out(d + n);
    out << der.da, der.dy;
    return out;
  };

  CascadeRun run{Trajectory{grid, {}}, Trajectory{grid, {}}, {}};
  const auto states = integrate_on_simplex(field, std::move(s0), d, n, grid, method, run.drift);
  run.hidden.states.reserve(states.size());
  run.output.states.reserve(states.size());
  for (const auto& s : states) {
    run.hidden.states.push_back(s.head(d));
    run.output.states.push_back(s.tail(n));
  }
  return run;
}

ReadoutInverse::ReadoutInverse(const LayerParams& readout) : bias_(readout.bias) {
  if (readout.weights.rows() != readout.weights.cols()) {
    throw InvertibilityError("readout matrix is " + std::to_string(readout.weights.rows()) + "x" +
                             std::to_string(readout.weights.cols()) + ", not square");
  }
  lu_.compute(Eigen::MatrixXd(readout.weights));
  rcond_ = lu_.rcond();
  if (!(rcond_ >= kMinReciprocalCondition)) {
    throw InvertibilityError("readout matrix is singular or ill-conditioned (rcond = " +
                             std::to_string(rcond_) + ")");
  }
}

Vector ReadoutInverse::reconstruct_hidden(const Vector& y, double log_partition) const {
  if (y.size() != bias_.size()) throw DimensionError("population state length does not match readout");
  if (y.minCoeff() < kInteriorFloor) {
    throw InteriorViolationError("population state left the simplex interior (min component " +
                                 std::to_string(y.minCoeff()) + ")");
  }
  const Vector rhs = (y.array().log() + log_partition).matrix() - bias_;
  return lu_.solve(rhs);
}

bool readout_invertible(const RnnOdeSpec& spec) {
  try {
    ReadoutInverse probe(spec.readout);
    return true;
  } catch (const InvertibilityError&) {
    return false;
  }
}

AugmentedState augmented_initial_state(const RnnOdeSpec& spec, const Vector& x) {
  const Vector a0 = layer_apply(spec.embed, x);
  const Vector z0 = spec.readout.weights * a0 + spec.readout.bias;
  return AugmentedState{activation_apply(Activation::softmax, z0), log_sum_exp(z0)};
}

AugmentedDerivative augmented_rhs(const RnnOdeSpec& spec, const ReadoutInverse& inverse,
                                  const AugmentedState& state) {
  const Vector a = inverse.reconstruct_hidden(state.y, state.log_partition);
  const Vector payoff = spec.readout.weights * xi_tilde(spec, a);
  return AugmentedDerivative{replicator_rhs(state.y, payoff), state.y.dot(payoff)};
}

AugmentedDerivative augmented_rhs(const RnnOdeSpec& spec, const AugmentedState& state) {
  return augmented_rhs(spec, ReadoutInverse(spec.readout), state);
}

AugmentedRun integrate_augmented(const RnnOdeSpec& spec, const Vector& x, const TimeGrid& grid,
                                 Method method) {
  if (static_cast<std::size_t>(x.size()) != spec.input_dim()) {
    throw DimensionError("input has length " + std::to_string(x.size()) + ", spec expects " +
                         std::to_string(spec.input_dim()));
  }
  const ReadoutInverse inverse(spec.readout);
  const Eigen::Index n = static_cast<Eigen::Index>(spec.num_labels());
  const AugmentedState init = augmented_initial_state(spec, x);
  Vector s0(n + 1);
  s0 << init.y, init.log_partition;

  const VectorField field = [&spec, &inverse, n](double, const Vector& s) {
    const AugmentedDerivative der = augmented_rhs(spec, inverse, AugmentedState{s.head(n), s(n)});
    Vector out(n + 1);
    out << der.dy, der.dlog_partition;
    return out;
  };

  AugmentedRun run{Trajectory{grid, {}}, {}, {}};
  const auto states = integrate_on_simplex(field, std::move(s0), 0, n, grid, method, run.drift);
  run.output.states.reserve(states.size());
  run.log_partition.reserve(states.size());
  for (const auto& s : states) {
    run.output.states.push_back(s.head(n));
    run.log_partition.push_back(s(n));
  }
  return run;
}

GameRun integrate_constant_game(const Matrix& payoff_matrix, const SimplexPoint& p0, const TimeGrid& grid,
                                Method method) {
  const Eigen::Index n = static_cast<Eigen::Index>(p0.size());
  if (payoff_matrix.rows() != n || payoff_matrix.cols() != n) {
    throw DimensionError("payoff matrix must be " + std::to_string(n) + "x" + std::to_string(n));
  }
  if (!payoff_matrix.allFinite()) throw DomainError("payoff matrix is not finite");
  const VectorField field = [&payoff_matrix](double, const Vector& p) {
    return replicator_rhs(p, payoff_matrix * p);
  };
  GameRun run{Trajectory{grid, {}}, {}};
  run.trajectory.states = integrate_on_simplex(field, p0.probs(), 0, n, grid, method, run.drift);
  return run;
}

}  // namespace rnnode
