#pragma once

#include <cstddef>
#include <vector>

#include "rnnode/linalg.hpp"
#include "rnnode/network.hpp"
#include "rnnode/odeflow.hpp"
#include "rnnode/time_grid.hpp"

namespace rnnode {

// A probability vector: nonnegative, finite, summing to one within 1e-9.
class SimplexPoint {
 public:
  static constexpr double kSumTolerance = 1e-9;

  // Throws DomainError if `probs` is not on the simplex.
  explicit SimplexPoint(Vector probs);

  static SimplexPoint vertex(std::size_t index, std::size_t n);  // 0-based index
  static SimplexPoint uniform(std::size_t n);

  const Vector& probs() const noexcept { return probs_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(probs_.size()); }
  double operator[](std::size_t i) const { return probs_(static_cast<Eigen::Index>(i)); }
  bool interior() const { return probs_.minCoeff() > 0.0; }

 private:
  Vector probs_;
};

// diag(p) (f - 1 f^T p). Accepts raw vectors so that intermediate
// integrator stages, which sit slightly off the simplex, can be evaluated.
Vector replicator_rhs(const Vector& p, const Vector& payoff);
inline Vector replicator_rhs(const SimplexPoint& p, const Vector& payoff) {
  return replicator_rhs(p.probs(), payoff);
}

// 1-based index of the largest component; ties go to the lowest index.
std::size_t classify(const Vector& y);
inline std::size_t classify(const SimplexPoint& y) { return classify(y.probs()); }

// ln sum_k exp(z_k), max-shifted.
double log_sum_exp(const Vector& z);

// Worst-case departure from the simplex observed before the per-step
// clamp-and-renormalize projection.
struct SimplexDrift {
  double max_sum_error = 0.0;  // max |sum y - 1|
  double min_component = 1.0;  // min y_i
  std::size_t clamp_events = 0;

  void observe(const Vector& y);
};

// Clamps at zero and rescales to unit sum. Throws DomainError if all mass vanished.
Vector project_to_simplex(const Vector& y);

// ---- dynamic-payoff cascade ------------------------------------------------

// W_y (hidden(a) - a) / tau.
Vector dynamic_payoff(const RnnOdeSpec& spec, const Vector& a);

struct CascadeState {
  Vector a;
  Vector y;
};

struct CascadeDerivative {
  Vector da;
  Vector dy;
};

CascadeDerivative cascade_rhs(const RnnOdeSpec& spec, const CascadeState& state);

struct CascadeRun {
  Trajectory hidden;
  Trajectory output;
  SimplexDrift drift;
};

// Integrates (a, y) jointly from a(0) = embed(x), y(0) = readout(a(0)).
CascadeRun integrate_cascade(const RnnOdeSpec& spec, const Vector& x, const TimeGrid& grid, Method method);

// ---- invertible readout: time-varying payoffs -----------------------------

struct AugmentedState {
  Vector y;
  double log_partition = 0.0;  // C = ln sum_k exp(z_k)
};

struct AugmentedDerivative {
  Vector dy;
  double dlog_partition = 0.0;
};

// LU factorization of a square readout matrix W_y, used to recover the
// hidden state a = W_y^{-1} (ln y + C 1 - b_y).
class ReadoutInverse {
 public:
  static constexpr double kMinReciprocalCondition = 1e-10;
  // Components below this are treated as having left the interior.
  static constexpr double kInteriorFloor = 1e-300;

  // Throws InvertibilityError if W_y is not square or is ill-conditioned.
  explicit ReadoutInverse(const LayerParams& readout);

  double reciprocal_condition() const noexcept { return rcond_; }
  Vector reconstruct_hidden(const Vector& y, double log_partition) const;

 private:
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
  Vector bias_;
  double rcond_ = 0.0;
};

// True when W_y passes the invertibility test.
bool readout_invertible(const RnnOdeSpec& spec);

AugmentedState augmented_initial_state(const RnnOdeSpec& spec, const Vector& x);

AugmentedDerivative augmented_rhs(const RnnOdeSpec& spec, const ReadoutInverse& inverse,
                                  const AugmentedState& state);
AugmentedDerivative augmented_rhs(const RnnOdeSpec& spec, const AugmentedState& state);

struct AugmentedRun {
  Trajectory output;
  std::vector<double> log_partition;
  SimplexDrift drift;
};

AugmentedRun integrate_augmented(const RnnOdeSpec& spec, const Vector& x, const TimeGrid& grid,
                                 Method method);

// ---- constant / state-dependent payoff games -------------------------------

struct GameRun {
  Trajectory trajectory;
  SimplexDrift drift;
};

// Replicator dynamics with linear payoff f(p) = A p.
GameRun integrate_constant_game(const Matrix& payoff_matrix, const SimplexPoint& p0, const TimeGrid& grid,
                                Method method);

}  // namespace rnnode
