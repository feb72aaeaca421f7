#include <gtest/gtest.h>

#include <rnnode/errors.hpp>
#include <rnnode/odeflow.hpp>
#include <rnnode/replicator.hpp>
#include <rnnode/rng.hpp>

#include <cmath>

#include "test_specs.hpp"

using namespace rnnode;
using rnnode::testing::mat;
using rnnode::testing::vec;

namespace {

Vector random_simplex(Rng& rng, Eigen::Index n) {
  Vector p(n);
  for (Eigen::Index i = 0; i < n; ++i) p(i) = rng.uniform(0.01, 1.0);
  return p / p.sum();
}

double sup_deviation(const Trajectory& a, const Trajectory& b) {
  double worst = 0.0;
  for (std::size_t k = 0; k < a.states.size(); ++k)
    worst = std::max(worst, (a.states[k] - b.states[k]).cwiseAbs().maxCoeff());
  return worst;
}

}  // namespace

TEST(ReplicatorRhs, VertexIsRestPoint) {
  EXPECT_EQ(replicator_rhs(SimplexPoint::vertex(0, 3), vec({5.0, -2.0, 11.0})), Vector::Zero(3));
}

TEST(ReplicatorRhs, HandEvaluation) {
  const Vector dp = replicator_rhs(vec({0.5, 0.5}), vec({1.0, 0.0}));
  EXPECT_DOUBLE_EQ(dp(0), 0.25);
  EXPECT_DOUBLE_EQ(dp(1), -0.25);
}

TEST(ReplicatorRhs, UniformPayoffIsStationary) {
  Rng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const Vector p = random_simplex(rng, 4);
    const double c = rng.uniform(-10, 10);
    EXPECT_LE(replicator_rhs(p, Vector::Constant(4, c)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(ReplicatorRhs, DimensionMismatch) {
  EXPECT_THROW(replicator_rhs(vec({0.5, 0.5}), vec({1, 2, 3})), DimensionError);
}

TEST(ReplicatorRhs, EveryVertexExactlyStationaryForRandomPayoffs) {
  Rng rng(2);
  for (Eigen::Index n = 1; n <= 6; ++n) {
    for (Eigen::Index i = 0; i < n; ++i) {
      for (int trial = 0; trial < 20; ++trial) {
        Vector f(n);
        for (Eigen::Index j = 0; j < n; ++j) f(j) = rng.uniform(-1e3, 1e3);
        const Vector dp = replicator_rhs(SimplexPoint::vertex(static_cast<std::size_t>(i), static_cast<std::size_t>(n)), f);
        for (Eigen::Index j = 0; j < n; ++j) ASSERT_EQ(dp(j), 0.0);
      }
    }
  }
}

TEST(ReplicatorRhs, PayoffShiftInvariance) {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const Vector p = random_simplex(rng, 5);
    Vector f(5);
    for (Eigen::Index j = 0; j < 5; ++j) f(j) = rng.uniform(-5, 5);
    const double c = rng.uniform(-50, 50);
    const Vector a = replicator_rhs(p, f);
    const Vector b = replicator_rhs(p, (f.array() + c).matrix());
    EXPECT_LE((a - b).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(ReplicatorRhs, TangentToSimplex) {
  Rng rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    const Vector p = random_simplex(rng, 6);
    Vector f(6);
    for (Eigen::Index j = 0; j < 6; ++j) f(j) = rng.uniform(-5, 5);
    EXPECT_LE(std::abs(replicator_rhs(p, f).sum()), 1e-12);
  }
}

TEST(SimplexPointTest, Validation) {
  EXPECT_NO_THROW(SimplexPoint(vec({0.2, 0.8})));
  EXPECT_THROW(SimplexPoint(vec({0.2, 0.7})), DomainError);
  EXPECT_THROW(SimplexPoint(vec({-0.1, 1.1})), DomainError);
  EXPECT_TRUE(SimplexPoint::uniform(4).interior());
  EXPECT_FALSE(SimplexPoint::vertex(2, 3).interior());
  EXPECT_EQ(SimplexPoint::vertex(2, 3)[2], 1.0);
}

TEST(Classify, ArgmaxOneBased) {
  EXPECT_EQ(classify(vec({0.1, 0.2, 0.7})), 3u);
  EXPECT_EQ(classify(vec({0.5, 0.5})), 1u);
  EXPECT_EQ(classify(SimplexPoint::uniform(7)), 1u);
}

TEST(LogSumExp, StableAtLargeMagnitude) {
  EXPECT_NEAR(log_sum_exp(vec({1000.0, 1000.0})), 1000.0 + std::log(2.0), 1e-12);
  EXPECT_NEAR(log_sum_exp(vec({0.0, std::log(3.0)})), std::log(4.0), 1e-15);
}

TEST(DynamicPayoff, IdentityHiddenIsZero) {
  const RnnOdeSpec spec = rnnode::testing::identity_hidden_spec(2, 3, 3, 1);
  EXPECT_EQ(dynamic_payoff(spec, vec({1, 2, 3})), Vector::Zero(3));
}

TEST(DynamicPayoff, ZeroReadoutIsZero) {
  RnnOdeSpec spec = rnnode::testing::random_spec(2, 3, 3, 1);
  spec.readout.weights.setZero();
  EXPECT_EQ(dynamic_payoff(spec, vec({1, 2, 3})), Vector::Zero(3));
}

TEST(DynamicPayoff, ScalarChain) {
  const RnnOdeSpec spec = rnnode::testing::scalar_chain(2.0, 1.0, mat({{3}}), 5);
  EXPECT_DOUBLE_EQ(dynamic_payoff(spec, vec({1}))(0), 3.0);
}

TEST(CascadeRhs, IdentityHiddenIsFrozen) {
  const RnnOdeSpec spec = rnnode::testing::identity_hidden_spec(2, 3, 3, 1);
  const CascadeDerivative d = cascade_rhs(spec, CascadeState{vec({1, 2, 3}), vec({0.2, 0.3, 0.5})});
  EXPECT_EQ(d.da, Vector::Zero(3));
  EXPECT_EQ(d.dy, Vector::Zero(3));
}

TEST(CascadeRhs, VertexOutputStationary) {
  const RnnOdeSpec spec = rnnode::testing::random_spec(2, 3, 3, 8);
  const CascadeDerivative d = cascade_rhs(spec, CascadeState{vec({0.3, -1.0, 2.0}), vec({0, 1, 0})});
  EXPECT_EQ(d.dy, Vector::Zero(3));
}

TEST(CascadeRhs, ScalarChainHandReplicator) {
  const RnnOdeSpec spec = rnnode::testing::scalar_chain(2.0, 1.0, mat({{3}, {0}}), 5);
  const CascadeDerivative d = cascade_rhs(spec, CascadeState{vec({1}), vec({0.5, 0.5})});
  EXPECT_DOUBLE_EQ(d.da(0), 1.0);
  EXPECT_DOUBLE_EQ(d.dy(0), 0.75);
  EXPECT_DOUBLE_EQ(d.dy(1), -0.75);
}

TEST(Cascade, IdentityHiddenConstant) {
  const RnnOdeSpec spec = rnnode::testing::identity_hidden_spec(2, 3, 3, 1);
  const CascadeRun run = integrate_cascade(spec, vec({0.5, 0.1}), TimeGrid(1.0, 0.01), Method::rk4);
  for (std::size_t k = 0; k < run.output.states.size(); ++k) {
    EXPECT_EQ(run.hidden.states[k], run.hidden.states[0]);
    EXPECT_LE((run.output.states[k] - run.output.states[0]).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(Cascade, SharedInitialization) {
  const RnnOdeSpec spec = rnnode::testing::random_spec(3, 4, 3, 17, {6}, 2.0);
  const Vector x = vec({0.1, 0.9, -0.4});
  const TimeGrid grid(1.0, 0.01);
  const CascadeRun run = integrate_cascade(spec, x, grid, Method::rk4);
  const Trajectory oracle = output_trace(spec, hidden_flow(spec, x, grid, Method::rk4));
  EXPECT_EQ(run.output.states[0], oracle.states[0]);
}

TEST(Cascade, MatchesSoftmaxOfHiddenFlow) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const RnnOdeSpec spec = rnnode::testing::random_spec(2, 3, 3, seed, {}, 2.0);
    const Vector x = vec({0.8, -0.3});
    const TimeGrid grid(5.0, 1e-3);
    const CascadeRun run = integrate_cascade(spec, x, grid, Method::rk4);
    const Trajectory oracle = output_trace(spec, hidden_flow(spec, x, grid, Method::rk4));
    EXPECT_LE(sup_deviation(run.output, oracle), 1e-6) << "seed " << seed;
  }
}

TEST(Cascade, DriftStaysWithinInvarianceBounds) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const RnnOdeSpec spec = rnnode::testing::random_spec(2, 3, 4, seed, {5}, 3.0);
    const CascadeRun run = integrate_cascade(spec, vec({1.0, -1.0}), TimeGrid(5.0, 1e-2), Method::rk4);
    EXPECT_LE(run.drift.max_sum_error, 1e-9);
    EXPECT_GE(run.drift.min_component, -1e-12);
  }
}

TEST(Augmented, IdentityHiddenFrozen) {
  const RnnOdeSpec spec = rnnode::testing::identity_hidden_spec(2, 3, 3, 4);
  const AugmentedState s0 = augmented_initial_state(spec, vec({0.2, 0.4}));
  const AugmentedDerivative d = augmented_rhs(spec, s0);
  EXPECT_LE(d.dy.cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE(std::abs(d.dlog_partition), 1e-12);
}

TEST(Augmented, ReconstructionInvertsReadout) {
  Rng rng(5);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const RnnOdeSpec spec = rnnode::testing::random_spec(2, 3, 3, seed, {}, 2.0);
    if (!readout_invertible(spec)) continue;
    const ReadoutInverse inverse(spec.readout);
    Vector a(3);
    for (Eigen::Index i = 0; i < 3; ++i) a(i) = rng.uniform(-2, 2);
    const Vector z = spec.readout.weights * a + spec.readout.bias;
    const Vector y = activation_apply(Activation::softmax, z);
    EXPECT_LE((inverse.reconstruct_hidden(y, log_sum_exp(z)) - a).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Augmented, MatchesCascade) {
  const RnnOdeSpec spec = rnnode::testing::random_spec(2, 3, 3, 7, {}, 2.0);
  ASSERT_TRUE(readout_invertible(spec));
  const Vector x = vec({-0.6, 0.9});
  const TimeGrid grid(5.0, 1e-3);
  const AugmentedRun aug = integrate_augmented(spec, x, grid, Method::rk4);
  const CascadeRun cas = integrate_cascade(spec, x, grid, Method::rk4);
  EXPECT_LE(sup_deviation(aug.output, cas.output), 1e-5);
}

TEST(Augmented, SingularReadoutRefused) {
  RnnOdeSpec spec = rnnode::testing::random_spec(2, 3, 3, 7);
  spec.readout.weights.row(2) = spec.readout.weights.row(0);
  EXPECT_FALSE(readout_invertible(spec));
  EXPECT_THROW(ReadoutInverse{spec.readout}, InvertibilityError);
  const RnnOdeSpec rect = rnnode::testing::random_spec(2, 4, 3, 7);
  EXPECT_THROW(ReadoutInverse{rect.readout}, InvertibilityError);
}

TEST(Augmented, BoundaryStateRejected) {
  const RnnOdeSpec spec = rnnode::testing::random_spec(2, 3, 3, 7, {}, 2.0);
  ASSERT_TRUE(readout_invertible(spec));
  EXPECT_THROW(augmented_rhs(spec, AugmentedState{vec({1.0, 0.0, 0.0}), 0.0}), InteriorViolationError);
}

TEST(ConstantGame, ZeroPayoffConstant) {
  const GameRun run =
      integrate_constant_game(Matrix::Zero(3, 3), SimplexPoint(vec({0.2, 0.3, 0.5})), TimeGrid(5.0, 0.01), Method::rk4);
  for (const Vector& p : run.trajectory.states) EXPECT_LE((p - vec({0.2, 0.3, 0.5})).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(ConstantGame, DominantStrategyWins) {
  Matrix a = Matrix::Zero(3, 3);
  a(0, 0) = 1.0;
  const GameRun run =
      integrate_constant_game(a, SimplexPoint(vec({0.2, 0.3, 0.5})), TimeGrid(50.0, 1e-3), Method::rk4);
  EXPECT_GT(run.trajectory.final_state()(0), 0.99);
}

TEST(ConstantGame, RockPaperScissorsConservesProduct) {
  const Matrix rps = mat({{0, -1, 1}, {1, 0, -1}, {-1, 1, 0}});
  const GameRun run =
      integrate_constant_game(rps, SimplexPoint(vec({0.5, 0.25, 0.25})), TimeGrid(50.0, 1e-3), Method::rk4);
  const double h0 = 0.5 * 0.25 * 0.25;
  double worst = 0.0;
  for (const Vector& p : run.trajectory.states) worst = std::max(worst, std::abs(p.prod() - h0));
  EXPECT_LE(worst, 1e-6);
  // orbit is not stationary
  double spread = 0.0;
  for (const Vector& p : run.trajectory.states) spread = std::max(spread, std::abs(p(0) - 0.5));
  EXPECT_GT(spread, 0.05);
}

TEST(ConstantGame, BadPayoffShape) {
  EXPECT_THROW(integrate_constant_game(Matrix::Zero(2, 2), SimplexPoint::uniform(3), TimeGrid(1.0, 0.1), Method::rk4),
               DimensionError);
}
