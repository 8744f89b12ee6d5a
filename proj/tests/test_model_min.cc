#include <gtest/gtest.h>

#include "idone/fitting.hpp"
#include "idone/model_min.hpp"
#include "idone/problems.hpp"
#include "idone/solver.hpp"
#include "oracles.hpp"

namespace idone {
namespace {

using testing::ForEachLatticePoint;
using testing::RandomBox;
using testing::RandomModel;
using testing::RandomPointIn;
using testing::ToVector;

Eigen::VectorXd At(std::initializer_list<double> v) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double e : v) x[i++] = e;
  return x;
}

// Random model after one RLS update at a random lattice point; the shape the
// optimizer sees in its first iterations.
SurrogateModel FittedRandomModel(ModelVariant variant, const Box& box, Rng& rng) {
  SurrogateModel m = RandomModel(variant, box, rng);
  RlsState rls(m.weights(), kDefaultLambda);
  const Eigen::VectorXd x = ToVector(RandomLatticePoint(box, rng));
  rls.Update(m.Activations(x), rng.Uniform(-5, 5));
  m.set_weights(rls.weights());
  return m;
}

TEST(RoundFeasible, Examples) {
  const Box box({0, 0}, {5, 3});
  EXPECT_EQ(RoundFeasible(At({1.4, 2.5}), box), (std::vector<int>{1, 3}));
  EXPECT_EQ(RoundFeasible(At({-0.2, 3.7}), box), (std::vector<int>{0, 3}));
  EXPECT_EQ(RoundFeasible(At({4, 2}), box), (std::vector<int>{4, 2}));
  EXPECT_EQ(RoundFeasible(At({-7.5, 10}), box), (std::vector<int>{0, 3}));
}

TEST(MinimizeModel, ConvexStartOneDimension) {
  const SurrogateModel m(ModelVariant::kBasic, Box({0}, {2}));
  const MinimizeResult r = MinimizeModel(m, At({0.3}));
  EXPECT_EQ(r.x_star, std::vector<int>{1});
  EXPECT_DOUBLE_EQ(r.g_rounded, 2.0);
  EXPECT_TRUE(r.converged);
}

TEST(MinimizeModel, FlatModelStaysAtStart) {
  SurrogateModel m(ModelVariant::kAdvanced, Box({0, 0}, {4, 4}));
  m.set_weights(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m.num_basis())));
  const MinimizeResult r = MinimizeModel(m, At({1.3, 2.6}));
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.x_relaxed, At({1.3, 2.6}));
  EXPECT_EQ(r.x_star, (std::vector<int>{1, 3}));
}

TEST(MinimizeModel, RejectsBadStart) {
  const SurrogateModel m(ModelVariant::kBasic, Box({0}, {2}));
  EXPECT_THROW(MinimizeModel(m, At({2.5})), std::invalid_argument);
  EXPECT_THROW(MinimizeModel(m, At({1, 1})), std::invalid_argument);
}

TEST(MinimizeModel, FourCityFitFindsAnOptimalRoute) {
  const TspProblem tsp("tsp4", FourCityExample(), TspNoise{1, 0.0});
  SurrogateModel m(ModelVariant::kAdvanced, tsp.box());
  RlsState rls(m.weights(), kDefaultLambda);
  Rng noise(0);
  ForEachLatticePoint(tsp.box(), [&](const std::vector<int>& x) {
    rls.Update(m.Activations(ToVector(x)), tsp.Evaluate(x, noise));
  });
  m.set_weights(rls.weights());
  ForEachLatticePoint(tsp.box(), [&](const std::vector<int>& x) {
    const MinimizeResult r = MinimizeModel(m, ToVector(x));
    EXPECT_TRUE(r.x_star == (std::vector<int>{1, 2}) || r.x_star == (std::vector<int>{2, 2}))
        << "start " << x[0] << "," << x[1];
    EXPECT_NEAR(r.g_rounded, 80.0, 0.5);
  });
}

TEST(MinimizeProperty, RoundedPointInsideBox) {
  Rng rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const auto variant = trial % 2 ? ModelVariant::kAdvanced : ModelVariant::kBasic;
    const SurrogateModel m = FittedRandomModel(variant, RandomBox(rng, 5, 4), rng);
    const MinimizeResult r = MinimizeModel(m, RandomPointIn(m.box(), rng));
    ASSERT_TRUE(m.box().Contains(r.x_star));
    ASSERT_TRUE(m.box().Contains(std::span<const double>(r.x_relaxed.data(), r.x_relaxed.size())));
    EXPECT_DOUBLE_EQ(r.g_rounded, m.Evaluate(ToVector(r.x_star)));
  }
}

TEST(MinimizeProperty, NeverAscends) {
  Rng rng(32);
  for (int trial = 0; trial < 100; ++trial) {
    const auto variant = trial % 2 ? ModelVariant::kAdvanced : ModelVariant::kBasic;
    const SurrogateModel m = FittedRandomModel(variant, RandomBox(rng, 5, 4), rng);
    const Eigen::VectorXd start = RandomPointIn(m.box(), rng);
    EXPECT_LE(MinimizeModel(m, start).g_relaxed, m.Evaluate(start) + 1e-12);
  }
}

TEST(MinimizeProperty, RoundingDoesNotIncreaseConvergedValue) {
  Rng rng(33);
  int converged = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto variant = trial % 2 ? ModelVariant::kAdvanced : ModelVariant::kBasic;
    const SurrogateModel m = FittedRandomModel(variant, RandomBox(rng, 5, 4), rng);
    const MinimizeResult r = MinimizeModel(m, RandomPointIn(m.box(), rng));
    if (!r.converged) continue;
    ++converged;
    EXPECT_LE(r.g_rounded, r.g_relaxed + 1e-6);
  }
  EXPECT_GE(converged, 90);
}

TEST(MinimizeProperty, ConvexStartReachesLatticeMinimum) {
  // With c0 the model is convex, so any start must reach the enumerated
  // lattice minimum.
  Rng rng(34);
  for (int trial = 0; trial < 40; ++trial) {
    const auto variant = trial % 2 ? ModelVariant::kAdvanced : ModelVariant::kBasic;
    const SurrogateModel m(variant, RandomBox(rng, 3, 4));
    double best = std::numeric_limits<double>::infinity();
    ForEachLatticePoint(m.box(), [&](const std::vector<int>& x) { best = std::min(best, m.Evaluate(ToVector(x))); });
    const MinimizeResult r = MinimizeModel(m, RandomPointIn(m.box(), rng));
    EXPECT_NEAR(r.g_rounded, best, 1e-9);
  }
}

TEST(MinimizeModel, Deterministic) {
  Rng rng(35);
  const SurrogateModel m = FittedRandomModel(ModelVariant::kAdvanced, Box({0, 0, 0}, {4, 3, 4}), rng);
  const Eigen::VectorXd start = RandomPointIn(m.box(), rng);
  const MinimizeResult a = MinimizeModel(m, start);
  const MinimizeResult b = MinimizeModel(m, start);
  EXPECT_EQ(a.x_relaxed, b.x_relaxed);
  EXPECT_EQ(a.x_star, b.x_star);
  EXPECT_EQ(a.iterations, b.iterations);
}

TEST(DirectionalDerivative, OneSidedAtKink) {
  // Basis order for [0, 2]: bias, x, x - 1, 1 - x, 2 - x. Keep only x - 1.
  SurrogateModel m(ModelVariant::kBasic, Box({0}, {2}));
  m.set_weights(At({0, 0, 1, 0, 0}));
  EXPECT_DOUBLE_EQ(DirectionalDerivative(m, At({1}), At({1}), 1e-9), 1.0);
  EXPECT_DOUBLE_EQ(DirectionalDerivative(m, At({1}), At({-1}), 1e-9), 0.0);
}

}  // namespace
}  // namespace idone
