#include <map>
#include <sstream>

#include <gtest/gtest.h>

#include "idone/solver.hpp"
#include "oracles.hpp"

namespace idone {
namespace {

void ExpectSameTrace(const RunTrace& a, const RunTrace& b) {
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t n = 0; n < a.records.size(); ++n) {
    EXPECT_EQ(a.records[n].x, b.records[n].x);
    EXPECT_EQ(a.records[n].y, b.records[n].y);
  }
}

void ExpectWellFormed(const RunTrace& trace, const Problem& problem, int budget) {
  ASSERT_EQ(static_cast<int>(trace.records.size()), budget);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < trace.records.size(); ++n) {
    const TraceRecord& r = trace.records[n];
    EXPECT_EQ(r.iter, static_cast<int>(n) + 1);
    EXPECT_TRUE(problem.box().Contains(r.x));
    best = std::min(best, r.y);
    EXPECT_EQ(r.best_y, best);
  }
}

TEST(ExploreStep, ZeroProbabilityKeepsPoint) {
  Rng rng(1);
  const Box box({0, 0, 0}, {4, 4, 4});
  const std::vector<int> x{0, 2, 4};
  for (int k = 0; k < 100; ++k) EXPECT_EQ(ExploreStep(x, box, 0.0, rng), x);
}

TEST(ExploreStep, FullProbabilityAtLowerBoundStepsUp) {
  Rng rng(2);
  const Box box({0, -3, 5}, {4, 4, 6});
  for (int k = 0; k < 100; ++k) EXPECT_EQ(ExploreStep(box.lower(), box, 1.0, rng), (std::vector<int>{1, -2, 6}));
  for (int k = 0; k < 100; ++k) EXPECT_EQ(ExploreStep(box.upper(), box, 1.0, rng), (std::vector<int>{3, 3, 5}));
}

TEST(ExploreStep, InteriorFrequencies) {
  Rng rng(3);
  const Box box({0}, {4});
  const std::vector<int> x{2};
  std::map<int, int> counts;
  const int draws = 100000;
  for (int k = 0; k < draws; ++k) ++counts[ExploreStep(x, box, 0.5, rng)[0] - 2];
  EXPECT_NEAR(counts[0] / double(draws), 0.5, 0.01);
  EXPECT_NEAR(counts[1] / double(draws), 0.25, 0.01);
  EXPECT_NEAR(counts[-1] / double(draws), 0.25, 0.01);
}

TEST(ExploreStep, StaysInBoxAndMovesAtMostOne) {
  Rng rng(4);
  for (int trial = 0; trial < 500; ++trial) {
    const Box box = testing::RandomBox(rng, 6, 3);
    const std::vector<int> x = RandomLatticePoint(box, rng);
    const std::vector<int> y = ExploreStep(x, box, rng.Uniform01(), rng);
    ASSERT_TRUE(box.Contains(y));
    for (std::size_t i = 0; i < x.size(); ++i) ASSERT_LE(std::abs(y[i] - x[i]), 1);
  }
  EXPECT_THROW(ExploreStep(std::vector<int>{0}, Box({0}, {1}), 1.5, rng), std::invalid_argument);
}

TEST(Annealing, AcceptanceProbability) {
  EXPECT_NEAR(SaAcceptanceProbability(10, 12, 2), std::exp(-1.0), 1e-15);
  EXPECT_NEAR(SaAcceptanceProbability(10, 12, 2), 0.3679, 1e-4);
  EXPECT_EQ(SaAcceptanceProbability(10, 9, 2), 1.0);
}

TEST(Annealing, RejectsBadSchedule) {
  const TspProblem tsp("tsp4", FourCityExample(), TspNoise{1, 0});
  EXPECT_THROW(RunSimulatedAnnealing(tsp, SaConfig{0.0, 0.9}, {}), std::invalid_argument);
  EXPECT_THROW(RunSimulatedAnnealing(tsp, SaConfig{1.0, 1.0}, {}), std::invalid_argument);
}

TEST(Solvers, BudgetOneIsTheInitialPoint) {
  const TspProblem tsp("tsp4", FourCityExample(), TspNoise{1, 0});
  RunOptions opts;
  opts.budget = 1;
  opts.seed = 9;
  const RunTrace a = RunIdone(tsp, {}, opts);
  const RunTrace b = RunRandomSearch(tsp, opts);
  const RunTrace c = RunSimulatedAnnealing(tsp, kTspAnnealing, opts);
  for (const RunTrace* t : {&a, &b, &c}) {
    ASSERT_EQ(t->records.size(), 1u);
    EXPECT_EQ(t->final_best(), t->records[0].y);
    EXPECT_EQ(t->records[0].x, a.records[0].x);
  }
  opts.budget = 0;
  EXPECT_THROW(RunRandomSearch(tsp, opts), std::invalid_argument);
}

TEST(Solvers, TracesHaveExactBudgetAndMonotoneBest) {
  const auto br17 = MakeBr17Problem(LoadTsplibAtsp(std::string(IDONE_DATA_DIR) + "/br17.atsp"));
  RunOptions opts;
  opts.budget = 60;
  opts.seed = 5;
  ExpectWellFormed(RunIdone(*br17, {ModelVariant::kBasic}, opts), *br17, 60);
  ExpectWellFormed(RunIdone(*br17, {ModelVariant::kAdvanced}, opts), *br17, 60);
  ExpectWellFormed(RunRandomSearch(*br17, opts), *br17, 60);
  ExpectWellFormed(RunSimulatedAnnealing(*br17, kTspAnnealing, opts), *br17, 60);
}

TEST(Solvers, SeedDeterminism) {
  const ConvexBinaryProblem p(GenerateConvexBinary(12, 77));
  RunOptions opts;
  opts.budget = 80;
  opts.seed = 123;
  ExpectSameTrace(RunIdone(p, {}, opts), RunIdone(p, {}, opts));
  ExpectSameTrace(RunRandomSearch(p, opts), RunRandomSearch(p, opts));
  ExpectSameTrace(RunSimulatedAnnealing(p, kBinaryAnnealing, opts), RunSimulatedAnnealing(p, kBinaryAnnealing, opts));
  RunOptions other = opts;
  other.seed = 124;
  EXPECT_NE(RunRandomSearch(p, opts).records[1].x, RunRandomSearch(p, other).records[1].x);
}

TEST(Idone, FourCityFindsOptimalRoute) {
  const TspProblem tsp("tsp4", FourCityExample(), TspNoise{1, 0});
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    RunOptions opts;
    opts.budget = 50;
    opts.seed = seed;
    hits += RunIdone(tsp, {ModelVariant::kAdvanced}, opts).final_best() == 80.0;
  }
  EXPECT_EQ(hits, 20);
}

TEST(Idone, NoiselessConvexBinaryReachesOptimum) {
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const ConvexBinaryProblem p(GenerateConvexBinary(10, 1000 + seed), false);
    RunOptions opts;
    opts.budget = 200;
    opts.seed = seed;
    hits += RunIdone(p, {ModelVariant::kAdvanced}, opts).final_best() == 0.0;
  }
  EXPECT_GE(hits, 19);
}

TEST(RandomSearch, CoversSmallBinaryLattice) {
  const ConvexBinaryProblem p(GenerateConvexBinary(5, 8), false);
  RunOptions opts;
  opts.budget = 1000;
  opts.seed = 8;
  EXPECT_EQ(RunRandomSearch(p, opts).final_best(), 0.0);
}

TEST(Solvers, InitialPointOverride) {
  const TspProblem tsp("tsp4", FourCityExample(), TspNoise{1, 0});
  RunOptions opts;
  opts.budget = 3;
  opts.initial_point = std::vector<int>{3, 2};
  EXPECT_EQ(RunIdone(tsp, {}, opts).records[0].x, (std::vector<int>{3, 2}));
  opts.initial_point = std::vector<int>{4, 2};
  EXPECT_THROW(RunIdone(tsp, {}, opts), std::invalid_argument);
}

TEST(TraceCsv, HeaderAndRows) {
  const TspProblem tsp("tsp4", FourCityExample(), TspNoise{1, 0});
  RunOptions opts;
  opts.budget = 2;
  opts.record_timing = false;
  const RunTrace t = RunRandomSearch(tsp, opts);
  std::ostringstream os;
  WriteTraceCsv(os, t);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "iter,y,best_y,surrogate_min,time_ms,x0,x1");
  std::getline(in, line);
  EXPECT_EQ(line.substr(0, 2), "1,");
  EXPECT_NE(line.find(",nan,0,"), std::string::npos);
  EXPECT_EQ(TraceFileName(t), "tsp4_rs_0.csv");
}

}  // namespace
}  // namespace idone
