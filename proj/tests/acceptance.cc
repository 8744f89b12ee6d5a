// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "idone/experiment.hpp"
#include "idone/fitting.hpp"
#include "idone/model_min.hpp"
#include "idone/solver.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace idone;
using idone::testing::CentralDifference;
using idone::testing::RandomBox;
using idone::testing::RandomModel;
using idone::testing::RandomPointIn;
using idone::testing::ToVector;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

double Median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double Mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

fs::path ScratchDir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / fmt::format("idone_acceptance_{}", name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome RoundingKeepsValue() {
  Rng rng(20190101);
  int converged = 0, violations = 0, out_of_box = 0;
  double worst = -std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < 100; ++trial) {
    for (ModelVariant variant : {ModelVariant::kBasic, ModelVariant::kAdvanced}) {
      const Box box = RandomBox(rng, 5, 4);
      SurrogateModel m = RandomModel(variant, box, rng);
      RlsState rls(m.weights(), kDefaultLambda);
      const int n = static_cast<int>(rng.UniformInt(1, 10));
      for (int k = 0; k < n; ++k) {
        rls.Update(m.Activations(ToVector(RandomLatticePoint(box, rng))), rng.Uniform(-10, 10));
      }
      m.set_weights(rls.weights());
      const MinimizeResult r = MinimizeModel(m, RandomPointIn(box, rng));
      if (variant == ModelVariant::kBasic && !box.Contains(r.x_star)) ++out_of_box;
      if (!r.converged) continue;
      ++converged;
      worst = std::max(worst, r.g_rounded - r.g_relaxed);
      if (r.g_rounded > r.g_relaxed + 1e-6) ++violations;
    }
  }
  return {violations == 0 && out_of_box == 0 && converged > 0,
          fmt::format("{}/200 converged, {} rounding violations (worst g(round)-g(x) = {:.3g}), {} basic points "
                      "out of bounds",
                      converged, violations, worst, out_of_box)};
}

Outcome RlsMatchesBatch() {
  Rng rng(7);
  double worst = 0.0;
  for (int scenario = 0; scenario < 20; ++scenario) {
    const int dim = static_cast<int>(rng.UniformInt(1, 40));
    const int count = static_cast<int>(rng.UniformInt(1, 200));
    const Eigen::VectorXd c0 = DefaultInitialWeights(static_cast<std::size_t>(dim));
    RlsState rls(c0, kDefaultLambda);
    std::vector<Measurement> pairs;
    for (int n = 0; n < count; ++n) {
      Measurement m{Eigen::VectorXd(dim), rng.Uniform(-20, 20)};
      for (int k = 0; k < dim; ++k) m.activations[k] = rng.Bernoulli(0.5) ? rng.Uniform(0, 5) : 0.0;
      m.activations[0] = 1.0;
      rls.Update(m.activations, m.y);
      pairs.push_back(std::move(m));
    }
    const Eigen::VectorXd batch = BatchSolve(pairs, c0, kDefaultLambda);
    worst = std::max(worst, (rls.weights() - batch).norm() / std::max(1.0, batch.norm()));
  }
  return {worst <= 1e-6, fmt::format("20 scenarios, worst relative error {:.3g}", worst)};
}

Outcome BasisCounts() {
  Rng rng(3);
  int mismatches = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const Box box = RandomBox(rng, 10, 8);
    long basic = 1, extra = 0;
    for (int i = 0; i < box.dimension(); ++i) {
      basic += 2 * (box.upper(i) - box.lower(i));
      if (i > 0) extra += 2 * (box.upper(i) - box.lower(i) + box.upper(i - 1) - box.lower(i - 1));
    }
    mismatches += BuildBasicBasis(box).size() != static_cast<std::size_t>(basic);
    mismatches += BuildAdvancedBasis(box).size() != static_cast<std::size_t>(basic + extra);
  }
  return {mismatches == 0, fmt::format("200 random boxes, {} mismatches", mismatches)};
}

Outcome FourCity() {
  const TspProblem tsp("tsp4", FourCityExample(), TspNoise{100, 0.0});
  Rng noise(0);
  std::vector<double> lengths;
  for (const auto& x : std::vector<std::vector<int>>{{1, 2}, {2, 2}, {1, 1}, {2, 1}, {3, 1}, {3, 2}}) {
    lengths.push_back(tsp.Evaluate(x, noise));
  }
  const bool lengths_ok = lengths == std::vector<double>{80, 80, 95, 95, 95, 95};
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    RunOptions opts;
    opts.budget = 50;
    opts.seed = seed;
    hits += RunIdone(tsp, {ModelVariant::kAdvanced}, opts).final_best() == 80.0;
  }
  return {lengths_ok && hits >= 18,
          fmt::format("lattice lengths {}, IDONE-advanced found 80 in {}/20 runs", fmt::join(lengths, "/"), hits)};
}

struct BinaryStudy {
  std::vector<double> basic, advanced, random;
  RunTrace timed_run;
};

BinaryStudy RunBinaryStudy() {
  BinaryStudy study;
  ProblemSpec spec;
  spec.kind = ProblemKind::kConvexBinary;
  spec.d = 100;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto problem = MakeProblem(spec, seed);
    RunOptions opts;
    opts.budget = 1000;
    opts.seed = seed;
    RunTrace adv = RunIdone(*problem, {ModelVariant::kAdvanced}, opts);
    study.advanced.push_back(adv.final_best());
    study.basic.push_back(RunIdone(*problem, {ModelVariant::kBasic}, opts).final_best());
    study.random.push_back(RunRandomSearch(*problem, opts).final_best());
    if (seed == 0) study.timed_run = std::move(adv);
  }
  return study;
}

Outcome ConvexBinary(const BinaryStudy& s) {
  const double adv = Median(s.advanced), basic = Median(s.basic), rs = Median(s.random);
  return {adv <= 2.0 && basic <= 2.0 && adv < rs && basic < rs,
          fmt::format("median best: idone-advanced {:.4f}, idone-basic {:.4f}, rs {:.4f}", adv, basic, rs)};
}

Outcome IterationCost(const RunTrace& run) {
  std::vector<double> early, late;
  for (const TraceRecord& r : run.records) {
    if (r.iter <= 100) early.push_back(r.time_ms);
    if (r.iter >= 900) late.push_back(r.time_ms);
  }
  const double e = Median(early), l = Median(late);
  return {l <= 2.0 * e, fmt::format("median ms/iter: iters 1-100 {:.3f}, iters 900-1000 {:.3f}, ratio {:.2f}", e, l,
                                    l / e)};
}

Outcome Br17() {
  const fs::path out = ScratchDir("br17");
  std::istringstream text(fmt::format(
      "problem = br17\ninstance = {}/br17.atsp\nbudget = 500\nreplications = 5\n"
      "solvers = idone-advanced, idone-basic, rs, sa\n",
      IDONE_DATA_DIR));
  ExperimentSpec spec = ParseExperimentSpec(text);
  spec.output_dir = out.string();
  const ExperimentResult result = RunExperiment(spec, static_cast<int>(std::max(1u, std::thread::hardware_concurrency())));
  std::map<std::string, double> mean;
  for (const SummaryRow& r : result.summary.FinalRows()) mean[r.solver] = r.best_mean;
  const bool complete = result.failures.empty() && result.summary.FinalRows().size() == 4 &&
                        std::all_of(result.summary.FinalRows().begin(), result.summary.FinalRows().end(),
                                    [](const SummaryRow& r) { return r.n_runs == 5 && r.checkpoint == 500; });
  fs::remove_all(out);
  return {complete && mean["idone-advanced"] <= mean["rs"],
          fmt::format("{} failures; mean final best: idone-advanced {:.2f}, idone-basic {:.2f}, rs {:.2f}, sa {:.2f}",
                      result.failures.size(), mean["idone-advanced"], mean["idone-basic"], mean["rs"], mean["sa"])};
}

Outcome GradientCheck() {
  Rng rng(8);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto variant = trial % 2 ? ModelVariant::kAdvanced : ModelVariant::kBasic;
    const SurrogateModel m = RandomModel(variant, RandomBox(rng, 6, 5), rng);
    const Eigen::VectorXd x = RandomPointIn(m.box(), rng);
    worst = std::max(worst, (m.Gradient(x) - CentralDifference(m, x)).cwiseAbs().maxCoeff());
  }
  return {worst <= 1e-4, fmt::format("100 random points, max abs error {:.3g}", worst)};
}

Outcome Determinism() {
  const fs::path root = ScratchDir("determinism");
  {
    std::ofstream spec(root / "run.spec");
    spec << "problem = convex_binary\nd = 12\nbudget = 150\nreplications = 3\nbase_seed = 42\n";
    spec << "solvers = idone-advanced, idone-basic, rs, sa\n";
  }
  auto run = [&](const std::string& name, const std::string& workers) {
    const std::string cmd = fmt::format("\"{}\" run --spec \"{}\" --out \"{}\" --workers {} --no-timing > /dev/null",
                                        IDONE_CLI, (root / "run.spec").string(), (root / name).string(), workers);
    return std::system(cmd.c_str()) == 0;
  };
  if (!run("a", "1") || !run("b", "4")) return {false, "idone run exited with an error"};
  int files = 0, differing = 0;
  for (const auto& e : fs::recursive_directory_iterator(root / "a")) {
    if (!e.is_regular_file()) continue;
    ++files;
    differing += Slurp(e.path()) != Slurp(root / "b" / fs::relative(e.path(), root / "a"));
  }
  fs::remove_all(root);
  return {files > 0 && differing == 0, fmt::format("{} files compared across two runs, {} differ", files, differing)};
}

}  // namespace

int main() {
  int failed = 0;
  auto report = [&](int id, const char* name, const std::function<Outcome()>& check) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, fmt::format("exception: {}", e.what())};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !o.pass;
    fmt::print("criterion {}: {} {} [{}] ({:.1f} s)\n", id, o.pass ? "PASS" : "FAIL", name, o.detail, secs);
    std::fflush(stdout);
  };

  report(1, "rounding keeps the converged model value", RoundingKeepsValue);
  report(2, "recursive fit matches batch solve", RlsMatchesBatch);
  report(3, "basis counts match closed form", BasisCounts);
  report(4, "4-city lengths and IDONE success rate", FourCity);

  BinaryStudy study;
  report(5, "convex binary d=100 medians", [&] {
    study = RunBinaryStudy();
    return ConvexBinary(study);
  });
  report(6, "per-iteration cost flat in history", [&] { return IterationCost(study.timed_run); });
  report(7, "BR17 5x500 experiment ordering", Br17);
  report(8, "gradient matches central differences", GradientCheck);
  report(9, "repeated runs are byte-identical", Determinism);

  fmt::print("{} of 9 criteria passed\n", 9 - failed);
  return failed == 0 ? 0 : 1;
}
