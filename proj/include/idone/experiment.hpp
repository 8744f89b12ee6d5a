#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "idone/problems.hpp"
#include "idone/solver.hpp"

namespace idone {

enum class ProblemKind { kConvexBinary, kBr17, kFourCity };

struct ProblemSpec {
  ProblemKind kind = ProblemKind::kConvexBinary;
  int d = 10;                    // convex binary only
  bool noisy = true;             // convex binary only
  std::string instance_path;     // br17 only
  TspNoise tsp_noise;            // tsp problems
};

struct SolverSpec {
  std::string id;  // idone-basic, idone-advanced, rs, sa
  IdoneConfig idone;
  SaConfig sa;
};

// A full experiment: one problem family, several solvers, seeded replications.
// Replication r uses seed base_seed + r for every solver, so all of them see
// the same instance, initial point and noise stream.
struct ExperimentSpec {
  ProblemSpec problem;
  std::vector<SolverSpec> solvers;
  int replications = 1;
  std::uint64_t base_seed = 0;
  int budget = 1000;
  bool record_timing = true;
  std::string output_dir;
};

// Flat `key = value` format, `#` starts a comment. Unknown keys are errors.
// Relative instance paths resolve against `base_dir`.
ExperimentSpec ParseExperimentSpec(std::istream& in, const std::filesystem::path& base_dir = {});
ExperimentSpec LoadExperimentSpec(const std::filesystem::path& path);

std::string ToString(ProblemKind kind);

// Builds the problem instance for one replication seed.
std::unique_ptr<Problem> MakeProblem(const ProblemSpec& spec, std::uint64_t replication_seed);

struct SummaryRow {
  std::string problem;
  std::string solver;
  int checkpoint = 0;
  int n_runs = 0;
  double best_min = 0.0;
  double best_median = 0.0;
  double best_mean = 0.0;
  double best_max = 0.0;
  double time_total_s_median = 0.0;

  friend bool operator==(const SummaryRow&, const SummaryRow&) = default;
};

struct SummaryTable {
  std::vector<SummaryRow> rows;

  // Rows of the last checkpoint of each (problem, solver) group.
  std::vector<SummaryRow> FinalRows() const;

  friend bool operator==(const SummaryTable&, const SummaryTable&) = default;
};

// Scalar columns of one trace; all a summary needs.
struct RunCurve {
  std::string problem;
  std::string solver;
  std::uint64_t seed = 0;
  std::vector<double> best_y;
  std::vector<double> time_ms;
};

RunCurve CurveOf(const RunTrace& trace);

// Statistics at every iteration, grouped by (problem, solver) in
// lexicographic order, runs within a group in seed order.
SummaryTable BuildSummary(std::vector<RunCurve> curves);

void WriteSummaryCsv(std::ostream& os, const SummaryTable& table);
// Median best-so-far per solver, one column per (problem, solver) group.
void WriteConvergenceCsv(std::ostream& os, const SummaryTable& table);

struct RunFailure {
  std::string solver;
  std::uint64_t seed = 0;
  std::string message;
};

struct ExperimentResult {
  SummaryTable summary;
  std::vector<RunFailure> failures;
};

// Runs every (replication, solver) pair on `workers` threads, writing
// <out>/traces/<problem>_<solver>_<seed>.csv per run plus summary.csv and
// convergence.csv. Generated quadratic instances go to <out>/instances/.
ExperimentResult RunExperiment(const ExperimentSpec& spec, int workers);

struct TraceIssue {
  std::string file;
  std::string message;
};

struct SummarizeResult {
  SummaryTable summary;
  std::vector<TraceIssue> issues;
};

// Parses one trace CSV into its curve, checking that best_y never increases.
RunCurve ReadTraceCurve(std::istream& in, const std::string& file_name);

// Recomputes the summary from trace files alone. Accepts either the
// experiment output directory or its traces/ subdirectory; malformed traces
// are reported and skipped.
SummarizeResult Summarize(const std::filesystem::path& dir);

// ---------------------------------------------------------------------------
// Surrogate visualization for two-variable problems

struct GridPoint {
  double x0 = 0.0;
  double x1 = 0.0;
  double g = 0.0;
};

struct ModelDump {
  ModelVariant variant = ModelVariant::kAdvanced;
  SurrogateModel model;
  // Lattice points in fit order with their measurement and fitted value.
  std::vector<std::vector<int>> lattice;
  std::vector<double> measured;
  std::vector<double> fitted;
  std::vector<GridPoint> grid;

  double MaxResidual() const;
};

// Fits the surrogate by RLS on every lattice point of a d = 2 problem
// (lexicographic order), then samples g on a grid of spacing `step` covering
// the box.
ModelDump DumpModel(const Problem& problem, ModelVariant variant, double step, std::uint64_t seed,
                    double lambda = kDefaultLambda);

// Rows: variant,x0,x1,g
void WriteGridCsv(std::ostream& os, const std::vector<ModelDump>& dumps, bool header = true);

}  // namespace idone
