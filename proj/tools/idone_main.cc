// Command-line front end: run experiments, summarize trace directories, dump
// fitted surrogates, and check TSPLIB instances.

#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "idone/experiment.hpp"
#include "idone/problems.hpp"

namespace {

using namespace idone;

void PrintFinalRows(const SummaryTable& table) {
  fmt::print("{:<22} {:<16} {:>6} {:>12} {:>12} {:>12} {:>10}\n", "problem", "solver", "runs", "best_median",
             "best_mean", "best_min", "time_s");
  for (const SummaryRow& r : table.FinalRows()) {
    fmt::print("{:<22} {:<16} {:>6} {:>12.4f} {:>12.4f} {:>12.4f} {:>10.3f}\n", r.problem, r.solver, r.n_runs,
               r.best_median, r.best_mean, r.best_min, r.time_total_s_median);
  }
}

int CmdRun(const std::string& spec_path, const std::string& out, std::optional<std::uint64_t> seed,
           std::optional<int> budget, int workers, bool no_timing) {
  ExperimentSpec spec = LoadExperimentSpec(spec_path);
  if (!out.empty()) spec.output_dir = out;
  if (seed) spec.base_seed = *seed;
  if (budget) spec.budget = *budget;
  if (no_timing) spec.record_timing = false;
  if (spec.output_dir.empty()) {
    fmt::print(std::cerr, "error: no output directory (use --out or 'output =' in the spec file)\n");
    return 2;
  }
  const ExperimentResult result = RunExperiment(spec, workers);
  PrintFinalRows(result.summary);
  for (const RunFailure& f : result.failures) {
    fmt::print(std::cerr, "run failed: solver={} seed={}: {}\n", f.solver, f.seed, f.message);
  }
  return result.failures.empty() ? 0 : 1;
}

int CmdSummarize(const std::string& dir, const std::string& out) {
  const SummarizeResult result = Summarize(dir);
  for (const TraceIssue& issue : result.issues) {
    fmt::print(std::cerr, "skipped {}: {}\n", issue.file, issue.message);
  }
  if (!out.empty()) {
    std::ofstream f(out);
    WriteSummaryCsv(f, result.summary);
  }
  PrintFinalRows(result.summary);
  return result.issues.empty() ? 0 : 1;
}

int CmdDumpModel(const std::string& problem_name, const std::string& variant,
                 double step, double noise_high, std::uint64_t seed, const std::string& out) {
  ProblemSpec spec;
  if (problem_name == "tsp4") {
    spec.kind = ProblemKind::kFourCity;
  } else {
    fmt::print(std::cerr, "error: dump-model supports two-variable problems only (tsp4)\n");
    return 2;
  }
  spec.tsp_noise.noise_high = noise_high;
  const auto problem = MakeProblem(spec, seed);

  std::vector<ModelDump> dumps;
  for (ModelVariant v : {ModelVariant::kBasic, ModelVariant::kAdvanced}) {
    if (variant == "both" || variant == ToString(v)) dumps.push_back(DumpModel(*problem, v, step, seed));
  }
  if (dumps.empty()) {
    fmt::print(std::cerr, "error: unknown variant '{}'\n", variant);
    return 2;
  }
  for (const ModelDump& d : dumps) {
    fmt::print(std::cerr, "{}: {} basis functions, max lattice residual {:.6g}\n", ToString(d.variant),
               d.model.num_basis(), d.MaxResidual());
  }
  if (out.empty()) {
    WriteGridCsv(std::cout, dumps);
  } else {
    std::ofstream f(out);
    WriteGridCsv(f, dumps);
  }
  return 0;
}

int CmdListProblems() {
  fmt::print("convex_binary  binary quadratic (x - x*)^T A (x - x*) + U[0,1] noise; keys: d, noisy\n");
  fmt::print("br17           noisy worst-case ATSP over 17 cities, 15 integer variables; keys: instance,\n");
  fmt::print("               tsp.replications, tsp.noise_high\n");
  fmt::print("tsp4           4-city example instance, 2 integer variables; keys: tsp.replications,\n");
  fmt::print("               tsp.noise_high\n");
  return 0;
}

int CmdValidateInstance(const std::string& path) {
  const DistanceMatrix m = LoadTsplibAtsp(path);
  int forbidden = 0;
  for (bool f : m.forbidden) forbidden += f;
  fmt::print("{}: {} cities, {} forbidden entries, {} route variables, lattice size {:.4g}\n", path, m.n,
             forbidden, m.n - 2, static_cast<double>(RouteBox(m.n).LatticeSize()));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Surrogate-model black-box optimizer for integer problems"};
  app.require_subcommand(1);

  std::string spec_path, out;
  std::optional<std::uint64_t> seed;
  std::optional<int> budget;
  int workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  bool no_timing = false;
  auto* run = app.add_subcommand("run", "Run an experiment described by a spec file");
  run->add_option("--spec", spec_path, "Experiment spec file")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out, "Output directory (overrides the spec file)");
  run->add_option("--seed", seed, "Base seed (overrides the spec file)");
  run->add_option("--budget", budget, "Evaluation budget (overrides the spec file)");
  run->add_option("--workers", workers, "Parallel runs")->check(CLI::PositiveNumber);
  run->add_flag("--no-timing", no_timing, "Write zero timings so outputs are byte-reproducible");

  std::string summarize_dir, summarize_out;
  auto* summarize = app.add_subcommand("summarize", "Recompute summary statistics from trace files");
  summarize->add_option("dir", summarize_dir, "Experiment or trace directory")->required();
  summarize->add_option("--out", summarize_out, "Write the summary CSV here");

  std::string dump_problem = "tsp4", dump_variant = "both", dump_out;
  double dump_step = 0.1, dump_noise = 0.0;
  std::uint64_t dump_seed = 0;
  auto* dump = app.add_subcommand("dump-model", "Fit on every lattice point and write g on a grid");
  dump->add_option("--problem", dump_problem, "Two-variable problem")->capture_default_str();
  dump->add_option("--variant", dump_variant, "basic, advanced or both")->capture_default_str();
  dump->add_option("--step", dump_step, "Grid spacing")->capture_default_str();
  dump->add_option("--noise-high", dump_noise, "Upper end of the per-edge noise")->capture_default_str();
  dump->add_option("--seed", dump_seed, "Noise seed")->capture_default_str();
  dump->add_option("--out", dump_out, "Output CSV (default stdout)");

  app.add_subcommand("list-problems", "Describe the available problems");

  std::string validate_path;
  auto* validate = app.add_subcommand("validate-instance", "Parse a TSPLIB ATSP file");
  validate->add_option("file", validate_path)->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return CmdRun(spec_path, out, seed, budget, workers, no_timing);
    if (summarize->parsed()) return CmdSummarize(summarize_dir, summarize_out);
    if (dump->parsed()) {
      return CmdDumpModel(dump_problem, dump_variant, dump_step, dump_noise, dump_seed, dump_out);
    }
    if (validate->parsed()) return CmdValidateInstance(validate_path);
    return CmdListProblems();
  } catch (const std::exception& e) {
    fmt::print(std::cerr, "error: {}\n", e.what());
    return 1;
  }
}
