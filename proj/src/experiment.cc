#include "idone/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <mutex>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <tuple>

#include <fmt/format.h>
#include <fmt/ostream.h>

namespace fs = std::filesystem;

namespace idone {
namespace {

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> Split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(s);
  while (std::getline(ss, field, sep)) out.push_back(field);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

template <typename T>
T ParseValue(const std::string& text, const std::string& what) {
  T value{};
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw std::runtime_error(fmt::format("invalid value '{}' for {}", text, what));
  }
  return value;
}

bool ParseBool(const std::string& text, const std::string& what) {
  if (text == "true" || text == "on" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "off" || text == "0" || text == "no") return false;
  throw std::runtime_error(fmt::format("invalid boolean '{}' for {}", text, what));
}

ProblemKind ParseProblemKind(const std::string& name) {
  if (name == "convex_binary") return ProblemKind::kConvexBinary;
  if (name == "br17") return ProblemKind::kBr17;
  if (name == "tsp4") return ProblemKind::kFourCity;
  throw std::runtime_error(fmt::format("unknown problem '{}' (convex_binary, br17, tsp4)", name));
}

SolverSpec MakeSolverSpec(const std::string& id) {
  SolverSpec s;
  s.id = id;
  if (id == "idone-basic") {
    s.idone.variant = ModelVariant::kBasic;
  } else if (id == "idone-advanced") {
    s.idone.variant = ModelVariant::kAdvanced;
  } else if (id != "rs" && id != "sa") {
    throw std::runtime_error(fmt::format("unknown solver '{}' (idone-basic, idone-advanced, rs, sa)", id));
  }
  return s;
}

double Median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

std::string ToString(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::kConvexBinary:
      return "convex_binary";
    case ProblemKind::kBr17:
      return "br17";
    case ProblemKind::kFourCity:
      return "tsp4";
  }
  return "unknown";
}

ExperimentSpec ParseExperimentSpec(std::istream& in, const fs::path& base_dir) {
  ExperimentSpec spec;
  std::vector<std::string> solver_ids = {"idone-advanced", "idone-basic", "rs", "sa"};
  std::optional<double> lambda, p_explore, sa_t0, sa_tf, grad_tol;
  std::optional<int> max_iters;
  bool saw_problem = false;

  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error(fmt::format("spec line {}: expected 'key = value'", line_no));
    }
    const std::string key = Trim(line.substr(0, eq));
    const std::string value = Trim(line.substr(eq + 1));
    const std::string what = fmt::format("'{}' (line {})", key, line_no);

    if (key == "problem") {
      spec.problem.kind = ParseProblemKind(value);
      saw_problem = true;
    } else if (key == "d") {
      spec.problem.d = ParseValue<int>(value, what);
    } else if (key == "noisy") {
      spec.problem.noisy = ParseBool(value, what);
    } else if (key == "instance") {
      fs::path p(value);
      spec.problem.instance_path = (p.is_relative() && !base_dir.empty() ? base_dir / p : p).string();
    } else if (key == "tsp.replications") {
      spec.problem.tsp_noise.replications = ParseValue<int>(value, what);
    } else if (key == "tsp.noise_high") {
      spec.problem.tsp_noise.noise_high = ParseValue<double>(value, what);
    } else if (key == "budget") {
      spec.budget = ParseValue<int>(value, what);
    } else if (key == "replications") {
      spec.replications = ParseValue<int>(value, what);
    } else if (key == "base_seed") {
      spec.base_seed = ParseValue<std::uint64_t>(value, what);
    } else if (key == "record_timing") {
      spec.record_timing = ParseBool(value, what);
    } else if (key == "output") {
      spec.output_dir = value;
    } else if (key == "solvers") {
      solver_ids.clear();
      for (const std::string& id : Split(value, ',')) {
        if (!Trim(id).empty()) solver_ids.push_back(Trim(id));
      }
    } else if (key == "idone.lambda") {
      lambda = ParseValue<double>(value, what);
    } else if (key == "idone.p_explore") {
      if (value != "auto") p_explore = ParseValue<double>(value, what);
    } else if (key == "idone.max_iters") {
      max_iters = ParseValue<int>(value, what);
    } else if (key == "idone.grad_tol") {
      grad_tol = ParseValue<double>(value, what);
    } else if (key == "sa.t0") {
      sa_t0 = ParseValue<double>(value, what);
    } else if (key == "sa.tf") {
      sa_tf = ParseValue<double>(value, what);
    } else {
      throw std::runtime_error(fmt::format("spec line {}: unknown key '{}'", line_no, key));
    }
  }

  if (!saw_problem) throw std::runtime_error("spec: missing 'problem'");
  if (spec.replications < 1) throw std::runtime_error("spec: replications must be >= 1");
  if (spec.budget < 1) throw std::runtime_error("spec: budget must be >= 1");
  if (solver_ids.empty()) throw std::runtime_error("spec: no solvers");
  if (spec.problem.kind == ProblemKind::kConvexBinary && spec.problem.d < 1) {
    throw std::runtime_error("spec: d must be >= 1");
  }
  if (spec.problem.kind == ProblemKind::kBr17 && spec.problem.instance_path.empty()) {
    throw std::runtime_error("spec: br17 needs 'instance'");
  }

  const SaConfig sa_default =
      spec.problem.kind == ProblemKind::kConvexBinary ? kBinaryAnnealing : kTspAnnealing;
  for (const std::string& id : solver_ids) {
    SolverSpec s = MakeSolverSpec(id);
    if (lambda) s.idone.lambda = *lambda;
    s.idone.p_explore = p_explore;
    if (max_iters) s.idone.minimizer.max_iters = *max_iters;
    if (grad_tol) s.idone.minimizer.grad_tol = *grad_tol;
    s.sa = SaConfig{sa_t0.value_or(sa_default.t0), sa_tf.value_or(sa_default.tf)};
    spec.solvers.push_back(std::move(s));
  }
  return spec;
}

ExperimentSpec LoadExperimentSpec(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot open spec file '{}'", path.string()));
  return ParseExperimentSpec(in, path.parent_path());
}

std::unique_ptr<Problem> MakeProblem(const ProblemSpec& spec, std::uint64_t replication_seed) {
  switch (spec.kind) {
    case ProblemKind::kConvexBinary: {
      const std::uint64_t instance_seed = Rng::Substream(replication_seed, stream::kInstance).NextU64();
      return std::make_unique<ConvexBinaryProblem>(GenerateConvexBinary(spec.d, instance_seed), spec.noisy);
    }
    case ProblemKind::kBr17:
      return MakeBr17Problem(LoadTsplibAtsp(spec.instance_path), spec.tsp_noise);
    case ProblemKind::kFourCity:
      return std::make_unique<TspProblem>("tsp4", FourCityExample(), spec.tsp_noise);
  }
  throw std::logic_error("unhandled problem kind");
}

// ---------------------------------------------------------------------------
// Summaries

std::vector<SummaryRow> SummaryTable::FinalRows() const {
  std::vector<SummaryRow> out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const bool last_of_group = i + 1 == rows.size() || rows[i + 1].problem != rows[i].problem ||
                               rows[i + 1].solver != rows[i].solver;
    if (last_of_group) out.push_back(rows[i]);
  }
  return out;
}

RunCurve CurveOf(const RunTrace& trace) {
  RunCurve c;
  c.problem = trace.problem_id;
  c.solver = trace.solver_id;
  c.seed = trace.seed;
  c.best_y.reserve(trace.records.size());
  c.time_ms.reserve(trace.records.size());
  for (const TraceRecord& r : trace.records) {
    c.best_y.push_back(r.best_y);
    c.time_ms.push_back(r.time_ms);
  }
  return c;
}

SummaryTable BuildSummary(std::vector<RunCurve> curves) {
  std::sort(curves.begin(), curves.end(), [](const RunCurve& a, const RunCurve& b) {
    return std::tie(a.problem, a.solver, a.seed) < std::tie(b.problem, b.solver, b.seed);
  });

  SummaryTable table;
  std::size_t begin = 0;
  while (begin < curves.size()) {
    std::size_t end = begin;
    std::size_t length = 0;
    while (end < curves.size() && curves[end].problem == curves[begin].problem &&
           curves[end].solver == curves[begin].solver) {
      length = std::max(length, curves[end].best_y.size());
      ++end;
    }
    // Cumulative run time in seconds per run.
    std::vector<std::vector<double>> elapsed;
    for (std::size_t r = begin; r < end; ++r) {
      std::vector<double> cum(curves[r].time_ms.size());
      double total = 0.0;
      for (std::size_t t = 0; t < cum.size(); ++t) {
        total += curves[r].time_ms[t];
        cum[t] = total / 1000.0;
      }
      elapsed.push_back(std::move(cum));
    }

    for (std::size_t t = 0; t < length; ++t) {
      std::vector<double> best;
      std::vector<double> times;
      for (std::size_t r = begin; r < end; ++r) {
        if (curves[r].best_y.size() <= t) continue;
        best.push_back(curves[r].best_y[t]);
        times.push_back(elapsed[r - begin][t]);
      }
      SummaryRow row;
      row.problem = curves[begin].problem;
      row.solver = curves[begin].solver;
      row.checkpoint = static_cast<int>(t + 1);
      row.n_runs = static_cast<int>(best.size());
      row.best_min = *std::min_element(best.begin(), best.end());
      row.best_max = *std::max_element(best.begin(), best.end());
      row.best_mean = std::accumulate(best.begin(), best.end(), 0.0) / static_cast<double>(best.size());
      row.best_median = Median(best);
      row.time_total_s_median = Median(times);
      table.rows.push_back(std::move(row));
    }
    begin = end;
  }
  return table;
}

void WriteSummaryCsv(std::ostream& os, const SummaryTable& table) {
  fmt::print(os, "problem,solver,checkpoint,n_runs,best_min,best_median,best_mean,best_max,time_total_s_median\n");
  for (const SummaryRow& r : table.rows) {
    fmt::print(os, "{},{},{},{},{},{},{},{},{}\n", r.problem, r.solver, r.checkpoint, r.n_runs, r.best_min,
               r.best_median, r.best_mean, r.best_max, r.time_total_s_median);
  }
}

void WriteConvergenceCsv(std::ostream& os, const SummaryTable& table) {
  std::vector<std::string> columns;
  std::map<std::pair<std::string, int>, double> medians;
  int length = 0;
  for (const SummaryRow& r : table.rows) {
    const std::string column = fmt::format("{}/{}", r.problem, r.solver);
    if (columns.empty() || columns.back() != column) columns.push_back(column);
    medians[{column, r.checkpoint}] = r.best_median;
    length = std::max(length, r.checkpoint);
  }
  fmt::print(os, "iter");
  for (const std::string& c : columns) fmt::print(os, ",{}", c);
  fmt::print(os, "\n");
  for (int t = 1; t <= length; ++t) {
    fmt::print(os, "{}", t);
    for (const std::string& c : columns) {
      const auto it = medians.find({c, t});
      if (it == medians.end()) {
        fmt::print(os, ",");
      } else {
        fmt::print(os, ",{}", it->second);
      }
    }
    fmt::print(os, "\n");
  }
}

// ---------------------------------------------------------------------------
// Experiment runner

ExperimentResult RunExperiment(const ExperimentSpec& spec, int workers) {
  if (spec.output_dir.empty()) throw std::runtime_error("experiment: no output directory");
  const fs::path out(spec.output_dir);
  const fs::path trace_dir = out / "traces";
  fs::create_directories(trace_dir);

  // Instances are built once per replication and shared read-only by every
  // solver of that replication.
  std::vector<std::unique_ptr<Problem>> problems;
  for (int r = 0; r < spec.replications; ++r) {
    const std::uint64_t seed = spec.base_seed + static_cast<std::uint64_t>(r);
    problems.push_back(MakeProblem(spec.problem, seed));
    if (const auto* binary = dynamic_cast<const ConvexBinaryProblem*>(problems.back().get())) {
      fs::create_directories(out / "instances");
      std::ofstream f(out / "instances" / fmt::format("{}_{}.csv", binary->id(), seed));
      WriteQuadraticInstance(f, binary->instance());
      if (!f) throw std::runtime_error("experiment: failed to write instance file");
    }
  }

  struct Job {
    int replication;
    std::size_t solver;
  };
  std::vector<Job> jobs;
  for (int r = 0; r < spec.replications; ++r) {
    for (std::size_t s = 0; s < spec.solvers.size(); ++s) jobs.push_back({r, s});
  }

  std::vector<std::optional<RunCurve>> curves(jobs.size());
  std::vector<std::optional<RunFailure>> failures(jobs.size());
  std::atomic<std::size_t> next{0};

  auto work = [&]() {
    for (std::size_t j = next++; j < jobs.size(); j = next++) {
      const Job& job = jobs[j];
      const SolverSpec& solver = spec.solvers[job.solver];
      const Problem& problem = *problems[static_cast<std::size_t>(job.replication)];
      RunOptions options;
      options.budget = spec.budget;
      options.seed = spec.base_seed + static_cast<std::uint64_t>(job.replication);
      options.record_timing = spec.record_timing;
      try {
        RunTrace trace;
        if (solver.id == "rs") {
          trace = RunRandomSearch(problem, options);
        } else if (solver.id == "sa") {
          trace = RunSimulatedAnnealing(problem, solver.sa, options);
        } else {
          trace = RunIdone(problem, solver.idone, options);
        }
        std::ofstream f(trace_dir / TraceFileName(trace));
        WriteTraceCsv(f, trace);
        f.close();
        if (!f) throw std::runtime_error("failed to write trace file");
        curves[j] = CurveOf(trace);
      } catch (const std::exception& e) {
        failures[j] = RunFailure{solver.id, options.seed, e.what()};
      }
    }
  };

  const int threads = std::clamp(workers, 1, static_cast<int>(jobs.size()));
  {
    std::vector<std::jthread> pool;
    for (int t = 1; t < threads; ++t) pool.emplace_back(work);
    work();
  }

  ExperimentResult result;
  std::vector<RunCurve> done;
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    if (curves[j]) done.push_back(std::move(*curves[j]));
    if (failures[j]) result.failures.push_back(std::move(*failures[j]));
  }
  result.summary = BuildSummary(std::move(done));

  std::ofstream summary(out / "summary.csv");
  WriteSummaryCsv(summary, result.summary);
  std::ofstream convergence(out / "convergence.csv");
  WriteConvergenceCsv(convergence, result.summary);
  if (!result.failures.empty()) {
    std::ofstream f(out / "failures.csv");
    fmt::print(f, "solver,seed,message\n");
    for (const RunFailure& fail : result.failures) {
      fmt::print(f, "{},{},\"{}\"\n", fail.solver, fail.seed, fail.message);
    }
  }
  if (!summary || !convergence) throw std::runtime_error("experiment: failed to write summary files");
  return result;
}

// ---------------------------------------------------------------------------
// Summaries from disk

RunCurve ReadTraceCurve(std::istream& in, const std::string& file_name) {
  const std::string stem = fs::path(file_name).stem().string();
  const auto last = stem.rfind('_');
  const auto prev = last == std::string::npos || last == 0 ? std::string::npos : stem.rfind('_', last - 1);
  if (prev == std::string::npos) {
    throw std::runtime_error("file name is not <problem>_<solver>_<seed>.csv");
  }
  RunCurve curve;
  curve.problem = stem.substr(0, prev);
  curve.solver = stem.substr(prev + 1, last - prev - 1);
  curve.seed = ParseValue<std::uint64_t>(stem.substr(last + 1), "seed in file name");

  std::string line;
  if (!std::getline(in, line) || line.rfind("iter,y,best_y,surrogate_min,time_ms", 0) != 0) {
    throw std::runtime_error("missing or malformed header");
  }
  int expected_iter = 1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> fields = Split(line, ',');
    if (fields.size() < 5) throw std::runtime_error(fmt::format("row {}: too few columns", expected_iter));
    if (ParseValue<int>(fields[0], "iter") != expected_iter) {
      throw std::runtime_error(fmt::format("row {}: iteration out of sequence", expected_iter));
    }
    const double best = ParseValue<double>(fields[2], "best_y");
    if (!curve.best_y.empty() && best > curve.best_y.back()) {
      throw std::runtime_error(fmt::format("row {}: best_y increased", expected_iter));
    }
    curve.best_y.push_back(best);
    curve.time_ms.push_back(ParseValue<double>(fields[4], "time_ms"));
    ++expected_iter;
  }
  if (curve.best_y.empty()) throw std::runtime_error("trace has no rows");
  return curve;
}

SummarizeResult Summarize(const fs::path& dir) {
  fs::path trace_dir = dir;
  if (fs::is_directory(dir / "traces")) trace_dir = dir / "traces";
  if (!fs::is_directory(trace_dir)) {
    throw std::runtime_error(fmt::format("'{}' is not a directory", dir.string()));
  }

  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(trace_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".csv") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  SummarizeResult result;
  std::vector<RunCurve> curves;
  for (const fs::path& file : files) {
    const std::string name = file.filename().string();
    if (name == "summary.csv" || name == "convergence.csv" || name == "failures.csv") continue;
    try {
      std::ifstream in(file);
      curves.push_back(ReadTraceCurve(in, name));
    } catch (const std::exception& e) {
      result.issues.push_back({name, e.what()});
    }
  }
  result.summary = BuildSummary(std::move(curves));
  return result;
}

// ---------------------------------------------------------------------------
// Model dump

double ModelDump::MaxResidual() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < measured.size(); ++i) worst = std::max(worst, std::abs(fitted[i] - measured[i]));
  return worst;
}

ModelDump DumpModel(const Problem& problem, ModelVariant variant, double step, std::uint64_t seed, double lambda) {
  const Box& box = problem.box();
  if (box.dimension() != 2) {
    throw std::invalid_argument(fmt::format("model dump needs a two-variable problem, got d = {}", box.dimension()));
  }
  if (!(step > 0.0)) throw std::invalid_argument("model dump: grid step must be positive");

  ModelDump dump{variant, SurrogateModel(variant, box), {}, {}, {}, {}};
  RlsState rls(dump.model.weights(), lambda);
  Rng noise = Rng::Substream(seed, stream::kNoise);
  Eigen::VectorXd a;
  for (int x0 = box.lower(0); x0 <= box.upper(0); ++x0) {
    for (int x1 = box.lower(1); x1 <= box.upper(1); ++x1) {
      std::vector<int> x{x0, x1};
      const double y = problem.Evaluate(x, noise);
      dump.model.Activations(Eigen::Vector2d(x0, x1), a);
      rls.Update(a, y);
      dump.lattice.push_back(std::move(x));
      dump.measured.push_back(y);
    }
  }
  dump.model.set_weights(rls.weights());
  for (const auto& x : dump.lattice) dump.fitted.push_back(dump.model.Evaluate(Eigen::Vector2d(x[0], x[1])));

  const int n0 = static_cast<int>(std::lround((box.upper(0) - box.lower(0)) / step));
  const int n1 = static_cast<int>(std::lround((box.upper(1) - box.lower(1)) / step));
  for (int i = 0; i <= n0; ++i) {
    for (int j = 0; j <= n1; ++j) {
      const Eigen::Vector2d p(box.lower(0) + i * step, box.lower(1) + j * step);
      dump.grid.push_back({p[0], p[1], dump.model.Evaluate(p)});
    }
  }
  return dump;
}

void WriteGridCsv(std::ostream& os, const std::vector<ModelDump>& dumps, bool header) {
  if (header) fmt::print(os, "variant,x0,x1,g\n");
  for (const ModelDump& d : dumps) {
    for (const GridPoint& p : d.grid) fmt::print(os, "{},{},{},{}\n", ToString(d.variant), p.x0, p.x1, p.g);
  }
}

}  // namespace idone
