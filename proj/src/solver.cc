#include "idone/solver.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>
#include <fmt/ostream.h>

namespace idone {

const TraceRecord& RunTrace::best() const {
  if (records.empty()) throw std::logic_error("RunTrace::best on an empty trace");
  const TraceRecord* best = &records.front();
  for (const TraceRecord& r : records) {
    if (r.y < best->y) best = &r;
  }
  return *best;
}

std::vector<int> RandomLatticePoint(const Box& box, Rng& rng) {
  std::vector<int> x(static_cast<std::size_t>(box.dimension()));
  for (int i = 0; i < box.dimension(); ++i) {
    x[static_cast<std::size_t>(i)] = static_cast<int>(rng.UniformInt(box.lower(i), box.upper(i)));
  }
  return x;
}

std::vector<int> ExploreStep(std::span<const int> x_star, const Box& box, double p, Rng& rng) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("ExploreStep: p must lie in [0, 1]");
  if (!box.Contains(x_star)) throw std::invalid_argument("ExploreStep: x_star outside the box");
  std::vector<int> x(x_star.begin(), x_star.end());
  for (int i = 0; i < box.dimension(); ++i) {
    const double u = rng.Uniform01();
    if (u >= p) continue;
    int& xi = x[static_cast<std::size_t>(i)];
    if (xi == box.lower(i)) {
      ++xi;
    } else if (xi == box.upper(i)) {
      --xi;
    } else {
      xi += u < 0.5 * p ? +1 : -1;
    }
  }
  return x;
}

double SaAcceptanceProbability(double y_best, double y_candidate, double temperature) {
  if (y_candidate < y_best) return 1.0;
  return std::exp((y_best - y_candidate) / temperature);
}

std::string SolverId(ModelVariant variant) { return fmt::format("idone-{}", ToString(variant)); }

namespace {

using Clock = std::chrono::steady_clock;

// Shared bookkeeping for all solvers: initial point, noise stream, best-so-far
// tracking and per-iteration timing.
class RunRecorder {
 public:
  RunRecorder(const Problem& problem, std::string solver_id, const RunOptions& options)
      : problem_(problem), options_(options), noise_(Rng::Substream(options.seed, stream::kNoise)) {
    if (options.budget < 1) throw std::invalid_argument("budget must be at least 1");
    trace_.problem_id = problem.id();
    trace_.solver_id = std::move(solver_id);
    trace_.seed = options.seed;
    trace_.records.reserve(static_cast<std::size_t>(options.budget));
  }

  std::vector<int> InitialPoint() const {
    if (options_.initial_point) {
      if (!problem_.box().Contains(*options_.initial_point)) {
        throw std::invalid_argument("initial point outside the problem box");
      }
      return *options_.initial_point;
    }
    Rng init = Rng::Substream(options_.seed, stream::kInitialPoint);
    return RandomLatticePoint(problem_.box(), init);
  }

  void StartIteration() { start_ = Clock::now(); }

  double Measure(std::span<const int> x) {
    const double y = problem_.Evaluate(x, noise_);
    if (!std::isfinite(y)) {
      throw std::runtime_error(fmt::format("{}: non-finite measurement at iteration {}", trace_.solver_id,
                                           trace_.records.size() + 1));
    }
    return y;
  }

  void Record(std::vector<int> x, double y, double surrogate_min) {
    TraceRecord r;
    r.iter = static_cast<int>(trace_.records.size()) + 1;
    r.x = std::move(x);
    r.y = y;
    r.best_y = trace_.records.empty() ? y : std::min(trace_.records.back().best_y, y);
    r.surrogate_min = surrogate_min;
    if (options_.record_timing) {
      r.time_ms = std::chrono::duration<double, std::milli>(Clock::now() - start_).count();
    }
    trace_.records.push_back(std::move(r));
  }

  int budget() const { return options_.budget; }
  RunTrace Finish() { return std::move(trace_); }

 private:
  const Problem& problem_;
  const RunOptions& options_;
  Rng noise_;
  RunTrace trace_;
  Clock::time_point start_;
};

Eigen::VectorXd ToReal(std::span<const int> x) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i) v[static_cast<Eigen::Index>(i)] = x[i];
  return v;
}

constexpr double kNoModel = std::numeric_limits<double>::quiet_NaN();

}  // namespace

RunTrace RunIdone(const Problem& problem, const IdoneConfig& config, const RunOptions& options) {
  const Box& box = problem.box();
  const double p = config.p_explore.value_or(1.0 / box.dimension());
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("IDONE: p_explore must lie in [0, 1]");

  RunRecorder recorder(problem, SolverId(config.variant), options);
  Rng rng = Rng::Substream(options.seed, stream::kSolver);

  SurrogateModel model(config.variant, box);
  RlsState rls(model.weights(), config.lambda);
  Eigen::VectorXd activations;

  std::vector<int> x = recorder.InitialPoint();
  for (int n = 1; n <= recorder.budget(); ++n) {
    recorder.StartIteration();
    const double y = recorder.Measure(x);

    const Eigen::VectorXd xr = ToReal(x);
    model.Activations(xr, activations);
    rls.Update(activations, y);
    model.set_weights(rls.weights());

    // Warm start from the point just measured.
    const MinimizeResult min = MinimizeModel(model, xr, config.minimizer);

    std::vector<int> next;
    if (n < recorder.budget()) next = ExploreStep(min.x_star, box, p, rng);
    recorder.Record(std::move(x), y, min.g_rounded);
    x = std::move(next);
  }
  return recorder.Finish();
}

RunTrace RunRandomSearch(const Problem& problem, const RunOptions& options) {
  RunRecorder recorder(problem, "rs", options);
  Rng rng = Rng::Substream(options.seed, stream::kSolver);
  for (int n = 1; n <= recorder.budget(); ++n) {
    recorder.StartIteration();
    std::vector<int> x = n == 1 ? recorder.InitialPoint() : RandomLatticePoint(problem.box(), rng);
    const double y = recorder.Measure(x);
    recorder.Record(std::move(x), y, kNoModel);
  }
  return recorder.Finish();
}

RunTrace RunSimulatedAnnealing(const Problem& problem, const SaConfig& config, const RunOptions& options) {
  if (!(config.t0 > 0.0)) throw std::invalid_argument("SA: T0 must be positive");
  if (!(config.tf > 0.0 && config.tf < 1.0)) throw std::invalid_argument("SA: Tf must lie in (0, 1)");

  const Box& box = problem.box();
  const double p = 1.0 / box.dimension();
  RunRecorder recorder(problem, "sa", options);
  Rng rng = Rng::Substream(options.seed, stream::kSolver);

  recorder.StartIteration();
  std::vector<int> current = recorder.InitialPoint();
  double current_y = recorder.Measure(current);
  recorder.Record(current, current_y, kNoModel);

  double temperature = config.t0;
  for (int n = 2; n <= recorder.budget(); ++n) {
    recorder.StartIteration();
    std::vector<int> candidate = ExploreStep(current, box, p, rng);
    const double y = recorder.Measure(candidate);
    const bool accept = y < current_y || rng.Uniform01() < SaAcceptanceProbability(current_y, y, temperature);
    if (accept) {
      current = candidate;
      current_y = y;
    }
    temperature *= config.tf;
    recorder.Record(std::move(candidate), y, kNoModel);
  }
  return recorder.Finish();
}

void WriteTraceCsv(std::ostream& os, const RunTrace& trace) {
  const std::size_t d = trace.records.empty() ? 0 : trace.records.front().x.size();
  fmt::print(os, "iter,y,best_y,surrogate_min,time_ms");
  for (std::size_t i = 0; i < d; ++i) fmt::print(os, ",x{}", i);
  fmt::print(os, "\n");
  fmt::memory_buffer line;
  for (const TraceRecord& r : trace.records) {
    line.clear();
    fmt::format_to(std::back_inserter(line), "{},{},{},{},{}", r.iter, r.y, r.best_y, r.surrogate_min, r.time_ms);
    for (int xi : r.x) fmt::format_to(std::back_inserter(line), ",{}", xi);
    line.push_back('\n');
    os.write(line.data(), static_cast<std::streamsize>(line.size()));
  }
}

std::string TraceFileName(const RunTrace& trace) {
  return fmt::format("{}_{}_{}.csv", trace.problem_id, trace.solver_id, trace.seed);
}

}  // namespace idone
