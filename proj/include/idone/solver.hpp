#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "idone/box.hpp"
#include "idone/fitting.hpp"
#include "idone/model_min.hpp"
#include "idone/problems.hpp"
#include "idone/rng.hpp"
#include "idone/surrogate.hpp"

namespace idone {

struct TraceRecord {
  int iter = 0;  // 1-based
  std::vector<int> x;
  double y = 0.0;
  double best_y = 0.0;
  // Rounded surrogate minimum after this iteration's fit; NaN for solvers
  // without a model.
  double surrogate_min = 0.0;
  double time_ms = 0.0;
};

struct RunTrace {
  std::string problem_id;
  std::string solver_id;
  std::uint64_t seed = 0;
  std::vector<TraceRecord> records;

  // Record holding the lowest measured y (first one on ties).
  const TraceRecord& best() const;
  double final_best() const { return records.back().best_y; }
};

// Settings shared by every solver run.
struct RunOptions {
  int budget = 1000;
  std::uint64_t seed = 0;
  // Shared starting lattice point; drawn from the seed's initial-point stream
  // when absent.
  std::optional<std::vector<int>> initial_point;
  // When false every time_ms is written as 0, making traces reproducible
  // byte for byte.
  bool record_timing = true;
};

struct IdoneConfig {
  ModelVariant variant = ModelVariant::kAdvanced;
  // Defaults to 1/d when unset.
  std::optional<double> p_explore;
  double lambda = kDefaultLambda;
  MinimizeOptions minimizer;
};

struct SaConfig {
  double t0 = 1.0;
  double tf = 0.95;
};

// Temperature schedules used for the two benchmark studies.
inline constexpr SaConfig kTspAnnealing{4.48, 0.996};
inline constexpr SaConfig kBinaryAnnealing{1.0, 0.95};

// Uniform random lattice point of the box.
std::vector<int> RandomLatticePoint(const Box& box, Rng& rng);

// Per coordinate: keep with probability 1 - p; otherwise step +-1, always
// into the box (a coordinate at a bound can only move inward).
std::vector<int> ExploreStep(std::span<const int> x_star, const Box& box, double p, Rng& rng);

double SaAcceptanceProbability(double y_best, double y_candidate, double temperature);

std::string SolverId(ModelVariant variant);

RunTrace RunIdone(const Problem& problem, const IdoneConfig& config, const RunOptions& options);
RunTrace RunRandomSearch(const Problem& problem, const RunOptions& options);
RunTrace RunSimulatedAnnealing(const Problem& problem, const SaConfig& config, const RunOptions& options);

// Trace CSV: header iter,y,best_y,surrogate_min,time_ms,x0,...,x{d-1}.
void WriteTraceCsv(std::ostream& os, const RunTrace& trace);
std::string TraceFileName(const RunTrace& trace);

}  // namespace idone
