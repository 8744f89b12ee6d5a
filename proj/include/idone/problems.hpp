#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "idone/box.hpp"
#include "idone/rng.hpp"

namespace idone {

// Black-box objective over an integer box. One Evaluate call is one budget
// unit regardless of any internal replication.
class Problem {
 public:
  virtual ~Problem() = default;

  virtual std::string id() const = 0;
  virtual const Box& box() const = 0;
  // Noisy measurement y = f(x) + eps; `noise` is the caller's noise stream.
  virtual double Evaluate(std::span<const int> x, Rng& noise) const = 0;

  int dimension() const { return box().dimension(); }
  long double LatticeSize() const { return box().LatticeSize(); }
};

// ---------------------------------------------------------------------------
// Distance matrices and TSPLIB input

inline constexpr double kDefaultInfinityThreshold = 9e6;
inline constexpr double kForbiddenEdgePenalty = 1e6;

struct DistanceMatrix {
  int n = 0;
  std::vector<double> entries;   // row-major n*n
  std::vector<bool> forbidden;   // row-major n*n

  double at(int from, int to) const { return entries[static_cast<std::size_t>(from * n + to)]; }
  bool is_forbidden(int from, int to) const { return forbidden[static_cast<std::size_t>(from * n + to)]; }
};

// Parses the explicit FULL_MATRIX ATSP subset of TSPLIB. Entries at or above
// `infinity_threshold` are marked forbidden.
DistanceMatrix ParseTsplibAtsp(std::istream& in, double infinity_threshold = kDefaultInfinityThreshold);
DistanceMatrix LoadTsplibAtsp(const std::string& path, double infinity_threshold = kDefaultInfinityThreshold);

// The 4-city example instance; the diagonal is forbidden.
DistanceMatrix FourCityExample();

// ---------------------------------------------------------------------------
// Routes

// Position-based route encoding over n cities: city 1 is fixed as the start,
// x_i in [1, n - i] picks among the still-unvisited cities in increasing
// order, and the last city is forced. Returns 1-based city labels of the
// closed tour, without repeating the start.
std::vector<int> DecodeRoute(std::span<const int> x, int n);

// Box for the encoding: d = n - 2, l_i = 1, u_i = n - i.
Box RouteBox(int n);

// Length of the closed tour (1-based labels). Forbidden edges cost the fixed
// penalty instead of their nominal weight.
double TourLength(const DistanceMatrix& matrix, std::span<const int> tour);

struct TspNoise {
  int replications = 100;
  double noise_high = 1.0;
};

// Worst case over `replications` noisy replays of the decoded tour. Every
// edge with a finite nonzero weight gets a fresh Uniform[0, noise_high] draw
// per replay; zero and forbidden edges stay noiseless.
double NoisyTspObjective(const DistanceMatrix& matrix, std::span<const int> x, Rng& noise,
                         const TspNoise& params = {});

class TspProblem : public Problem {
 public:
  TspProblem(std::string id, DistanceMatrix matrix, TspNoise noise = {});

  std::string id() const override { return id_; }
  const Box& box() const override { return box_; }
  double Evaluate(std::span<const int> x, Rng& noise) const override;

  const DistanceMatrix& matrix() const { return matrix_; }
  const TspNoise& noise() const { return noise_; }

 private:
  std::string id_;
  DistanceMatrix matrix_;
  TspNoise noise_;
  Box box_;
};

// Requires a 17-city matrix: 15 variables with u = (16, 15, ..., 2).
std::unique_ptr<TspProblem> MakeBr17Problem(DistanceMatrix matrix, TspNoise noise = {});

// ---------------------------------------------------------------------------
// Convex binary quadratic

struct QuadraticInstance {
  Eigen::MatrixXd a;           // symmetric positive definite
  std::vector<int> x_opt;      // binary optimum
  std::uint64_t seed = 0;      // generator seed, for the reproducibility file
  int attempts = 1;            // substreams consumed until A factorized
};

// A = (U + U^T) / d + I with U iid Uniform[0,1]; x_opt iid Bernoulli(1/2).
// Positive definiteness is checked with a Cholesky attempt; a failure moves
// on to the next substream.
QuadraticInstance GenerateConvexBinary(int d, std::uint64_t seed);

// (x - x_opt)^T A (x - x_opt), plus one Uniform[0,1] draw when `noisy`.
double ConvexBinaryObjective(const QuadraticInstance& instance, std::span<const int> x, Rng& noise,
                             bool noisy = true);

// CSV reproducibility file: lines `d,<d>`, `seed,<seed>`, `x_opt,<x...>`,
// then d lines `A,<row>`.
void WriteQuadraticInstance(std::ostream& os, const QuadraticInstance& instance);
QuadraticInstance ReadQuadraticInstance(std::istream& is);

class ConvexBinaryProblem : public Problem {
 public:
  explicit ConvexBinaryProblem(QuadraticInstance instance, bool noisy = true);

  std::string id() const override;
  const Box& box() const override { return box_; }
  double Evaluate(std::span<const int> x, Rng& noise) const override;

  const QuadraticInstance& instance() const { return instance_; }

 private:
  QuadraticInstance instance_;
  bool noisy_;
  Box box_;
};

}  // namespace idone
