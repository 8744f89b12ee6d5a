#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

#include <fmt/format.h>

#include "idone/problems.hpp"

namespace idone {
namespace {

std::string_view Trim(std::string_view s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  const auto begin = std::find_if(s.begin(), s.end(), not_space);
  const auto end = std::find_if(s.rbegin(), std::string_view::reverse_iterator(begin), not_space).base();
  return std::string_view(begin, end);
}

std::string Upper(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::toupper(c); });
  return out;
}

double ParseNumber(std::string_view token) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw std::runtime_error(fmt::format("TSPLIB: malformed number '{}'", token));
  }
  return value;
}

}  // namespace

DistanceMatrix ParseTsplibAtsp(std::istream& in, double infinity_threshold) {
  std::string type, weight_type, weight_format;
  int dimension = -1;
  std::vector<double> values;
  bool in_section = false;
  bool saw_section = false;

  std::string line;
  while (std::getline(in, line)) {
    const std::string_view trimmed = Trim(line);
    if (trimmed.empty()) continue;

    if (in_section) {
      std::istringstream tokens{std::string(trimmed)};
      std::string token;
      bool done = false;
      while (tokens >> token) {
        if (Upper(token) == "EOF") {
          done = true;
          break;
        }
        values.push_back(ParseNumber(token));
      }
      if (done) break;
      continue;
    }

    const std::size_t colon = trimmed.find(':');
    const std::string key = Upper(Trim(trimmed.substr(0, colon)));
    const std::string_view value = colon == std::string_view::npos ? std::string_view() : Trim(trimmed.substr(colon + 1));

    if (key == "EOF") break;
    if (key == "EDGE_WEIGHT_SECTION") {
      in_section = true;
      saw_section = true;
    } else if (key == "TYPE") {
      type = Upper(value);
    } else if (key == "DIMENSION") {
      const double dim = ParseNumber(value);
      if (dim < 1 || dim != static_cast<int>(dim)) {
        throw std::runtime_error(fmt::format("TSPLIB: invalid DIMENSION '{}'", value));
      }
      dimension = static_cast<int>(dim);
    } else if (key == "EDGE_WEIGHT_TYPE") {
      weight_type = Upper(value);
    } else if (key == "EDGE_WEIGHT_FORMAT") {
      weight_format = Upper(value);
    }
    // NAME, COMMENT and other header keywords are ignored.
  }

  if (type != "ATSP") {
    throw std::runtime_error(fmt::format("TSPLIB: unsupported TYPE '{}' (only ATSP)", type));
  }
  if (weight_type != "EXPLICIT") {
    throw std::runtime_error(
        fmt::format("TSPLIB: unsupported EDGE_WEIGHT_TYPE '{}' (only EXPLICIT)", weight_type));
  }
  if (weight_format != "FULL_MATRIX") {
    throw std::runtime_error(
        fmt::format("TSPLIB: unsupported EDGE_WEIGHT_FORMAT '{}' (only FULL_MATRIX)", weight_format));
  }
  if (dimension < 0) throw std::runtime_error("TSPLIB: missing DIMENSION");
  if (!saw_section) throw std::runtime_error("TSPLIB: missing EDGE_WEIGHT_SECTION");
  const std::size_t expected = static_cast<std::size_t>(dimension) * static_cast<std::size_t>(dimension);
  if (values.size() != expected) {
    throw std::runtime_error(fmt::format("TSPLIB: DIMENSION {} needs {} weights but the section has {}",
                                         dimension, expected, values.size()));
  }

  DistanceMatrix m;
  m.n = dimension;
  m.entries = std::move(values);
  m.forbidden.resize(expected);
  for (std::size_t k = 0; k < expected; ++k) m.forbidden[k] = m.entries[k] >= infinity_threshold;
  return m;
}

DistanceMatrix LoadTsplibAtsp(const std::string& path, double infinity_threshold) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot open TSPLIB file '{}'", path));
  return ParseTsplibAtsp(in, infinity_threshold);
}

DistanceMatrix FourCityExample() {
  DistanceMatrix m;
  m.n = 4;
  m.entries = {0, 10, 15, 20,  //
               10, 0, 35, 25,  //
               15, 35, 0, 30,  //
               20, 25, 30, 0};
  m.forbidden.assign(16, false);
  for (int i = 0; i < 4; ++i) m.forbidden[static_cast<std::size_t>(i * 4 + i)] = true;
  return m;
}

std::vector<int> DecodeRoute(std::span<const int> x, int n) {
  if (n < 3) throw std::invalid_argument("DecodeRoute: need at least 3 cities");
  if (static_cast<int>(x.size()) != n - 2) {
    throw std::invalid_argument(fmt::format("DecodeRoute: {} cities need {} variables, got {}", n, n - 2, x.size()));
  }
  std::vector<int> remaining;
  remaining.reserve(static_cast<std::size_t>(n - 1));
  for (int c = 2; c <= n; ++c) remaining.push_back(c);

  std::vector<int> tour{1};
  tour.reserve(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < x.size(); ++i) {
    const int choice = x[i];
    if (choice < 1 || choice > static_cast<int>(remaining.size())) {
      throw std::out_of_range(fmt::format("DecodeRoute: x[{}] = {} outside [1, {}]", i, choice, remaining.size()));
    }
    tour.push_back(remaining[static_cast<std::size_t>(choice - 1)]);
    remaining.erase(remaining.begin() + (choice - 1));
  }
  tour.push_back(remaining.front());
  return tour;
}

Box RouteBox(int n) {
  if (n < 3) throw std::invalid_argument("RouteBox: need at least 3 cities");
  std::vector<int> lower(static_cast<std::size_t>(n - 2), 1);
  std::vector<int> upper(static_cast<std::size_t>(n - 2));
  for (int i = 1; i <= n - 2; ++i) upper[static_cast<std::size_t>(i - 1)] = n - i;
  return Box(std::move(lower), std::move(upper));
}

double TourLength(const DistanceMatrix& matrix, std::span<const int> tour) {
  double length = 0.0;
  for (std::size_t k = 0; k < tour.size(); ++k) {
    const int from = tour[k] - 1;
    const int to = tour[(k + 1) % tour.size()] - 1;
    length += matrix.is_forbidden(from, to) ? kForbiddenEdgePenalty : matrix.at(from, to);
  }
  return length;
}

double NoisyTspObjective(const DistanceMatrix& matrix, std::span<const int> x, Rng& noise,
                         const TspNoise& params) {
  if (params.replications < 1) throw std::invalid_argument("NoisyTspObjective: replications must be >= 1");
  const std::vector<int> tour = DecodeRoute(x, matrix.n);

  // Per edge: fixed cost, and whether it receives noise.
  std::vector<std::pair<double, bool>> edges;
  edges.reserve(tour.size());
  for (std::size_t k = 0; k < tour.size(); ++k) {
    const int from = tour[k] - 1;
    const int to = tour[(k + 1) % tour.size()] - 1;
    if (matrix.is_forbidden(from, to)) {
      edges.emplace_back(kForbiddenEdgePenalty, false);
    } else {
      const double w = matrix.at(from, to);
      edges.emplace_back(w, w != 0.0);
    }
  }

  double worst = -std::numeric_limits<double>::infinity();
  for (int r = 0; r < params.replications; ++r) {
    double length = 0.0;
    for (const auto& [w, noisy] : edges) {
      length += w;
      if (noisy && params.noise_high > 0.0) length += noise.Uniform(0.0, params.noise_high);
    }
    worst = std::max(worst, length);
  }
  return worst;
}

TspProblem::TspProblem(std::string id, DistanceMatrix matrix, TspNoise noise)
    : id_(std::move(id)), matrix_(std::move(matrix)), noise_(noise), box_(RouteBox(matrix_.n)) {}

double TspProblem::Evaluate(std::span<const int> x, Rng& noise) const {
  if (!box_.Contains(x)) throw std::out_of_range("TspProblem: point outside the box");
  return NoisyTspObjective(matrix_, x, noise, noise_);
}

std::unique_ptr<TspProblem> MakeBr17Problem(DistanceMatrix matrix, TspNoise noise) {
  if (matrix.n != 17) {
    throw std::invalid_argument(fmt::format("BR17 problem needs 17 cities, got {}", matrix.n));
  }
  return std::make_unique<TspProblem>("br17", std::move(matrix), noise);
}

}  // namespace idone
