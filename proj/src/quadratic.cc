#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "idone/problems.hpp"

namespace idone {

QuadraticInstance GenerateConvexBinary(int d, std::uint64_t seed) {
  if (d < 1) throw std::invalid_argument("GenerateConvexBinary: d must be >= 1");
  constexpr int kMaxAttempts = 16;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    Rng rng = Rng::Substream(seed, static_cast<std::uint64_t>(attempt));
    Eigen::MatrixXd u(d, d);
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) u(i, j) = rng.Uniform01();
    }
    QuadraticInstance instance;
    instance.a = (u + u.transpose()) / static_cast<double>(d) + Eigen::MatrixXd::Identity(d, d);
    instance.x_opt.resize(static_cast<std::size_t>(d));
    for (int& xi : instance.x_opt) xi = rng.Bernoulli(0.5) ? 1 : 0;
    instance.seed = seed;
    instance.attempts = attempt + 1;
    Eigen::LLT<Eigen::MatrixXd> llt(instance.a);
    if (llt.info() == Eigen::Success) return instance;
  }
  throw std::runtime_error("GenerateConvexBinary: no positive definite matrix after repeated attempts");
}

double ConvexBinaryObjective(const QuadraticInstance& instance, std::span<const int> x, Rng& noise,
                             bool noisy) {
  const Eigen::Index d = instance.a.rows();
  if (static_cast<Eigen::Index>(x.size()) != d) {
    throw std::invalid_argument("ConvexBinaryObjective: dimension mismatch");
  }
  Eigen::VectorXd diff(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    diff[i] = x[static_cast<std::size_t>(i)] - instance.x_opt[static_cast<std::size_t>(i)];
  }
  double f = diff.dot(instance.a.selfadjointView<Eigen::Lower>() * diff);
  if (noisy) f += noise.Uniform01();
  return f;
}

void WriteQuadraticInstance(std::ostream& os, const QuadraticInstance& instance) {
  const Eigen::Index d = instance.a.rows();
  fmt::print(os, "d,{}\nseed,{}\nx_opt", d, instance.seed);
  for (int xi : instance.x_opt) fmt::print(os, ",{}", xi);
  fmt::print(os, "\n");
  for (Eigen::Index i = 0; i < d; ++i) {
    fmt::print(os, "A");
    for (Eigen::Index j = 0; j < d; ++j) fmt::print(os, ",{}", instance.a(i, j));
    fmt::print(os, "\n");
  }
}

QuadraticInstance ReadQuadraticInstance(std::istream& is) {
  auto read_fields = [&is](std::string_view expected_key) {
    std::string line;
    if (!std::getline(is, line)) {
      throw std::runtime_error(fmt::format("quadratic instance: missing '{}' line", expected_key));
    }
    std::vector<std::string> fields;
    std::istringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.empty() || fields[0] != expected_key) {
      throw std::runtime_error(fmt::format("quadratic instance: expected '{}' line", expected_key));
    }
    fields.erase(fields.begin());
    return fields;
  };

  QuadraticInstance instance;
  const auto d_fields = read_fields("d");
  const auto seed_fields = read_fields("seed");
  if (d_fields.size() != 1 || seed_fields.size() != 1) {
    throw std::runtime_error("quadratic instance: malformed header");
  }
  const int d = std::stoi(d_fields[0]);
  if (d < 1) throw std::runtime_error("quadratic instance: d must be >= 1");
  instance.seed = std::stoull(seed_fields[0]);
  const auto x_fields = read_fields("x_opt");
  if (static_cast<int>(x_fields.size()) != d) throw std::runtime_error("quadratic instance: x_opt length");
  for (const auto& f : x_fields) instance.x_opt.push_back(std::stoi(f));
  instance.a.resize(d, d);
  for (int i = 0; i < d; ++i) {
    const auto row = read_fields("A");
    if (static_cast<int>(row.size()) != d) throw std::runtime_error("quadratic instance: A row length");
    for (int j = 0; j < d; ++j) instance.a(i, j) = std::stod(row[static_cast<std::size_t>(j)]);
  }
  return instance;
}

ConvexBinaryProblem::ConvexBinaryProblem(QuadraticInstance instance, bool noisy)
    : instance_(std::move(instance)),
      noisy_(noisy),
      box_(std::vector<int>(instance_.x_opt.size(), 0), std::vector<int>(instance_.x_opt.size(), 1)) {}

std::string ConvexBinaryProblem::id() const { return fmt::format("convex_binary_d{}", instance_.x_opt.size()); }

double ConvexBinaryProblem::Evaluate(std::span<const int> x, Rng& noise) const {
  if (!box_.Contains(x)) throw std::out_of_range("ConvexBinaryProblem: point outside the box");
  return ConvexBinaryObjective(instance_, x, noise, noisy_);
}

}  // namespace idone
