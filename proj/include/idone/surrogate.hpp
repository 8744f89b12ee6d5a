#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "idone/box.hpp"

namespace idone {

enum class ModelVariant { kBasic, kAdvanced };

std::string_view ToString(ModelVariant variant);
ModelVariant ParseModelVariant(std::string_view name);

struct SignedIndex {
  int index = 0;
  int sign = 1;  // +1 or -1

  friend bool operator==(const SignedIndex&, const SignedIndex&) = default;
};

// One ReLU term max(0, w^T x + b). The direction w has at most two nonzero
// entries, each +1 or -1, so it is stored as sparse signed indices.
struct BasisFunction {
  std::optional<SignedIndex> first;
  std::optional<SignedIndex> second;
  int offset = 0;

  static BasisFunction Bias() { return BasisFunction{std::nullopt, std::nullopt, 1}; }

  bool IsBias() const { return !first && !second && offset == 1; }

  // z(x) = w^T x + b
  double Affine(const double* x) const {
    double z = offset;
    if (first) z += first->sign * x[first->index];
    if (second) z += second->sign * x[second->index];
    return z;
  }

  // Dense w of length d, mainly for tests and diagnostics.
  Eigen::VectorXd Direction(int d) const;

  friend bool operator==(const BasisFunction&, const BasisFunction&) = default;
};

// Bias, then one or two axis-aligned hinges per integer level of every
// dimension; zero-sets form the integer grid of the box.
std::vector<BasisFunction> BuildBasicBasis(const Box& box);

// Basic basis plus hinges on the diagonals x_i - x_{i-1} = j for adjacent
// dimension pairs.
std::vector<BasisFunction> BuildAdvancedBasis(const Box& box);

std::vector<BasisFunction> BuildBasis(ModelVariant variant, const Box& box);

// Closed-form basis size: 1 + 2*sum(u_i - l_i) for the basic model, plus
// 2*sum_{i>=2}(u_i - l_i + u_{i-1} - l_{i-1}) for the advanced model.
std::size_t ExpectedBasisCount(ModelVariant variant, const Box& box);

// c0 = [0, 1, ..., 1]: zero bias, unit weight on every hinge (convex start).
Eigen::VectorXd DefaultInitialWeights(std::size_t num_basis);

// Piecewise-linear surrogate g(x) = sum_k c_k max(0, z_k(x)) over fixed hinges.
// Everything except the weight vector is immutable after construction.
class SurrogateModel {
 public:
  SurrogateModel(ModelVariant variant, Box box);

  ModelVariant variant() const { return variant_; }
  const Box& box() const { return box_; }
  int dimension() const { return box_.dimension(); }
  std::size_t num_basis() const { return basis_.size(); }
  const std::vector<BasisFunction>& basis() const { return basis_; }

  const Eigen::VectorXd& weights() const { return weights_; }
  void set_weights(const Eigen::VectorXd& weights);

  double Evaluate(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  // ReLU derivative is taken as 0.5 at exactly z = 0.
  Eigen::VectorXd Gradient(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  // a_k = max(0, z_k(x)); the regression row for a measurement at x.
  void Activations(const Eigen::Ref<const Eigen::VectorXd>& x, Eigen::VectorXd& out) const;
  Eigen::VectorXd Activations(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  // One line per basis function: k,i1,s1,i2,s2,b,c_k. Missing terms are
  // written as index -1 with sign 0.
  void DumpCsv(std::ostream& os) const;

 private:
  void CheckDimension(Eigen::Index size) const;

  ModelVariant variant_;
  Box box_;
  std::vector<BasisFunction> basis_;
  Eigen::VectorXd weights_;
};

}  // namespace idone
