#include "idone/surrogate.hpp"

#include <ostream>
#include <stdexcept>
#include <string>

#include <fmt/format.h>
#include <fmt/ostream.h>

namespace idone {

std::string_view ToString(ModelVariant variant) {
  switch (variant) {
    case ModelVariant::kBasic:
      return "basic";
    case ModelVariant::kAdvanced:
      return "advanced";
  }
  return "unknown";
}

ModelVariant ParseModelVariant(std::string_view name) {
  if (name == "basic") return ModelVariant::kBasic;
  if (name == "advanced") return ModelVariant::kAdvanced;
  throw std::invalid_argument(fmt::format("unknown model variant '{}'", name));
}

Eigen::VectorXd BasisFunction::Direction(int d) const {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
  if (first) w[first->index] += first->sign;
  if (second) w[second->index] += second->sign;
  return w;
}

namespace {

// Shared emission rule of both model builders: for each integer level j in
// [lo, hi], the hinge (+w, -j) except at hi, and the hinge (-w, +j) except
// at lo. The interior emits both, in that order.
template <typename MakeTerm>
void EmitLevels(int lo, int hi, MakeTerm make, std::vector<BasisFunction>& out) {
  for (int j = lo; j <= hi; ++j) {
    if (j != hi) out.push_back(make(+1, -j));
    if (j != lo) out.push_back(make(-1, +j));
  }
}

}  // namespace

std::vector<BasisFunction> BuildBasicBasis(const Box& box) {
  std::vector<BasisFunction> basis;
  basis.reserve(ExpectedBasisCount(ModelVariant::kBasic, box));
  basis.push_back(BasisFunction::Bias());
  for (int i = 0; i < box.dimension(); ++i) {
    EmitLevels(
        box.lower(i), box.upper(i),
        [i](int sign, int offset) {
          return BasisFunction{SignedIndex{i, sign}, std::nullopt, offset};
        },
        basis);
  }
  return basis;
}

std::vector<BasisFunction> BuildAdvancedBasis(const Box& box) {
  std::vector<BasisFunction> basis = BuildBasicBasis(box);
  basis.reserve(ExpectedBasisCount(ModelVariant::kAdvanced, box));
  for (int i = 1; i < box.dimension(); ++i) {
    EmitLevels(
        box.lower(i) - box.upper(i - 1), box.upper(i) - box.lower(i - 1),
        [i](int sign, int offset) {
          return BasisFunction{SignedIndex{i, sign}, SignedIndex{i - 1, -sign}, offset};
        },
        basis);
  }
  return basis;
}

std::vector<BasisFunction> BuildBasis(ModelVariant variant, const Box& box) {
  return variant == ModelVariant::kBasic ? BuildBasicBasis(box) : BuildAdvancedBasis(box);
}

std::size_t ExpectedBasisCount(ModelVariant variant, const Box& box) {
  std::size_t count = 1;
  for (int i = 0; i < box.dimension(); ++i) {
    count += 2 * static_cast<std::size_t>(box.upper(i) - box.lower(i));
  }
  if (variant == ModelVariant::kAdvanced) {
    for (int i = 1; i < box.dimension(); ++i) {
      count += 2 * static_cast<std::size_t>(box.upper(i) - box.lower(i) + box.upper(i - 1) -
                                            box.lower(i - 1));
    }
  }
  return count;
}

Eigen::VectorXd DefaultInitialWeights(std::size_t num_basis) {
  if (num_basis == 0) {
    throw std::invalid_argument("initial weights need at least one basis function");
  }
  Eigen::VectorXd c0 = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(num_basis));
  c0[0] = 0.0;
  return c0;
}

SurrogateModel::SurrogateModel(ModelVariant variant, Box box)
    : variant_(variant), box_(std::move(box)), basis_(BuildBasis(variant_, box_)) {
  weights_ = DefaultInitialWeights(basis_.size());
}

void SurrogateModel::set_weights(const Eigen::VectorXd& weights) {
  if (weights.size() != static_cast<Eigen::Index>(basis_.size())) {
    throw std::invalid_argument(fmt::format("weights have length {} but the model has {} basis functions",
                                            weights.size(), basis_.size()));
  }
  weights_ = weights;
}

void SurrogateModel::CheckDimension(Eigen::Index size) const {
  if (size != dimension()) {
    throw std::invalid_argument(
        fmt::format("point has dimension {} but the model has dimension {}", size, dimension()));
  }
}

double SurrogateModel::Evaluate(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  CheckDimension(x.size());
  const double* px = x.data();
  double g = 0.0;
  for (std::size_t k = 0; k < basis_.size(); ++k) {
    const double z = basis_[k].Affine(px);
    if (z > 0.0) g += weights_[static_cast<Eigen::Index>(k)] * z;
  }
  return g;
}

Eigen::VectorXd SurrogateModel::Gradient(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  CheckDimension(x.size());
  const double* px = x.data();
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(dimension());
  for (std::size_t k = 0; k < basis_.size(); ++k) {
    const BasisFunction& f = basis_[k];
    if (!f.first) continue;  // bias has no slope
    const double z = f.Affine(px);
    double slope;
    if (z > 0.0) {
      slope = 1.0;
    } else if (z == 0.0) {
      slope = 0.5;
    } else {
      continue;
    }
    const double scale = slope * weights_[static_cast<Eigen::Index>(k)];
    grad[f.first->index] += scale * f.first->sign;
    if (f.second) grad[f.second->index] += scale * f.second->sign;
  }
  return grad;
}

void SurrogateModel::Activations(const Eigen::Ref<const Eigen::VectorXd>& x,
                                 Eigen::VectorXd& out) const {
  CheckDimension(x.size());
  out.resize(static_cast<Eigen::Index>(basis_.size()));
  const double* px = x.data();
  for (std::size_t k = 0; k < basis_.size(); ++k) {
    const double z = basis_[k].Affine(px);
    out[static_cast<Eigen::Index>(k)] = z > 0.0 ? z : 0.0;
  }
}

Eigen::VectorXd SurrogateModel::Activations(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  Eigen::VectorXd out;
  Activations(x, out);
  return out;
}

void SurrogateModel::DumpCsv(std::ostream& os) const {
  fmt::print(os, "k,i1,s1,i2,s2,b,c_k\n");
  for (std::size_t k = 0; k < basis_.size(); ++k) {
    const BasisFunction& f = basis_[k];
    const SignedIndex none{-1, 0};
    const SignedIndex a = f.first.value_or(none);
    const SignedIndex b = f.second.value_or(none);
    fmt::print(os, "{},{},{},{},{},{},{}\n", k, a.index, a.sign, b.index, b.sign, f.offset,
               weights_[static_cast<Eigen::Index>(k)]);
  }
}

}  // namespace idone
