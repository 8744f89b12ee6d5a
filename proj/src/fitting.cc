#include "idone/fitting.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace idone {

RlsState::RlsState(Eigen::VectorXd c0, double lambda) : c_(std::move(c0)), lambda_(lambda) {
  if (!(lambda_ > 0.0) || !std::isfinite(lambda_)) {
    throw std::invalid_argument(fmt::format("RLS: lambda must be positive and finite, got {}", lambda_));
  }
  if (c_.size() == 0) {
    throw std::invalid_argument("RLS: weight vector must be non-empty");
  }
  if (!c_.allFinite()) {
    throw std::invalid_argument("RLS: initial weights must be finite");
  }
  p_ = Eigen::MatrixXd::Identity(c_.size(), c_.size()) / lambda_;
  pa_.resize(c_.size());
}

void RlsState::Update(const Eigen::Ref<const Eigen::VectorXd>& a, double y) {
  if (a.size() != c_.size()) {
    throw std::invalid_argument(
        fmt::format("RLS: activation row has length {} but state has {}", a.size(), c_.size()));
  }
  if (!std::isfinite(y) || !a.allFinite()) {
    throw std::invalid_argument("RLS: non-finite measurement or activation");
  }

  pa_.noalias() = p_.selfadjointView<Eigen::Lower>() * a;
  const double denom = 1.0 + a.dot(pa_);
  const double innovation = y - a.dot(c_);
  // gain k = P a / denom; c += k * innovation; P -= k (P a)^T
  c_.noalias() += (innovation / denom) * pa_;
  p_.selfadjointView<Eigen::Lower>().rankUpdate(pa_, -1.0 / denom);
  // Only the lower triangle is maintained; mirror it so P is exactly symmetric.
  p_.triangularView<Eigen::StrictlyUpper>() = p_.transpose();
  ++n_;
}

Eigen::VectorXd BatchSolve(const std::vector<Measurement>& pairs, const Eigen::VectorXd& c0,
                           double lambda) {
  if (pairs.empty()) {
    throw std::invalid_argument("batch solve needs at least one measurement");
  }
  if (!(lambda > 0.0)) {
    throw std::invalid_argument("batch solve needs lambda > 0");
  }
  const Eigen::Index dim = c0.size();
  Eigen::MatrixXd gram = lambda * Eigen::MatrixXd::Identity(dim, dim);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dim);
  for (const Measurement& m : pairs) {
    if (m.activations.size() != dim) {
      throw std::invalid_argument("batch solve: inconsistent activation length");
    }
    gram.noalias() += m.activations * m.activations.transpose();
    rhs.noalias() += m.activations * (m.y - m.activations.dot(c0));
  }
  // (A^T A + lambda I)(c - c0) = A^T (y - A c0)
  Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  if (ldlt.info() != Eigen::Success) {
    throw std::runtime_error("batch solve: factorization failed");
  }
  return c0 + ldlt.solve(rhs);
}

}  // namespace idone
