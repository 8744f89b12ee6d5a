#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace idone {

// Default regularization weight.
inline constexpr double kDefaultLambda = 0.001;

// Recursive least squares for
//   min_c  sum_n (y_n - a_n^T c)^2 + lambda * ||c - c0||^2
// with constant O(D^2) cost per measurement. Starting from P = I / lambda
// makes every intermediate c equal the batch minimizer over the data seen so
// far.
class RlsState {
 public:
  RlsState(Eigen::VectorXd c0, double lambda);

  const Eigen::VectorXd& weights() const { return c_; }
  const Eigen::MatrixXd& covariance() const { return p_; }
  double lambda() const { return lambda_; }
  std::int64_t num_updates() const { return n_; }
  Eigen::Index size() const { return c_.size(); }

  // One measurement y at activation row a. Throws on size mismatch or
  // non-finite input; the state is untouched in that case.
  void Update(const Eigen::Ref<const Eigen::VectorXd>& a, double y);

 private:
  Eigen::VectorXd c_;
  Eigen::MatrixXd p_;
  double lambda_;
  std::int64_t n_ = 0;

  // scratch, reused across updates
  Eigen::VectorXd pa_;
};

struct Measurement {
  Eigen::VectorXd activations;
  double y = 0.0;
};

// Direct regularized normal-equations solve of the same objective. Reference
// only; the optimizer loop never calls this.
Eigen::VectorXd BatchSolve(const std::vector<Measurement>& pairs, const Eigen::VectorXd& c0,
                           double lambda);

}  // namespace idone
