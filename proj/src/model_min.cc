#include "idone/model_min.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

namespace idone {

std::vector<int> RoundFeasible(const Eigen::Ref<const Eigen::VectorXd>& x, const Box& box) {
  if (x.size() != box.dimension()) {
    throw std::invalid_argument("RoundFeasible: dimension mismatch");
  }
  std::vector<int> out(static_cast<std::size_t>(x.size()));
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const int i_int = static_cast<int>(i);
    // std::round is half-away-from-zero.
    const double r = std::round(x[i]);
    const double clamped = std::clamp(r, static_cast<double>(box.lower(i_int)),
                                      static_cast<double>(box.upper(i_int)));
    out[static_cast<std::size_t>(i)] = static_cast<int>(clamped);
  }
  return out;
}

namespace {

double HingeSlope(double z, double wv, double kink_tol) {
  if (z > kink_tol) return wv;
  if (z >= -kink_tol) return std::max(0.0, wv);
  return 0.0;
}

// Sparse search direction with one or two unit entries.
struct SparseDirection {
  int i = 0;
  int si = 1;
  int j = -1;  // -1 when the direction is a single coordinate
  int sj = 0;

  double Dot(const BasisFunction& f) const {
    double dot = 0.0;
    for (const auto& term : {f.first, f.second}) {
      if (!term) continue;
      if (term->index == i) dot += term->sign * si;
      if (term->index == j) dot += term->sign * sj;
    }
    return dot;
  }

  Eigen::VectorXd Dense(int d) const {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(d);
    v[i] = si;
    if (j >= 0) v[j] = sj;
    return v;
  }
};

// Candidate directions used to certify (or escape) a kink: every coordinate
// direction, plus both diagonals of each adjacent pair for the advanced model.
// One-sided derivatives for all of them come out of a single O(D) pass.
class KinkProbe {
 public:
  explicit KinkProbe(const SurrogateModel& model) : model_(model) {
    const int d = model.dimension();
    by_dim_.resize(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) {
      for (int s : {+1, -1}) Add(SparseDirection{i, s, -1, 0});
    }
    if (model.variant() == ModelVariant::kAdvanced) {
      for (int i = 1; i < d; ++i) {
        for (int s : {+1, -1}) {
          Add(SparseDirection{i, s, i - 1, -s});
          Add(SparseDirection{i, s, i - 1, s});
        }
      }
    }
    slopes_.resize(dirs_.size());
  }

  // Returns the feasible candidate with the most negative one-sided
  // derivative, or nullptr when none is below -threshold.
  const SparseDirection* SteepestFeasible(const Eigen::VectorXd& x, double kink_tol, double threshold,
                                          double* slope_out) {
    std::fill(slopes_.begin(), slopes_.end(), 0.0);
    const Eigen::VectorXd& c = model_.weights();
    const auto& basis = model_.basis();
    for (std::size_t k = 0; k < basis.size(); ++k) {
      const BasisFunction& f = basis[k];
      if (!f.first || c[static_cast<Eigen::Index>(k)] == 0.0) continue;
      const double z = f.Affine(x.data());
      if (z < -kink_tol) continue;
      Visit(f.first->index, f, z, c[static_cast<Eigen::Index>(k)], kink_tol);
      if (f.second) Visit(f.second->index, f, z, c[static_cast<Eigen::Index>(k)], kink_tol, f.first->index);
    }
    const Box& box = model_.box();
    const SparseDirection* best = nullptr;
    double best_slope = -threshold;
    for (std::size_t n = 0; n < dirs_.size(); ++n) {
      const SparseDirection& v = dirs_[n];
      if (!Feasible(v.i, v.si, x, box) || (v.j >= 0 && !Feasible(v.j, v.sj, x, box))) continue;
      if (slopes_[n] < best_slope) {
        best_slope = slopes_[n];
        best = &v;
      }
    }
    *slope_out = best_slope;
    return best;
  }

 private:
  void Add(SparseDirection v) {
    by_dim_[static_cast<std::size_t>(v.i)].push_back(dirs_.size());
    if (v.j >= 0) by_dim_[static_cast<std::size_t>(v.j)].push_back(dirs_.size());
    dirs_.push_back(v);
  }

  // Accumulate hinge f into every candidate touching `dim`. Candidates that
  // also touch `skip` were already handled from that index.
  void Visit(int dim, const BasisFunction& f, double z, double weight, double kink_tol, int skip = -1) {
    for (std::size_t n : by_dim_[static_cast<std::size_t>(dim)]) {
      const SparseDirection& v = dirs_[n];
      if (skip >= 0 && (v.i == skip || v.j == skip)) continue;
      const double wv = v.Dot(f);
      if (wv != 0.0) slopes_[n] += weight * HingeSlope(z, wv, kink_tol);
    }
  }

  static bool Feasible(int i, int sign, const Eigen::VectorXd& x, const Box& box) {
    return sign > 0 ? x[i] < box.upper(i) : x[i] > box.lower(i);
  }

  const SurrogateModel& model_;
  std::vector<SparseDirection> dirs_;
  std::vector<std::vector<std::size_t>> by_dim_;
  std::vector<double> slopes_;
};

class ProjectedQuasiNewton {
 public:
  ProjectedQuasiNewton(const SurrogateModel& model, const MinimizeOptions& options)
      : model_(model), opt_(options), probe_(model) {
    const Box& box = model.box();
    const int d = model.dimension();
    lower_.resize(d);
    upper_.resize(d);
    double widest = 0.0;
    for (int i = 0; i < d; ++i) {
      lower_[i] = box.lower(i);
      upper_[i] = box.upper(i);
      widest = std::max(widest, upper_[i] - lower_[i]);
    }
    widest_ = widest;
  }

  MinimizeResult Run(const Eigen::VectorXd& start) {
    const int d = model_.dimension();
    const int max_iters = opt_.max_iters > 0 ? opt_.max_iters : 20 * d;

    MinimizeResult result;
    x_ = start;
    f_ = CheckedEvaluate(x_);
    grad_ = model_.Gradient(x_);
    h_ = Eigen::MatrixXd::Identity(d, d);
    h_identity_ = true;

    int it = 0;
    for (; it < max_iters; ++it) {
      const Eigen::VectorXd pg = ProjectedGradient();
      if (pg.norm() < opt_.grad_tol) {
        result.converged = true;
        break;
      }
      if (!QuasiNewtonStep(pg)) {
        // No progress along the smooth model of g: we are at (or extremely
        // near) a kink. Either certify it or step off along a sparse
        // direction with a negative one-sided slope.
        double slope = 0.0;
        const SparseDirection* v = probe_.SteepestFeasible(x_, opt_.kink_tol, opt_.grad_tol, &slope);
        if (v == nullptr) {
          result.converged = true;
          break;
        }
        if (!SparseStep(v->Dense(d), slope)) break;
      }
    }

    result.iterations = it;
    result.x_relaxed = x_;
    result.g_relaxed = f_;
    result.x_star = RoundFeasible(x_, model_.box());
    Eigen::VectorXd rounded(d);
    for (int i = 0; i < d; ++i) rounded[i] = result.x_star[static_cast<std::size_t>(i)];
    result.g_rounded = CheckedEvaluate(rounded);
    return result;
  }

 private:
  double CheckedEvaluate(const Eigen::VectorXd& x) const {
    const double g = model_.Evaluate(x);
    if (!std::isfinite(g)) {
      throw std::runtime_error("surrogate evaluated to a non-finite value; weights are corrupted");
    }
    return g;
  }

  Eigen::VectorXd Project(const Eigen::VectorXd& x) const { return x.cwiseMax(lower_).cwiseMin(upper_); }

  Eigen::VectorXd ProjectedGradient() const {
    Eigen::VectorXd pg = grad_;
    for (Eigen::Index i = 0; i < pg.size(); ++i) {
      if ((x_[i] <= lower_[i] && pg[i] > 0.0) || (x_[i] >= upper_[i] && pg[i] < 0.0)) pg[i] = 0.0;
    }
    return pg;
  }

  // Backtracking along the projected path x(a) = P(x + a*dir). `slope` is the
  // directional derivative used in the sufficient-decrease test; when it is
  // NaN the gradient is used on the actual projected displacement.
  bool LineSearch(const Eigen::VectorXd& dir, double initial_step, double slope, Eigen::VectorXd* x_new,
                  double* f_new) const {
    double step = initial_step;
    for (int m = 0; m < opt_.max_backtracks; ++m, step *= opt_.backtrack) {
      Eigen::VectorXd trial = Project(x_ + step * dir);
      const Eigen::VectorXd dx = trial - x_;
      if (dx.lpNorm<Eigen::Infinity>() < opt_.step_tol) return false;
      const double predicted = std::isnan(slope) ? grad_.dot(dx) : slope * step;
      if (!(predicted < 0.0)) continue;
      const double ft = CheckedEvaluate(trial);
      if (ft <= f_ + opt_.armijo_c1 * predicted) {
        *x_new = std::move(trial);
        *f_new = ft;
        return true;
      }
    }
    return false;
  }

  bool QuasiNewtonStep(const Eigen::VectorXd& pg) {
    for (int attempt = 0; attempt < 2; ++attempt) {
      Eigen::VectorXd dir = -(h_ * pg);
      for (Eigen::Index i = 0; i < dir.size(); ++i) {
        if (pg[i] == 0.0) dir[i] = 0.0;  // variable pinned at a bound
      }
      if (!(pg.dot(dir) < 0.0)) {
        ResetHessian();
        dir = -pg;
      }
      const double initial =
          h_identity_ ? std::max(1.0, widest_ / std::max(dir.lpNorm<Eigen::Infinity>(), 1e-300)) : 1.0;
      Eigen::VectorXd x_new;
      double f_new = 0.0;
      if (LineSearch(dir, initial, std::numeric_limits<double>::quiet_NaN(), &x_new, &f_new)) {
        Accept(std::move(x_new), f_new, /*bfgs=*/true);
        return true;
      }
      if (h_identity_) return false;
      ResetHessian();
    }
    return false;
  }

  bool SparseStep(const Eigen::VectorXd& v, double slope) {
    Eigen::VectorXd x_new;
    double f_new = 0.0;
    if (!LineSearch(v, widest_, slope, &x_new, &f_new)) return false;
    Accept(std::move(x_new), f_new, /*bfgs=*/false);
    ResetHessian();
    return true;
  }

  void Accept(Eigen::VectorXd x_new, double f_new, bool bfgs) {
    Eigen::VectorXd g_new = model_.Gradient(x_new);
    if (bfgs) {
      const Eigen::VectorXd s = x_new - x_;
      const Eigen::VectorXd y = g_new - grad_;
      const double sy = s.dot(y);
      // Curvature condition; inside one linear piece y = 0 and H is kept.
      if (sy > 1e-12 * s.norm() * y.norm() && sy > 0.0) {
        const double rho = 1.0 / sy;
        const Eigen::VectorXd hy = h_ * y;
        const double yhy = y.dot(hy);
        h_.noalias() -= rho * (hy * s.transpose() + s * hy.transpose());
        h_.noalias() += (rho * rho * yhy + rho) * (s * s.transpose());
        h_identity_ = false;
      }
    }
    x_ = std::move(x_new);
    f_ = f_new;
    grad_ = std::move(g_new);
  }

  void ResetHessian() {
    if (!h_identity_) {
      h_.setIdentity();
      h_identity_ = true;
    }
  }

  const SurrogateModel& model_;
  const MinimizeOptions& opt_;
  KinkProbe probe_;
  Eigen::VectorXd lower_, upper_;
  double widest_ = 1.0;

  Eigen::VectorXd x_;
  double f_ = 0.0;
  Eigen::VectorXd grad_;
  Eigen::MatrixXd h_;  // inverse Hessian approximation
  bool h_identity_ = true;
};

}  // namespace

double DirectionalDerivative(const SurrogateModel& model, const Eigen::Ref<const Eigen::VectorXd>& x,
                             const Eigen::Ref<const Eigen::VectorXd>& v, double kink_tol) {
  const int d = model.dimension();
  if (x.size() != d || v.size() != d) {
    throw std::invalid_argument("DirectionalDerivative: dimension mismatch");
  }
  double slope = 0.0;
  const auto& basis = model.basis();
  for (std::size_t k = 0; k < basis.size(); ++k) {
    const BasisFunction& f = basis[k];
    if (!f.first) continue;
    const double wv = f.Affine(v.data()) - f.offset;
    slope += model.weights()[static_cast<Eigen::Index>(k)] * HingeSlope(f.Affine(x.data()), wv, kink_tol);
  }
  return slope;
}

MinimizeResult MinimizeModel(const SurrogateModel& model, const Eigen::Ref<const Eigen::VectorXd>& start,
                             const MinimizeOptions& options) {
  if (start.size() != model.dimension()) {
    throw std::invalid_argument(fmt::format("MinimizeModel: start has dimension {} but model has {}",
                                            start.size(), model.dimension()));
  }
  const Eigen::VectorXd x0 = start;
  if (!model.box().Contains(std::span<const double>(x0.data(), static_cast<std::size_t>(x0.size())))) {
    throw std::invalid_argument("MinimizeModel: start lies outside the box");
  }
  if (!model.weights().allFinite()) {
    throw std::runtime_error("MinimizeModel: model weights are not finite");
  }
  ProjectedQuasiNewton solver(model, options);
  return solver.Run(x0);
}

}  // namespace idone
