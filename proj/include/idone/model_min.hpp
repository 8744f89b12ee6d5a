#pragma once

#include <vector>

#include <Eigen/Dense>

#include "idone/box.hpp"
#include "idone/surrogate.hpp"

namespace idone {

struct MinimizeOptions {
  // 0 selects the default of 20 * d iterations.
  int max_iters = 0;
  double grad_tol = 1e-8;
  // Armijo sufficient-decrease constant and backtracking factor.
  double armijo_c1 = 1e-4;
  double backtrack = 0.5;
  int max_backtracks = 40;
  // Steps shorter than this (infinity norm) count as a stall.
  double step_tol = 1e-10;
  // Hinges with |z| below this are treated as sitting on their kink when
  // checking one-sided directional derivatives.
  double kink_tol = 1e-9;
};

struct MinimizeResult {
  std::vector<int> x_star;     // rounded, clamped minimizer
  Eigen::VectorXd x_relaxed;   // continuous point before rounding
  double g_relaxed = 0.0;
  double g_rounded = 0.0;
  int iterations = 0;
  // True when the projected gradient vanished, or when descent stalled at a
  // kink where no coordinate or adjacent-diagonal direction decreases g.
  bool converged = false;
};

// Round half away from zero, then clamp into the box.
std::vector<int> RoundFeasible(const Eigen::Ref<const Eigen::VectorXd>& x, const Box& box);

// One-sided directional derivative g'(x; v), treating hinges within kink_tol
// of zero as kinks.
double DirectionalDerivative(const SurrogateModel& model, const Eigen::Ref<const Eigen::VectorXd>& x,
                             const Eigen::Ref<const Eigen::VectorXd>& v, double kink_tol);

// Relaxed bound-constrained quasi-Newton descent on the surrogate from
// `start`, followed by rounding. Deterministic in its inputs.
MinimizeResult MinimizeModel(const SurrogateModel& model, const Eigen::Ref<const Eigen::VectorXd>& start,
                             const MinimizeOptions& options = {});

}  // namespace idone
