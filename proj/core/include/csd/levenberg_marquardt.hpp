#pragma once

// Small dense Levenberg-Marquardt solver for the fitters and field inference.
// Problems here have 1-3 parameters and up to a few hundred residuals.

#include <Eigen/Dense>
#include <functional>

namespace csd {

struct LmOptions {
  int max_iterations = 200;
  double step_tolerance = 1e-10;      // relative parameter step
  double gradient_tolerance = 1e-10;  // |J^T r|_inf relative to |J| |r|
  double initial_damping = 1e-3;
  // Central finite-difference step, relative to max(|x_j|, 1).
  double fd_relative_step = 1e-6;
};

struct LmResult {
  Eigen::VectorXd params;
  Eigen::VectorXd residuals;
  Eigen::MatrixXd jacobian;
  double rss = 0.0;
  int iterations = 0;
  bool converged = false;
};

using ResidualFn = std::function<void(const Eigen::VectorXd& params, Eigen::VectorXd& residuals)>;

// Minimizes |r(x)|^2 from x0 with Marquardt's diagonal scaling; each accepted
// step strictly lowers the residual sum of squares. num_residuals fixes the
// size of the residual vector passed to `fn`.
LmResult levenberg_marquardt(const ResidualFn& fn, const Eigen::VectorXd& x0, int num_residuals,
                             const LmOptions& options = {});

}  // namespace csd
