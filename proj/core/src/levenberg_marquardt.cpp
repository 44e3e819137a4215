#include "csd/levenberg_marquardt.hpp"

#include <algorithm>
#include <cmath>

namespace csd {

namespace {

void numeric_jacobian(const ResidualFn& fn, const Eigen::VectorXd& x, int m, double rel_step,
                      Eigen::MatrixXd& jac) {
  jac.resize(m, x.size());
  Eigen::VectorXd xp = x;
  Eigen::VectorXd rp(m), rm(m);
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double h = rel_step * std::max(std::abs(x[j]), 1.0);
    xp[j] = x[j] + h;
    fn(xp, rp);
    xp[j] = x[j] - h;
    fn(xp, rm);
    xp[j] = x[j];
    jac.col(j) = (rp - rm) / (2.0 * h);
  }
}

bool gradient_small(const Eigen::MatrixXd& jac, const Eigen::VectorXd& r, double tol) {
  const double g = (jac.transpose() * r).lpNorm<Eigen::Infinity>();
  const double scale = jac.norm() * r.norm();
  return g <= tol * scale || g == 0.0;
}

// Residuals at rounding level of the model output count as an exact fit.
bool residual_negligible(const Eigen::MatrixXd& jac, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& r) {
  return r.norm() <= 1e-9 * jac.norm() * std::max(x.norm(), 1.0);
}

}  // namespace

LmResult levenberg_marquardt(const ResidualFn& fn, const Eigen::VectorXd& x0, int num_residuals,
                             const LmOptions& options) {
  const int m = num_residuals;
  const auto n = x0.size();

  LmResult out;
  out.params = x0;
  out.residuals.resize(m);
  fn(out.params, out.residuals);
  out.rss = out.residuals.squaredNorm();
  if (!std::isfinite(out.rss)) return out;

  Eigen::VectorXd trial_r(m);
  double lambda = options.initial_damping;
  bool step_converged = false;

  for (out.iterations = 0; out.iterations < options.max_iterations; ++out.iterations) {
    numeric_jacobian(fn, out.params, m, options.fd_relative_step, out.jacobian);
    const Eigen::MatrixXd jtj = out.jacobian.transpose() * out.jacobian;
    const Eigen::VectorXd jtr = out.jacobian.transpose() * out.residuals;
    if (out.rss == 0.0 || gradient_small(out.jacobian, out.residuals, options.gradient_tolerance)) {
      step_converged = true;
      break;
    }

    bool accepted = false;
    for (int attempt = 0; attempt < 60; ++attempt) {
      Eigen::MatrixXd lhs = jtj;
      for (Eigen::Index j = 0; j < n; ++j) lhs(j, j) += lambda * std::max(jtj(j, j), 1e-300);
      const Eigen::VectorXd step = lhs.ldlt().solve(-jtr);
      const Eigen::VectorXd trial = out.params + step;
      fn(trial, trial_r);
      const double trial_rss = trial_r.squaredNorm();
      if (std::isfinite(trial_rss) && trial_rss < out.rss) {
        const double rel = step.norm() / (out.params.norm() + options.step_tolerance);
        out.params = trial;
        out.residuals = trial_r;
        out.rss = trial_rss;
        lambda = std::max(lambda / 10.0, 1e-15);
        accepted = true;
        if (rel <= options.step_tolerance) step_converged = true;
        break;
      }
      lambda *= 10.0;
      if (step.norm() <= options.step_tolerance * (out.params.norm() + options.step_tolerance)) {
        // The damped step no longer moves the parameters: a local minimum to
        // working precision.
        step_converged = true;
        break;
      }
    }
    if (step_converged || !accepted) break;
  }

  numeric_jacobian(fn, out.params, m, options.fd_relative_step, out.jacobian);
  // Report convergence only at a stationary point.
  out.converged = step_converged && (out.rss == 0.0 ||
                                     residual_negligible(out.jacobian, out.params, out.residuals) ||
                                     gradient_small(out.jacobian, out.residuals, 1e-6));
  return out;
}

}  // namespace csd
