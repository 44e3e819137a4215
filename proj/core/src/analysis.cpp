#include "csd/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "csd/errors.hpp"
#include "csd/levenberg_marquardt.hpp"
#include "csd/optics.hpp"

namespace csd {

namespace {

std::size_t index_of(const FitResult& fit, std::string_view name) {
  const auto it = std::find(fit.names.begin(), fit.names.end(), name);
  if (it == fit.names.end()) throw DomainError("no fit parameter named " + std::string(name));
  return static_cast<std::size_t>(it - fit.names.begin());
}

Eigen::MatrixXd covariance(const LmResult& fit, int num_points) {
  const auto p = fit.params.size();
  const double dof = std::max<double>(static_cast<double>(num_points - p), 1.0);
  const Eigen::MatrixXd jtj = fit.jacobian.transpose() * fit.jacobian;
  const Eigen::MatrixXd inv = jtj.completeOrthogonalDecomposition().pseudoInverse();
  return (fit.rss / dof) * inv;
}

double safe_sqrt(double v) { return std::sqrt(std::max(v, 0.0)); }

// For fixed gamma the model is linear in (plateau, amplitude); returns the
// least-squares pair and the resulting residual sum of squares.
struct LinearPart {
  double plateau;
  double amplitude;
  double rss;
};

LinearPart solve_linear(std::span<const DataPoint> trace, double gamma) {
  double s1 = 0, se = 0, see = 0, sy = 0, sey = 0;
  const double t0 = trace.front().x;
  for (const auto& p : trace) {
    const double e = std::exp(-gamma * (p.x - t0));
    s1 += 1;
    se += e;
    see += e * e;
    sy += p.y;
    sey += e * p.y;
  }
  const double det = s1 * see - se * se;
  if (!(std::abs(det) > 1e-14 * s1 * see)) return {0, 0, std::numeric_limits<double>::infinity()};
  const double a = (see * sy - se * sey) / det;
  double b = (s1 * sey - se * sy) / det;
  b *= std::exp(gamma * t0);  // back to amplitude at t = 0
  double rss = 0;
  for (const auto& p : trace) {
    const double r = a + b * std::exp(-gamma * p.x) - p.y;
    rss += r * r;
  }
  return {a, b, rss};
}

}  // namespace

double FitResult::value(std::string_view name) const { return values[index_of(*this, name)]; }

double FitResult::std_error(std::string_view name) const {
  return std_errors[index_of(*this, name)];
}

FitResult fit_charge_decay(std::span<const DataPoint> trace) {
  if (trace.size() < 4) throw DomainError("charge-decay fit needs at least 4 points");
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (!std::isfinite(trace[i].x) || !std::isfinite(trace[i].y)) {
      throw DomainError("charge trace contains non-finite values");
    }
    if (i > 0 && !(trace[i].x > trace[i - 1].x)) {
      throw DomainError("charge-trace times must be strictly increasing");
    }
  }
  const auto [lo, hi] = std::minmax_element(trace.begin(), trace.end(),
                                            [](const DataPoint& a, const DataPoint& b) { return a.y < b.y; });
  const double spread = hi->y - lo->y;
  const double level = std::max(std::abs(hi->y), std::abs(lo->y));
  if (!(spread > 1e-12 * level) || spread == 0.0) throw NumericalError("degenerate trace");

  const double span = trace.back().x - trace.front().x;
  const double first = trace.front().y;
  const double last = trace.back().y;

  // Candidate rates: a log grid over the sampled window plus the slope of the
  // log-linearized middle section relative to the last point.
  std::vector<double> candidates;
  for (int k = 0; k <= 120; ++k) candidates.push_back(std::pow(10.0, -2.0 + k * 0.04) / span);
  {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    const std::size_t a = trace.size() / 4;
    const std::size_t b = std::max(a + 2, 3 * trace.size() / 4);
    for (std::size_t i = a; i < b && i < trace.size(); ++i) {
      const double d = (trace[i].y - last) / (first - last);
      if (d > 1e-6) {
        const double ly = std::log(d);
        sx += trace[i].x;
        sy += ly;
        sxx += trace[i].x * trace[i].x;
        sxy += trace[i].x * ly;
        ++n;
      }
    }
    const double den = n * sxx - sx * sx;
    if (n >= 2 && den > 0) {
      const double slope = (n * sxy - sx * sy) / den;
      if (slope < 0 && std::isfinite(slope)) candidates.push_back(-slope);
    }
  }

  double best_gamma = candidates.front();
  double best_rss = std::numeric_limits<double>::infinity();
  for (const double g : candidates) {
    const auto lin = solve_linear(trace, g);
    if (lin.rss < best_rss) {
      best_rss = lin.rss;
      best_gamma = g;
    }
  }

  // Multi-start the full three-parameter problem around the best rate.
  const int m = static_cast<int>(trace.size());
  auto residual = [&](const Eigen::VectorXd& x, Eigen::VectorXd& r) {
    const double gamma = std::exp(x[2]);
    for (int i = 0; i < m; ++i) {
      r[i] = x[0] + x[1] * std::exp(-gamma * trace[i].x) - trace[i].y;
    }
  };
  // Scale-free parameters keep the finite-difference steps meaningful for any
  // signal units.
  const double scale = std::max(spread, level * 1e-12);
  const double offset = lo->y;
  auto scaled = [&](const Eigen::VectorXd& x, Eigen::VectorXd& r) {
    Eigen::VectorXd y(3);
    y << offset + scale * x[0], scale * x[1], x[2];
    residual(y, r);
    r /= scale;
  };

  LmResult best;
  best.rss = std::numeric_limits<double>::infinity();
  for (const double f : {1.0, 0.3, 3.0}) {
    const double g = best_gamma * f;
    const auto lin = solve_linear(trace, g);
    if (!std::isfinite(lin.rss)) continue;
    Eigen::VectorXd x0(3);
    x0 << (lin.plateau - offset) / scale, lin.amplitude / scale, std::log(g);
    LmResult fit = levenberg_marquardt(scaled, x0, m);
    if (fit.rss < best.rss) best = std::move(fit);
  }
  if (!std::isfinite(best.rss)) throw NumericalError("charge-decay fit failed");

  const double gamma = std::exp(best.params[2]);
  const double plateau = offset + scale * best.params[0];
  const double amplitude = scale * best.params[1];
  const Eigen::MatrixXd cov = covariance(best, m);

  FitResult out;
  out.names = {"gamma", "plateau", "start"};
  out.values = {gamma, plateau, plateau + amplitude};
  out.std_errors = {gamma * safe_sqrt(cov(2, 2)), scale * safe_sqrt(cov(0, 0)),
                    scale * safe_sqrt(cov(0, 0) + cov(1, 1) + 2.0 * cov(0, 1))};
  out.rss = best.rss * scale * scale;
  out.converged = best.converged;
  out.iterations = best.iterations;
  if (!out.converged) throw NumericalError("charge-decay fit did not converge", std::sqrt(out.rss));
  return out;
}

FitResult fit_power_exponent(std::span<const DataPoint> points) {
  if (points.size() < 3) throw DomainError("power-law fit needs at least 3 points");
  double sx = 0, sy = 0;
  for (const auto& p : points) {
    if (!(p.x > 0.0) || !(p.y > 0.0) || !std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw DomainError("power-law fit needs positive data");
    }
    sx += std::log(p.x);
    sy += std::log(p.y);
  }
  const double n = static_cast<double>(points.size());
  const double mx = sx / n;
  const double my = sy / n;
  double sxx = 0, sxy = 0;
  for (const auto& p : points) {
    const double dx = std::log(p.x) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(p.y) - my);
  }
  if (!(sxx > 0.0)) throw DomainError("power-law fit needs at least two distinct powers");
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double rss = 0;
  for (const auto& p : points) {
    const double r = std::log(p.y) - (intercept + slope * std::log(p.x));
    rss += r * r;
  }
  const double s2 = rss / std::max(n - 2.0, 1.0);
  const double se_slope = std::sqrt(s2 / sxx);
  const double se_intercept = std::sqrt(s2 * (1.0 / n + mx * mx / sxx));

  FitResult out;
  out.names = {"exponent", "coefficient"};
  out.values = {slope, std::exp(intercept)};
  out.std_errors = {se_slope, std::exp(intercept) * se_intercept};
  out.rss = rss;
  out.converged = true;
  return out;
}

double alpha_from_resolution(double fwhm, double omega_d, double power, double duration) {
  if (!(power > 0.0) || !(duration > 0.0)) throw DomainError("power and duration must be > 0");
  return beta_from_resolution(fwhm, omega_d) / (power * power * duration);
}

FitResult fit_resolution_curve(std::span<const DataPoint> points, ResolutionSweep sweep,
                               double omega_d, double fixed) {
  if (points.size() < 3) throw DomainError("resolution fit needs at least 3 points");
  if (!(omega_d > 0.0)) throw DomainError("omega_d must be > 0");
  if (!(fixed > 0.0)) throw DomainError("fixed power/duration must be > 0");

  const double ceiling = resolution_eq6({omega_d, 0.0});
  std::vector<double> dose;  // beta / alpha per point
  std::vector<double> alphas;
  for (const auto& p : points) {
    if (!(p.x > 0.0) || !std::isfinite(p.x)) throw DomainError("sweep values must be > 0");
    if (!(p.y > 0.0) || !(p.y < ceiling)) {
      throw DomainError("resolution point inconsistent with any alpha >= 0");
    }
    const double g = sweep == ResolutionSweep::power ? p.x * p.x * fixed : fixed * fixed * p.x;
    dose.push_back(g);
    alphas.push_back(beta_from_resolution(p.y, omega_d) / g);
  }
  std::vector<double> sorted = alphas;
  std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
  const double alpha0 = std::max(sorted[sorted.size() / 2], 1e-300);

  const int m = static_cast<int>(points.size());
  // Width errors scale with the width, so residuals are taken in log space.
  auto residual = [&](const Eigen::VectorXd& x, Eigen::VectorXd& r) {
    const double alpha = std::exp(x[0]);
    for (int i = 0; i < m; ++i) {
      r[i] = std::log(resolution_eq6({omega_d, alpha * dose[i]}) / points[i].y);
    }
  };
  Eigen::VectorXd x0(1);
  x0 << std::log(alpha0);
  LmOptions options;
  options.fd_relative_step = 1e-7;
  const LmResult fit = levenberg_marquardt(residual, x0, m, options);
  if (!fit.converged) {
    throw NumericalError("resolution fit did not converge", std::sqrt(fit.rss));
  }
  const double alpha = std::exp(fit.params[0]);
  const Eigen::MatrixXd cov = covariance(fit, m);

  FitResult out;
  out.names = {"alpha"};
  out.values = {alpha};
  out.std_errors = {alpha * safe_sqrt(cov(0, 0))};
  out.rss = fit.rss;
  out.converged = true;
  out.iterations = fit.iterations;
  return out;
}

}  // namespace csd
