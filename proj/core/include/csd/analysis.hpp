#pragma once

// Parameter extraction: exponential charge traces, power-law exponents and
// resolution-versus-power/duration curves.

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace csd {

struct FitResult {
  std::vector<std::string> names;
  std::vector<double> values;
  std::vector<double> std_errors;  // linearized, from the residual variance
  double rss = 0.0;
  bool converged = false;
  int iterations = 0;

  // Throws DomainError for an unknown name.
  double value(std::string_view name) const;
  double std_error(std::string_view name) const;
};

struct DataPoint {
  double x = 0.0;
  double y = 0.0;
};

// signal(t) = plateau + (start - plateau) exp(-gamma t). Parameters
// "gamma" (1/us), "plateau", "start". Needs >= 4 points with increasing t.
FitResult fit_charge_decay(std::span<const DataPoint> trace);

// gamma = coefficient * I^exponent by linear least squares in log-log space.
// Parameters "exponent", "coefficient".
FitResult fit_power_exponent(std::span<const DataPoint> points);

enum class ResolutionSweep { power, duration };

// Fits alpha in beta = alpha I^2 tau so that resolution_eq6 matches the
// measured widths, with residuals ln(model / measured); rss is in those
// units. `fixed` is the duration (us) of a power sweep or the power (mW) of
// a duration sweep. Parameter "alpha".
FitResult fit_resolution_curve(std::span<const DataPoint> points, ResolutionSweep sweep,
                               double omega_d, double fixed);

// Closed-form single-point inversion: alpha = beta(fwhm) / (I^2 tau).
double alpha_from_resolution(double fwhm, double omega_d, double power, double duration);

}  // namespace csd
