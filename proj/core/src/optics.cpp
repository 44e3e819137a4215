#include "csd/optics.hpp"

#include <cmath>
#include <string>

#include "csd/errors.hpp"

namespace csd {

std::string_view to_string(BeamKind kind) {
  switch (kind) {
    case BeamKind::standing_cos2: return "standing-cos2";
    case BeamKind::standing_sin2_doughnut: return "standing-sin2-doughnut";
    case BeamKind::gaussian: return "gaussian";
    case BeamKind::ring_lg: return "ring-lg";
  }
  return "?";
}

BeamKind parse_beam_kind(std::string_view text) {
  if (text == "standing-cos2") return BeamKind::standing_cos2;
  if (text == "standing-sin2-doughnut") return BeamKind::standing_sin2_doughnut;
  if (text == "gaussian") return BeamKind::gaussian;
  if (text == "ring-lg") return BeamKind::ring_lg;
  throw DomainError("unknown beam kind '" + std::string(text) + "'");
}

void BeamProfile::validate() const {
  if (!(width > 0.0)) throw DomainError("beam width must be > 0");
  if (!(peak_intensity >= 0.0)) throw DomainError("beam peak intensity must be >= 0");
}

double beam_shape(BeamKind kind, double width, double r) {
  r = std::abs(r);
  switch (kind) {
    case BeamKind::standing_cos2: {
      if (r > 0.5 * width) return 0.0;
      const double c = std::cos(kPi * r / width);
      return c * c;
    }
    case BeamKind::standing_sin2_doughnut: {
      if (r <= 0.5 * width) {
        const double s = std::sin(kPi * r / width);
        return s * s;
      }
      if (r <= width) {
        const double c = std::cos(kPi * (r - 0.5 * width) / width);
        return c * c;
      }
      return 0.0;
    }
    case BeamKind::gaussian: {
      const double q = 2.0 * r / width;
      return std::exp2(-q * q);
    }
    case BeamKind::ring_lg: {
      const double q = r / width;
      return q * q * std::exp(1.0 - q * q);
    }
  }
  return 0.0;
}

double beam_intensity(const BeamProfile& profile, Vec2 point) {
  const double r = (point - profile.center).norm();
  return profile.peak_intensity * beam_shape(profile.kind, profile.width, r);
}

double effective_psf_value(const BeamProfile& det, const std::function<double(double)>& rho_at,
                           double r) {
  const double h = beam_shape(det.kind, det.width, r);
  if (h == 0.0) return 0.0;
  return h * rho_at(r);
}

void ResolutionParams::validate() const {
  if (!(omega_d > 0.0)) throw DomainError("omega_d must be > 0");
  if (!(beta >= 0.0)) throw DomainError("beta must be >= 0");
}

double resolution_eq6(const ResolutionParams& params) {
  params.validate();
  // (-3 + sqrt(3) sqrt(6b + 1)) / (2 (3b - 1)) == 3 / (3 + sqrt(18b + 3))
  const double u = 3.0 / (3.0 + std::sqrt(18.0 * params.beta + 3.0));
  return 2.0 * params.omega_d / kPi * std::sqrt(u);
}

double quartic_root_fwhm(const ResolutionParams& params) {
  params.validate();
  const double a = 1.0 / 3.0 - params.beta;
  const double b = -1.0;
  const double c = 0.5;
  // Cancellation-free pair: q = -(b + sgn(b) sqrt(disc)) / 2, roots q/a and c/q.
  const double disc = b * b - 4.0 * a * c;
  const double q = -0.5 * (b - std::sqrt(disc));
  double u = c / q;
  if (a != 0.0) {
    const double other = q / a;
    if (other > 0.0 && other < u) u = other;
  }
  if (!(u > 0.0)) throw NumericalError("no positive root of the width quadratic");
  return 2.0 * params.omega_d / kPi * std::sqrt(u);
}

double beta_from_resolution(double fwhm, double omega_d) {
  if (!(omega_d > 0.0)) throw DomainError("omega_d must be > 0");
  const double limit = resolution_eq6({omega_d, 0.0});
  if (!(fwhm > 0.0 && fwhm < limit)) {
    throw DomainError("width " + std::to_string(fwhm) + " nm is not reachable with beta >= 0 (limit " +
                      std::to_string(limit) + " nm)");
  }
  const double x = kPi * fwhm / (2.0 * omega_d);
  const double u = x * x;
  return 1.0 / 3.0 + (0.5 - u) / (u * u);
}

namespace {

double half_crossing(const std::function<double(double)>& f, double half, double direction,
                     double search_halfwidth) {
  constexpr int kSamples = 4096;
  const double step = search_halfwidth / kSamples;
  double lo = 0.0;
  for (int i = 1; i <= kSamples; ++i) {
    const double r = i * step;
    if (f(direction * r) <= half) {
      double hi = r;
      while (hi - lo > 1e-12 * search_halfwidth && hi - lo > 1e-10) {
        const double mid = 0.5 * (lo + hi);
        if (f(direction * mid) > half) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      return 0.5 * (lo + hi);
    }
    lo = r;
  }
  throw NumericalError("profile does not fall to half maximum");
}

}  // namespace

double numeric_fwhm(const std::function<double(double)>& profile_fn, double search_halfwidth) {
  if (!(search_halfwidth > 0.0)) throw DomainError("search half-width must be > 0");
  const double peak = profile_fn(0.0);
  if (!(peak > 0.0)) throw DomainError("profile must be positive at r = 0");
  const double half = 0.5 * peak;
  return half_crossing(profile_fn, half, +1.0, search_halfwidth) +
         half_crossing(profile_fn, half, -1.0, search_halfwidth);
}

}  // namespace csd
