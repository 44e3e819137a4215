#pragma once

// Beam intensity profiles and CSD resolution.
//
// All profiles are radially symmetric about their center. Standing-wave
// profiles are clamped to a single lobe (cos^2) or a single ring (sin^2
// doughnut) so that scans wider than one period show no replicas.
//
// Units: length nm, power mW.

#include <functional>
#include <string_view>

#include "csd/geometry.hpp"

namespace csd {

enum class BeamKind {
  standing_cos2,           // I cos^2(pi r / w), r <= w/2
  standing_sin2_doughnut,  // I sin^2(pi r / w) up to w/2, then I cos^2(pi (r - w/2) / w) up to w
  gaussian,                // I 2^{-(2 r / w)^2}, w = FWHM
  ring_lg,                 // I (r/w)^2 exp(1 - (r/w)^2), peak at r = w
};

std::string_view to_string(BeamKind kind);
BeamKind parse_beam_kind(std::string_view text);

struct BeamProfile {
  BeamKind kind = BeamKind::gaussian;
  double width = 300.0;        // nm
  double peak_intensity = 0.0; // mW
  Vec2 center{};

  void validate() const;
};

inline constexpr double kDefaultBeamWidth = 300.0;

// Unit-peak radial shape of a beam kind, in [0, 1].
double beam_shape(BeamKind kind, double width, double r);

double beam_intensity(const BeamProfile& profile, Vec2 point);

// Normalized detection PSF h_det(r) times the NV- population at r. The
// detection profile's peak intensity is ignored (h_det(0) = 1).
double effective_psf_value(const BeamProfile& det, const std::function<double(double)>& rho_at,
                           double r);

struct ResolutionParams {
  double omega_d = kDefaultBeamWidth;  // nm
  double beta = 0.0;                   // alpha I_max^2 tau

  void validate() const;
};

// Closed-form CSD width from the fourth-order expansion of
//   cos^2(x) exp(-beta sin^4 x) = 1/2,  x = pi r / omega_d.
// Evaluated in the rationalized form 3 / (3 + sqrt(18 beta + 3)), which has no
// singularity at beta = 1/3.
double resolution_eq6(const ResolutionParams& params);

// Same width by solving (1/3 - beta) u^2 - u + 1/2 = 0 for u = x^2 and taking
// the smallest positive root.
double quartic_root_fwhm(const ResolutionParams& params);

// Inverse of resolution_eq6: the beta giving `fwhm` on a doughnut of width
// omega_d. Requires 0 < fwhm < resolution_eq6(beta = 0).
double beta_from_resolution(double fwhm, double omega_d);

// Full width at half maximum of a profile peaked at r = 0, by bracketing and
// bisecting the half-maximum crossing on both sides within +-search_halfwidth.
double numeric_fwhm(const std::function<double(double)>& profile_fn, double search_halfwidth);

}  // namespace csd
