#pragma once

// Scan-image synthesis for CSD microscopy.
//
// A pulse sequence is applied at every scan position. Non-readout phases move
// each NV's charge population with the local beam intensity; readout phases
// convert the resulting NV- population into expected photon counts through the
// detection PSF.

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "csd/charge.hpp"
#include "csd/geometry.hpp"
#include "csd/optics.hpp"
#include "csd/spin_params.hpp"

namespace csd {

struct NVCenter {
  Vec2 position{};
  int axis_index = 0;
  double count_rate = 1.0;  // photons per us at h_det = 1 and rho_minus = 1
  ChargeState charge{kRhoSteady532};
  SpinParams spin{};
};

struct Scene {
  std::vector<NVCenter> nvs;
  double background_rate = 0.0;  // photons per us
  MagneticField field{};

  void validate() const;
};

enum class PhaseRole { init, deplete, readout_charge, readout_spin };

std::string_view to_string(PhaseRole role);

enum class ReadoutModel {
  charge,     // counts follow h_det * rho_minus
  saturable,  // counts follow h_det * S(I) / S(I_peak), S(I) = I / (I + i_sat_fluor)
};

struct PulsePhase {
  PhaseRole role = PhaseRole::init;
  BeamProfile beam{};  // peak_intensity is the phase power, mW; center is relative to the scan position
  RateModel rate_model{};
  double duration = 0.0;  // us
  ReadoutModel readout = ReadoutModel::charge;

  bool is_readout() const {
    return role == PhaseRole::readout_charge || role == PhaseRole::readout_spin;
  }
  double power() const { return beam.peak_intensity; }
};

enum class SequenceKind { confocal, icsd, rcsd, gsd, custom };

std::string_view to_string(SequenceKind kind);
SequenceKind parse_sequence_kind(std::string_view text);

// Linear polarization scales each NV's conversion rates by
// 1 + amplitude * cos(2 (angle - axis_angle)), where axis_angle is the in-plane
// azimuth of the NV axis. Absent means circular polarization (factor 1).
struct LinearPolarization {
  double angle_deg = 0.0;
  double amplitude = 1.0 / 3.0;
};

struct PulseSequence {
  SequenceKind label = SequenceKind::custom;
  std::vector<PulsePhase> phases;
  BeamProfile detection{BeamKind::standing_cos2, kDefaultBeamWidth, 1.0, {}};
  std::optional<LinearPolarization> polarization;
  double i_sat_fluor = 0.4;  // mW
  // When set, readout phases with a nonzero rate model move the charge state
  // and score the time-averaged population.
  bool readout_back_action = false;

  void validate() const;
};

struct RateTable {
  RateModel nm532 = default_rate_model(Wavelength::nm532);
  RateModel nm589 = default_rate_model(Wavelength::nm589);
  RateModel nm637 = default_rate_model(Wavelength::nm637);

  const RateModel& at(Wavelength w) const;
  RateModel& at(Wavelength w);
};

struct PhaseSettings {
  std::optional<double> power;     // mW
  std::optional<double> duration;  // us
  std::optional<double> width;     // nm
  std::optional<BeamKind> beam;
};

struct PresetOptions {
  PhaseSettings init;
  PhaseSettings deplete;
  PhaseSettings readout;
  double detection_width = kDefaultBeamWidth;
  RateTable rates{};
  // Replace the 589 nm charge readout by the 0.7 mW, 300 ns, 532 nm spin readout.
  bool spin_readout = false;
};

// Canonical sequences:
//   confocal: [532 G readout]
//   iCSD:     [637 G init, 532 D deplete, 589 G readout]
//   rCSD:     [532 G init, 637 D deplete, 589 G readout]
//   GSD:      [532 D saturable readout]
PulseSequence preset_sequence(SequenceKind kind, const PresetOptions& options = {});

struct NVPointResult {
  ChargeState charge;  // after the non-readout phases that precede the readout
  double detection = 0.0;  // h_det at the NV
  double counts = 0.0;     // expected readout photons
};

struct PointResult {
  std::vector<NVPointResult> nvs;
  double total_counts = 0.0;  // NV counts plus background
};

// In-plane azimuth of an NV axis, radians.
double axis_azimuth(int axis_index);

double polarization_factor(const PulseSequence& sequence, int axis_index);

PointResult run_sequence_at_point(const Scene& scene, const PulseSequence& sequence, Vec2 scan_pos);

// Pixel (row, col) sits at origin + (col * pitch, row * pitch).
struct ScanGrid {
  Vec2 origin{};
  double pitch = 1.0;  // nm
  int width = 1;
  int height = 1;

  Vec2 pixel_center(int row, int col) const {
    return {origin.x + col * pitch, origin.y + row * pitch};
  }
  void validate() const;

  // Grid of width x height pixels centred on `center`.
  static ScanGrid centered(Vec2 center, double pitch, int width, int height);
};

struct ScanImage {
  Vec2 origin{};
  double pitch = 1.0;
  int width = 0;
  int height = 0;
  std::vector<double> values;  // row-major
  bool sampled = false;        // true when values are Poisson draws

  double at(int row, int col) const { return values[static_cast<std::size_t>(row) * width + col]; }
  double& at(int row, int col) { return values[static_cast<std::size_t>(row) * width + col]; }
};

struct ScanOptions {
  std::optional<std::uint64_t> seed;  // Poisson sampling when set
  int threads = 1;                    // 0 = hardware concurrency
};

ScanImage simulate_scan(const Scene& scene, const PulseSequence& sequence, const ScanGrid& grid,
                        const ScanOptions& options = {});

struct CurvePoint {
  double position = 0.0;  // nm
  double value = 0.0;
};
using Curve = std::vector<CurvePoint>;

// Expected total counts at `samples` evenly spaced scan positions from `from`
// to `to`; positions are distances from `from`. No image, no noise.
Curve simulate_profile(const Scene& scene, const PulseSequence& sequence, Vec2 from, Vec2 to,
                       int samples);

Curve extract_row(const ScanImage& image, int row);
Curve extract_column(const ScanImage& image, int col);
// Nearest-pixel samples every pixel pitch from `from` to `to` (nm); positions
// are distances from `from`.
Curve extract_line(const ScanImage& image, Vec2 from, Vec2 to);

enum class FeaturePolarity { peak, dip };

// Width of the feature from linearly interpolated half-maximum crossings.
// Peaks: the global maximum over a zero baseline. Dips: the deepest interior
// minimum, measured against the lower of its two shoulders.
double fwhm_from_profile(const Curve& curve, FeaturePolarity polarity = FeaturePolarity::peak);

// FWHM of the feature at `center` along x, re-sampling a shrinking window
// until the window spans at most ~5 FWHM (so the pitch stays far below the
// width). Throws NumericalError when no feature is resolved.
double measure_feature_fwhm(const Scene& scene, const PulseSequence& sequence, Vec2 center,
                            FeaturePolarity polarity, double initial_halfwidth = 150.0,
                            int samples = 2001);

// Local maxima rising at least `min_prominence` (fraction of the global
// maximum) above the deeper of their neighbouring valleys; for two or more,
// the valley between the two highest relative to the lower of them.
struct MaximaReport {
  int maxima = 0;
  double dip_fraction = 0.0;  // (lower peak - valley) / global maximum
};
MaximaReport count_maxima(const Curve& curve, double min_prominence = 0.01);

}  // namespace csd
