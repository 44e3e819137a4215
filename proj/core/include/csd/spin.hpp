#pragma once

// NV- ground-state spin: transition frequencies by exact diagonalization of
//   H = D Sz^2 + gamma_e (B . S)
// in the NV frame, CSD-weighted ODMR / Rabi / Ramsey signals, and vector-field
// inference from two NV orientations.
//
// Internally all frequencies are MHz; SpinParams::zfs_d and the public
// transition frequencies are GHz.

#include <array>
#include <span>
#include <vector>

#include "csd/eigen3x3.hpp"
#include "csd/scan.hpp"
#include "csd/spin_params.hpp"

namespace csd {

struct TransitionPair {
  double minus = 0.0;  // GHz, E1 - E0
  double plus = 0.0;   // GHz, E2 - E0
};

// Field components along the NV axis and perpendicular to it, G.
struct AxialField {
  double parallel = 0.0;
  double perpendicular = 0.0;
};

AxialField project_on_axis(const MagneticField& field, int axis_index);

// Hamiltonian in MHz on the basis (|+1>, |0>, |-1>), with the transverse field
// along the NV-frame x axis. Rotating about the NV axis is unitary, so the
// spectrum equals that of the general complex form.
Matrix3 spin_hamiltonian(const MagneticField& field, int axis_index, const SpinParams& params);

TransitionPair transition_frequencies(const MagneticField& field, int axis_index,
                                      const SpinParams& params);

// Abscissa (MHz or us) and normalized fluorescence.
struct SpinTrace {
  std::vector<double> abscissa;
  std::vector<double> values;

  Curve as_curve() const;
};
using OdmrSpectrum = SpinTrace;
using RabiTrace = SpinTrace;
using RamseyTrace = SpinTrace;

// Readout weight of each NV: its share of the detected NV- fluorescence at
// scan_pos after the sequence's charge preparation. Zero when nothing is
// detected.
std::vector<double> spin_weights(const Scene& scene, const PulseSequence& sequence, Vec2 scan_pos);

// Unit-peak Lorentzian of full width `fwhm`.
double lorentzian(double f, double center, double fwhm);

// Abscissa in MHz.
OdmrSpectrum odmr_spectrum(const Scene& scene, const PulseSequence& sequence,
                           std::span<const double> mw_freqs_ghz, Vec2 scan_pos);

// Drive `drive_mhz` at `mw_freq_ghz`; each NV responds on its nearest transition.
RabiTrace rabi_trace(const Scene& scene, const PulseSequence& sequence, double drive_mhz,
                     double mw_freq_ghz, std::span<const double> times_us, Vec2 scan_pos);

RamseyTrace ramsey_trace(const Scene& scene, const PulseSequence& sequence, double detuning_mhz,
                         std::span<const double> taus_us, Vec2 scan_pos);

struct FrequencyObservation {
  int axis_index = 0;
  double minus_ghz = 0.0;
  double plus_ghz = 0.0;
};

struct FieldEstimate {
  MagneticField field;
  double magnitude = 0.0;               // G
  std::array<double, 2> angles_deg{};   // to each observed axis, folded into [0, 90]
  double residual_mhz = 0.0;            // norm of the four frequency residuals
  int starts = 0;
};

// Angle between a field and an NV axis, folded into [0, 90] degrees.
double axis_angle_deg(const MagneticField& field, int axis_index);

// Per-NV (|B_parallel|, B_perpendicular) from one frequency pair, from the
// characteristic-polynomial invariants of H (trace 2D fixes the offset).
AxialField axial_field_from_pair(double minus_ghz, double plus_ghz, const SpinParams& params);

// Least-squares field vector from two NVs with distinct axes, multi-started
// over the sign ambiguities of the closed-form per-NV solution.
FieldEstimate infer_field(std::span<const FrequencyObservation, 2> observations,
                          const SpinParams& params = {});

}  // namespace csd
