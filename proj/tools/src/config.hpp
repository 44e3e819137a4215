#pragma once

// Experiment configuration files.
//
//   # comment
//   [experiment]
//   kind = scan
//   [nv]            <- repeatable
//   x = 0
//
// Keys are `name = value`; lists are comma separated. Every key must be known
// to its section, otherwise parsing fails with the offending line.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "csd/scan.hpp"

namespace csd::tools {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ExperimentKind {
  scan,
  odmr,
  rabi,
  ramsey,
  resolution_sweep,
  rate_trace,
  compare_modes,
  fit,
};

std::string_view to_string(ExperimentKind kind);

struct GridSpec {
  Vec2 center{};
  double pitch = 5.0;  // nm
  int width = 81;
  int height = 81;
};

// Abscissa for odmr (GHz), rabi and ramsey (us).
struct SpectrumSpec {
  double start = 2.75;
  double stop = 3.0;
  int points = 501;
  Vec2 position{};
  double drive = 5.0;      // MHz, rabi
  double mw_freq = 2.87;   // GHz, rabi
  double detuning = 5.0;   // MHz, ramsey
  double dip_threshold = 0.02;
};

enum class SweepVariable {
  init_power,
  init_duration,
  deplete_power,
  deplete_duration,
  readout_power,
  readout_duration,
};

struct SweepSpec {
  SweepVariable variable = SweepVariable::deplete_power;
  std::vector<double> values;
  std::optional<double> omega_d;    // defaults to the detection width
  double window = 150.0;            // initial half-width of the profile, nm
  int samples = 2001;
  std::optional<double> reference_fwhm;  // nm, compared with the last point
};

struct TraceSpec {
  Wavelength wavelength = Wavelength::nm532;
  double power = 0.68;        // mW
  double start_rho = kRhoSteady637;
  double duration = 5.0;      // us
  int points = 50;
  double counts = 1e4;        // expected counts per point at rho = 1
  std::vector<double> powers; // optional power dependence
};

enum class FitModel { charge_decay, power_law, resolution };

struct FitSpec {
  std::filesystem::path input;
  FitModel model = FitModel::charge_decay;
  bool sweep_power = true;
  double omega_d = kDefaultBeamWidth;
  double fixed = 40.0;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::scan;
  std::string name = "experiment";
  std::optional<std::uint64_t> seed;
  int threads = 1;
  std::filesystem::path output_dir = "out";

  Scene scene;
  SequenceKind preset = SequenceKind::confocal;
  PresetOptions preset_options;
  std::optional<BeamKind> detection_beam;
  std::optional<LinearPolarization> polarization;
  double i_sat_fluor = 0.4;
  bool back_action = false;

  GridSpec grid;
  SpectrumSpec spectrum;
  SweepSpec sweep;
  TraceSpec trace;
  FitSpec fit;

  // Sequence for `kind` with every override applied.
  PulseSequence sequence(SequenceKind kind) const;
  PulseSequence sequence() const { return sequence(preset); }
};

// `source` names the input in diagnostics; relative paths inside the config
// resolve against `base_dir`.
ExperimentConfig parse_config(std::istream& in, const std::string& source,
                              const std::filesystem::path& base_dir);
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace csd::tools
