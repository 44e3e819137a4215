#pragma once

#include <array>

#include "csd/geometry.hpp"

namespace csd {

// NV- ground-state parameters. Frequencies in the units noted per field.
struct SpinParams {
  double zfs_d = 2.870;          // GHz
  double gyro = 2.8025;          // MHz / G
  double linewidth = 8.0;        // MHz, ODMR FWHM
  double contrast = 0.2;         // maximum ODMR dip depth
  double t2_star = 0.5;          // us
  double rabi_freq_at_unit_drive = 1.0;  // multiplies the applied drive, MHz per MHz
  double rabi_decay = 2.0;       // us, envelope exp(-t / rabi_decay)

  void validate() const;
};

struct MagneticField {
  Vec3 vector{};  // G, lab frame

  double magnitude() const { return vector.norm(); }
};

// The four <111> symmetry axes of a <100> plate, unit length:
// (1,1,1), (1,-1,-1), (-1,1,-1), (-1,-1,1) over sqrt(3).
Vec3 tetrahedral_axis(int axis_index);

inline constexpr int kAxisCount = 4;

}  // namespace csd
