#pragma once

// Plot-ready exports.
//
// PGM: ASCII "P2", maxval 65535, row-major, with header comments
//   # origin_nm <x> <y>
//   # pitch_nm <p>
//   # scale <s>
// where stored value = round_half_even(value * scale).
//
// CSV curves: header "<abscissa>,value", '.' decimal point, '\n' line ends.

#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>

#include "csd/scan.hpp"

namespace csd {

inline constexpr int kPgmMaxval = 65535;

// Shortest decimal text that round-trips the double.
std::string format_number(double value);
double parse_number(std::string_view text);

// Scale used by write_pgm: expected images map their maximum to maxval;
// sampled images are stored 1:1 unless they exceed maxval.
double pgm_scale(const ScanImage& image);

void write_pgm(std::ostream& out, const ScanImage& image);
ScanImage read_pgm(std::istream& in);

void write_curve_csv(std::ostream& out, std::string_view abscissa, const Curve& curve);

struct NamedCurve {
  std::string abscissa;
  Curve curve;
};
NamedCurve read_curve_csv(std::istream& in);

}  // namespace csd
