#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <limits>
#include <random>
#include <sstream>

#include "csd/errors.hpp"
#include "csd/image_io.hpp"

using namespace csd;

TEST(FormatNumber, RoundTripsRandomDoubles) {
  std::mt19937_64 g(99);
  std::uniform_int_distribution<std::uint64_t> bits;
  int tested = 0;
  while (tested < 20000) {
    const std::uint64_t b = bits(g);
    double v;
    std::memcpy(&v, &b, sizeof v);
    if (!std::isfinite(v)) continue;
    ++tested;
    EXPECT_EQ(parse_number(format_number(v)), v);
  }
}

TEST(FormatNumber, ShortForms) {
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(2.0), "2");
  EXPECT_EQ(format_number(-3.5), "-3.5");
  EXPECT_THROW(parse_number("abc"), std::exception);
  EXPECT_THROW(parse_number("1.5x"), std::exception);
}

namespace {

ScanImage ramp(bool sampled) {
  ScanImage img;
  img.origin = {-20, 7.5};
  img.pitch = 2.5;
  img.width = 5;
  img.height = 3;
  img.sampled = sampled;
  for (int i = 0; i < 15; ++i) img.values.push_back(sampled ? i * 7 : 0.25 * i);
  return img;
}

}  // namespace

TEST(Pgm, ExpectedImageRoundTrip) {
  const auto img = ramp(false);
  std::stringstream ss;
  write_pgm(ss, img);
  EXPECT_EQ(ss.str().rfind("P2\n", 0), 0u);
  const auto back = read_pgm(ss);
  EXPECT_EQ(back.width, 5);
  EXPECT_EQ(back.height, 3);
  EXPECT_EQ(back.origin, img.origin);
  EXPECT_EQ(back.pitch, img.pitch);
  const double scale = pgm_scale(img);
  EXPECT_DOUBLE_EQ(scale, kPgmMaxval / 3.5);
  for (std::size_t i = 0; i < img.values.size(); ++i) {
    EXPECT_NEAR(back.values[i], img.values[i], 0.5 / scale);
  }
}

TEST(Pgm, SampledImageStoredExactly) {
  const auto img = ramp(true);
  std::stringstream ss;
  write_pgm(ss, img);
  const auto back = read_pgm(ss);
  EXPECT_EQ(back.values, img.values);
}

TEST(Pgm, AllZeroImage) {
  auto img = ramp(false);
  std::fill(img.values.begin(), img.values.end(), 0.0);
  std::stringstream ss;
  write_pgm(ss, img);
  const auto back = read_pgm(ss);
  for (double v : back.values) EXPECT_EQ(v, 0.0);
}

TEST(Pgm, RejectsMalformed) {
  std::stringstream ss("P5\n2 2\n255\n");
  EXPECT_THROW(read_pgm(ss), std::exception);
}

TEST(CurveCsv, RoundTrip) {
  Curve c{{0.0, 1.0}, {0.5, 1.0 / 3.0}, {1.0, 1e-300}};
  std::stringstream ss;
  write_curve_csv(ss, "x_nm", c);
  EXPECT_EQ(ss.str().substr(0, 11), "x_nm,value\n");
  const auto back = read_curve_csv(ss);
  EXPECT_EQ(back.abscissa, "x_nm");
  ASSERT_EQ(back.curve.size(), c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    EXPECT_EQ(back.curve[i].position, c[i].position);
    EXPECT_EQ(back.curve[i].value, c[i].value);
  }
}
