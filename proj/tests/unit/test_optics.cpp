#include <gtest/gtest.h>

#include <cmath>

#include "csd/errors.hpp"
#include "csd/optics.hpp"

using namespace csd;

TEST(BeamShape, StandingWaveProfiles) {
  EXPECT_DOUBLE_EQ(beam_shape(BeamKind::standing_cos2, 300, 0), 1.0);
  EXPECT_NEAR(beam_shape(BeamKind::standing_cos2, 300, 75), 0.5, 1e-15);
  EXPECT_EQ(beam_shape(BeamKind::standing_cos2, 300, 151), 0.0);
  EXPECT_EQ(beam_shape(BeamKind::standing_sin2_doughnut, 300, 0), 0.0);
  EXPECT_DOUBLE_EQ(beam_shape(BeamKind::standing_sin2_doughnut, 300, 150), 1.0);
  EXPECT_NEAR(beam_shape(BeamKind::standing_sin2_doughnut, 300, 225), 0.5, 1e-15);
  EXPECT_EQ(beam_shape(BeamKind::standing_sin2_doughnut, 300, 301), 0.0);
}

TEST(BeamShape, GaussianWidthIsFwhm) {
  EXPECT_DOUBLE_EQ(beam_shape(BeamKind::gaussian, 150, 75), 0.5);
  EXPECT_DOUBLE_EQ(beam_shape(BeamKind::gaussian, 150, -75), 0.5);
}

TEST(BeamShape, RingPeaksAtWidth) {
  EXPECT_DOUBLE_EQ(beam_shape(BeamKind::ring_lg, 200, 200), 1.0);
  EXPECT_EQ(beam_shape(BeamKind::ring_lg, 200, 0), 0.0);
  EXPECT_LT(beam_shape(BeamKind::ring_lg, 200, 190), 1.0);
  EXPECT_LT(beam_shape(BeamKind::ring_lg, 200, 210), 1.0);
}

TEST(BeamShape, DoughnutIsContinuousAndBounded) {
  for (auto kind : {BeamKind::standing_cos2, BeamKind::standing_sin2_doughnut, BeamKind::gaussian,
                    BeamKind::ring_lg}) {
    double prev = beam_shape(kind, 300, 0);
    for (double r = 0.01; r < 600; r += 0.01) {
      const double v = beam_shape(kind, 300, r);
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
      ASSERT_LT(std::abs(v - prev), 1e-3) << to_string(kind) << " at r=" << r;
      prev = v;
    }
  }
}

TEST(BeamKindNames, RoundTrip) {
  for (auto kind : {BeamKind::standing_cos2, BeamKind::standing_sin2_doughnut, BeamKind::gaussian,
                    BeamKind::ring_lg}) {
    EXPECT_EQ(parse_beam_kind(to_string(kind)), kind);
  }
  EXPECT_THROW(parse_beam_kind("tophat"), DomainError);
}

TEST(BeamIntensity, UsesCenterAndPeak) {
  BeamProfile b{BeamKind::gaussian, 100, 4.0, {10, 0}};
  EXPECT_DOUBLE_EQ(beam_intensity(b, {10, 0}), 4.0);
  EXPECT_DOUBLE_EQ(beam_intensity(b, {60, 0}), 2.0);
}

TEST(ResolutionFormula, ZeroBetaAndSingularPoint) {
  // beta = 0: x^2 = 3 / (3 + sqrt 3).
  EXPECT_NEAR(resolution_eq6({300, 0}), 600 / kPi * std::sqrt(3 / (3 + std::sqrt(3.0))), 1e-12);
  EXPECT_NEAR(resolution_eq6({300, 1.0 / 3.0}), std::sqrt(2.0) * 300 / kPi, 1e-12);
}

TEST(ResolutionFormula, AgreesWithQuarticRoot) {
  for (double lb = -6; lb <= 6; lb += 0.05) {
    const double beta = std::pow(10.0, lb);
    const double a = resolution_eq6({300, beta});
    const double b = quartic_root_fwhm({300, beta});
    EXPECT_NEAR(a / b, 1.0, 1e-12) << beta;
  }
  for (double d : {-1e-9, 0.0, 1e-9}) {
    EXPECT_NEAR(resolution_eq6({300, 1.0 / 3.0 + d}) / quartic_root_fwhm({300, 1.0 / 3.0 + d}), 1.0,
                1e-12);
  }
}

TEST(ResolutionFormula, MonotoneAndAsymptotic) {
  double prev = resolution_eq6({300, 0});
  for (double lb = -6; lb <= 9; lb += 0.1) {
    const double v = resolution_eq6({300, std::pow(10.0, lb)});
    EXPECT_LT(v, prev);
    prev = v;
  }
  // Large beta: 2w/pi * (1/(2 beta))^{1/4}.
  const double beta = 1e12;
  EXPECT_NEAR(resolution_eq6({300, beta}) / (600 / kPi * std::pow(0.5 / beta, 0.25)), 1.0, 1e-5);
}

TEST(ResolutionFormula, ScalesWithOmega) {
  EXPECT_NEAR(resolution_eq6({600, 7.0}), 2.0 * resolution_eq6({300, 7.0}), 1e-12);
}

TEST(ResolutionFormula, RejectsBadInput) {
  EXPECT_THROW(resolution_eq6({300, -1}), DomainError);
  EXPECT_THROW(resolution_eq6({0, 1}), DomainError);
  EXPECT_THROW(quartic_root_fwhm({-3, 1}), DomainError);
}

TEST(BetaFromResolution, InvertsClosedForm) {
  for (double lb = -4; lb <= 8; lb += 0.25) {
    const double beta = std::pow(10.0, lb);
    const double w = resolution_eq6({300, beta});
    EXPECT_NEAR(beta_from_resolution(w, 300) / beta, 1.0, 1e-8) << beta;
  }
  EXPECT_NEAR(beta_from_resolution(std::sqrt(2.0) * 300 / kPi, 300), 1.0 / 3.0, 1e-12);
  EXPECT_THROW(beta_from_resolution(0.0, 300), DomainError);
  EXPECT_THROW(beta_from_resolution(resolution_eq6({300, 0}) * 1.001, 300), DomainError);
}

// FWHM / omega of cos^2(x) exp(-beta sin^4 x), x = pi r / omega, from an
// independent 30-digit mpmath root solve.
struct ExactWidth {
  double beta;
  double fwhm_over_omega;
  double closed_over_omega;
};
constexpr ExactWidth kExactWidths[] = {
    {0.0, 0.5, 0.50689271641},
    {1.0, 0.44172406093, 0.40043531640},
    {10.0, 0.30538111616, 0.27122760717},
    {100.0, 0.18044587040, 0.16353762547},
    {1000.0, 0.10275333622, 0.09414621328},
};

TEST(NumericFwhm, ExactProfileMatchesOracleTable) {
  for (const auto& row : kExactWidths) {
    auto profile = [&](double r) {
      const double x = kPi * r / 300.0;
      const double s = std::sin(x);
      return std::cos(x) * std::cos(x) * std::exp(-row.beta * s * s * s * s);
    };
    EXPECT_NEAR(numeric_fwhm(profile, 150.0) / 300.0, row.fwhm_over_omega, 1e-9) << row.beta;
    EXPECT_NEAR(resolution_eq6({300, row.beta}) / 300.0, row.closed_over_omega, 1e-10) << row.beta;
  }
}

TEST(NumericFwhm, TaylorGapTendsToConstant) {
  // The expansion error tends to (2 ln 2)^{1/4} - 1 instead of vanishing.
  const double beta = 1e8;
  auto profile = [&](double r) {
    const double x = kPi * r / 300.0;
    const double s = std::sin(x);
    return std::cos(x) * std::cos(x) * std::exp(-beta * s * s * s * s);
  };
  const double gap = numeric_fwhm(profile, 150.0) / resolution_eq6({300, beta}) - 1.0;
  EXPECT_NEAR(gap, std::pow(2.0 * std::log(2.0), 0.25) - 1.0, 2e-3);
}

TEST(NumericFwhm, GaussianAndErrors) {
  EXPECT_NEAR(numeric_fwhm([](double r) { return beam_shape(BeamKind::gaussian, 37.0, r); }, 100), 37.0,
              1e-8);
  EXPECT_THROW(numeric_fwhm([](double) { return 1.0; }, 100), NumericalError);
  EXPECT_THROW(numeric_fwhm([](double) { return 0.0; }, 100), DomainError);
}

TEST(EffectivePsf, ProductOfDetectionAndPopulation) {
  const BeamProfile det{BeamKind::standing_cos2, 300, 5.0, {}};
  EXPECT_NEAR(effective_psf_value(det, [](double) { return 0.5; }, 75), 0.25, 1e-15);
  EXPECT_EQ(effective_psf_value(det, [](double) { return 1.0; }, 200), 0.0);
}
