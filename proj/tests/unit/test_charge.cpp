#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "csd/charge.hpp"
#include "csd/errors.hpp"

using namespace csd;

namespace {

// Classic fourth-order Runge-Kutta on d rho/dt = gr (1 - rho) - gi rho.
double rk4(double rho, double gr, double gi, double tau, int steps) {
  auto f = [&](double r) { return gr * (1.0 - r) - gi * r; };
  const double h = tau / steps;
  for (int i = 0; i < steps; ++i) {
    const double k1 = f(rho);
    const double k2 = f(rho + 0.5 * h * k1);
    const double k3 = f(rho + 0.5 * h * k2);
    const double k4 = f(rho + h * k3);
    rho += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return rho;
}

}  // namespace

TEST(ChargeState, RejectsOutOfRange) {
  EXPECT_THROW(ChargeState(-0.01), DomainError);
  EXPECT_THROW(ChargeState(1.01), DomainError);
  EXPECT_THROW(ChargeState(std::nan("")), DomainError);
  EXPECT_DOUBLE_EQ(ChargeState(0.3).rho_zero(), 0.7);
}

TEST(SteadyState, RatioOfRates) {
  EXPECT_DOUBLE_EQ(steady_state_population({3.0, 1.0}), 0.75);
  EXPECT_THROW(steady_state_population({0.0, 0.0}), DomainError);
}

TEST(EvolveCharge, ZeroDurationAndZeroRateAreIdentity) {
  const ChargeState s(0.3);
  EXPECT_EQ(evolve_charge(s, {{2.0, 1.0}, 0.0}).rho_minus(), 0.3);
  EXPECT_EQ(evolve_charge(s, {{0.0, 0.0}, 100.0}).rho_minus(), 0.3);
}

TEST(EvolveCharge, OneTimeConstant) {
  // gamma = 2.7, rho_st = 0.75, from 0.05: after 1/gamma the gap shrinks by e.
  const auto rates = split_rates(2.7, 0.75);
  const double rho = evolve_charge(ChargeState(0.05), {rates, 1.0 / 2.7}).rho_minus();
  EXPECT_NEAR(rho, 0.75 - 0.70 / std::exp(1.0), 1e-15);
}

TEST(EvolveCharge, MatchesRk4OnRandomCases) {
  std::mt19937_64 g(42);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    const double gr = 5.0 * u(g), gi = 5.0 * u(g), tau = 3.0 * u(g), rho0 = u(g);
    const double exact = evolve_charge(ChargeState(rho0), {{gr, gi}, tau}).rho_minus();
    EXPECT_NEAR(exact, rk4(rho0, gr, gi, tau, 4000), 1e-10);
  }
}

TEST(EvolveCharge, StaysInUnitInterval) {
  std::mt19937_64 g(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const double rho = evolve_charge(ChargeState(u(g)), {{1e3 * u(g), 1e3 * u(g)}, 1e3 * u(g)}).rho_minus();
    EXPECT_GE(rho, 0.0);
    EXPECT_LE(rho, 1.0);
  }
}

TEST(EvolveCharge, MonotoneTowardSteadyState) {
  const RateCoefficients r{1.5, 0.5};
  double prev = 0.0;
  for (double t = 0.0; t < 5.0; t += 0.1) {
    const double rho = evolve_charge(ChargeState(0.0), {r, t}).rho_minus();
    EXPECT_GE(rho, prev);
    EXPECT_LE(rho, 0.75);
    prev = rho;
  }
}

TEST(EvolveThroughSequence, CompositionEqualsSequentialApplication) {
  const std::vector<IlluminationStep> steps{{{2.0, 1.0}, 0.3}, {{0.1, 3.0}, 0.7}, {{1.0, 1.0}, 0.2}};
  ChargeState s(0.4);
  for (const auto& st : steps) s = evolve_charge(s, st);
  EXPECT_DOUBLE_EQ(evolve_through_sequence(ChargeState(0.4), steps).rho_minus(), s.rho_minus());
  // Splitting a step in two changes nothing.
  const auto a = evolve_charge(ChargeState(0.4), {{2.0, 1.0}, 1.0});
  const auto b = evolve_charge(evolve_charge(ChargeState(0.4), {{2.0, 1.0}, 0.4}), {{2.0, 1.0}, 0.6});
  EXPECT_NEAR(a.rho_minus(), b.rho_minus(), 1e-15);
}

TEST(ConversionRate, DefaultsReproduceReferenceRate) {
  const auto m532 = default_rate_model(Wavelength::nm532);
  EXPECT_NEAR(conversion_rate(m532, 0.68), 2.7, 1e-12);
  EXPECT_EQ(conversion_rate(m532, 0.0), 0.0);
  EXPECT_THROW(conversion_rate(m532, -1.0), DomainError);
  EXPECT_EQ(conversion_rate(default_rate_model(Wavelength::nm589), 1.0), 0.0);
}

TEST(ConversionRate, QuadraticAndSaturatingRegimes) {
  RateModel m = default_rate_model(Wavelength::nm532);
  EXPECT_NEAR(conversion_rate(m, 2.0) / conversion_rate(m, 1.0), 4.0, 1e-12);
  m.regime = RateRegime::saturating;
  m.i_sat = 0.45;
  // Far above saturation the rate grows linearly.
  const double r1 = conversion_rate(m, 1000.0), r2 = conversion_rate(m, 2000.0);
  EXPECT_NEAR(r2 / r1, 2.0, 2e-3);
  EXPECT_NEAR(conversion_rate(m, 0.45), m.alpha * 0.45 * 0.45 / 2.0, 1e-12);
}

TEST(DefaultAlpha637, BackedOutOfBestRcsdWidth) {
  // Independent mpmath evaluation of the closed-form inverse.
  EXPECT_NEAR(default_alpha_637(), 0.0122678984500319598557516481925, 1e-15);
}

TEST(SteadyStateReproduction, LongPulseLimits) {
  for (const auto& [w, target] : {std::pair{Wavelength::nm532, 0.75}, std::pair{Wavelength::nm637, 0.05}}) {
    const auto m = default_rate_model(w);
    const auto rates = rates_at(m, 20.0);
    for (double rho0 : {0.0, 0.5, 1.0}) {
      EXPECT_NEAR(evolve_charge(ChargeState(rho0), {rates, 1e4}).rho_minus(), target, 1e-12);
    }
  }
}

TEST(RatesAt, PolarizationFactorScalesBothRates) {
  const auto m = default_rate_model(Wavelength::nm532);
  const auto a = rates_at(m, 1.0, 1.0);
  const auto b = rates_at(m, 1.0, 2.0);
  EXPECT_NEAR(b.gamma_r, 2.0 * a.gamma_r, 1e-15);
  EXPECT_NEAR(b.gamma_i, 2.0 * a.gamma_i, 1e-15);
  EXPECT_NEAR(steady_state_population(b), 0.75, 1e-15);
}

TEST(MeanPopulation, MatchesTrapezoidIntegral) {
  const IlluminationStep step{{2.0, 1.0}, 1.3};
  const ChargeState s(0.1);
  const int n = 20000;
  double acc = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double t = step.duration * i / n;
    const double v = evolve_charge(s, {step.rates, t}).rho_minus();
    acc += (i == 0 || i == n) ? 0.5 * v : v;
  }
  EXPECT_NEAR(mean_population(s, step), acc / n, 1e-8);
  EXPECT_EQ(mean_population(s, {{0.0, 0.0}, 1.0}), 0.1);
}

TEST(Wavelength, ParseRoundTrip) {
  for (auto w : {Wavelength::nm532, Wavelength::nm589, Wavelength::nm637}) {
    EXPECT_EQ(parse_wavelength(to_string(w)), w);
  }
  EXPECT_THROW(parse_wavelength("405"), DomainError);
}
