#pragma once

// Two-state NV charge dynamics. An NV center hops between NV- and NV0 under
// illumination with recharging rate gamma_r (NV0 -> NV-) and ionization rate
// gamma_i (NV- -> NV0). The population obeys
//
//   d rho_minus / dt = gamma_r (1 - rho_minus) - gamma_i rho_minus
//
// whose solution relaxes exponentially toward gamma_r / (gamma_r + gamma_i)
// with total rate gamma_r + gamma_i.
//
// Units: time us, power mW, rates per us.

#include <span>
#include <string_view>

namespace csd {

// NV- population; the NV0 population is 1 - rho_minus.
class ChargeState {
 public:
  constexpr ChargeState() = default;
  explicit ChargeState(double rho_minus);

  double rho_minus() const { return rho_minus_; }
  double rho_zero() const { return 1.0 - rho_minus_; }

  friend bool operator==(ChargeState, ChargeState) = default;

 private:
  double rho_minus_ = 0.0;
};

struct RateCoefficients {
  double gamma_r = 0.0;  // recharging, per us
  double gamma_i = 0.0;  // ionization, per us

  double total() const { return gamma_r + gamma_i; }
};

enum class Wavelength { nm532, nm589, nm637 };

std::string_view to_string(Wavelength w);
Wavelength parse_wavelength(std::string_view text);

enum class RateRegime {
  pure_quadratic,  // gamma = alpha I^2
  saturating,      // gamma = alpha I^2 / (1 + I / i_sat)
};

struct RateModel {
  Wavelength wavelength = Wavelength::nm532;
  double alpha = 0.0;   // per us per mW^2
  double i_sat = 1.0;   // mW
  double rho_st = 0.75;
  RateRegime regime = RateRegime::pure_quadratic;
  double polarization_factor = 1.0;

  // Throws DomainError when an invariant is violated.
  void validate() const;
};

struct IlluminationStep {
  RateCoefficients rates;
  double duration = 0.0;  // us
};

// Default models. 532 nm: alpha reproduces 2.7 /us at 0.68 mW. 637 nm: alpha
// reproduces a 28.6 nm rCSD width at 22 mW, 160 us on a 300 nm doughnut
// (see default_alpha_637). 589 nm: zero rate, so readout is non-perturbative.
RateModel default_rate_model(Wavelength w);

inline constexpr double kDefaultAlpha532 = 2.7 / (0.68 * 0.68);
double default_alpha_637();

inline constexpr double kDefaultIsat532 = 0.45;
inline constexpr double kDefaultIsat637 = 7.5;
inline constexpr double kRhoSteady532 = 0.75;
inline constexpr double kRhoSteady637 = 0.05;

double steady_state_population(const RateCoefficients& rates);

// Total conversion rate at `intensity` mW, including the polarization factor.
double conversion_rate(const RateModel& model, double intensity);

RateCoefficients split_rates(double total, double rho_st);

// Rates of `model` at `intensity`, with an extra multiplicative factor
// (polarization against the NV axis). Negative intensities clamp to zero.
RateCoefficients rates_at(const RateModel& model, double intensity, double factor = 1.0);

ChargeState evolve_charge(ChargeState state, const IlluminationStep& step);

ChargeState evolve_through_sequence(ChargeState state, std::span<const IlluminationStep> steps);

// Mean of rho_minus over a step of the given duration (the exact time average
// of the exponential relaxation). Equals the start value for zero rate or zero
// duration.
double mean_population(ChargeState state, const IlluminationStep& step);

}  // namespace csd
