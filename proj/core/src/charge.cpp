#include "csd/charge.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "csd/errors.hpp"
#include "csd/optics.hpp"

namespace csd {

ChargeState::ChargeState(double rho_minus) : rho_minus_(rho_minus) {
  if (!(rho_minus >= 0.0 && rho_minus <= 1.0)) {
    throw DomainError("charge population must lie in [0, 1], got " + std::to_string(rho_minus));
  }
}

std::string_view to_string(Wavelength w) {
  switch (w) {
    case Wavelength::nm532: return "532";
    case Wavelength::nm589: return "589";
    case Wavelength::nm637: return "637";
  }
  return "?";
}

Wavelength parse_wavelength(std::string_view text) {
  if (text == "532") return Wavelength::nm532;
  if (text == "589") return Wavelength::nm589;
  if (text == "637") return Wavelength::nm637;
  throw DomainError("unknown wavelength '" + std::string(text) + "' (expected 532, 589 or 637)");
}

void RateModel::validate() const {
  if (!(alpha >= 0.0)) throw DomainError("rate model alpha must be >= 0");
  if (!(i_sat > 0.0)) throw DomainError("rate model i_sat must be > 0");
  if (!(rho_st >= 0.0 && rho_st <= 1.0)) throw DomainError("rate model rho_st must lie in [0, 1]");
  if (!(polarization_factor >= 0.0)) throw DomainError("polarization factor must be >= 0");
}

double default_alpha_637() {
  // 28.6 nm best rCSD width with a 22 mW, 160 us, 300 nm doughnut.
  static const double alpha = beta_from_resolution(28.6, 300.0) / (22.0 * 22.0 * 160.0);
  return alpha;
}

RateModel default_rate_model(Wavelength w) {
  switch (w) {
    case Wavelength::nm532:
      return {w, kDefaultAlpha532, kDefaultIsat532, kRhoSteady532, RateRegime::pure_quadratic, 1.0};
    case Wavelength::nm637:
      return {w, default_alpha_637(), kDefaultIsat637, kRhoSteady637, RateRegime::pure_quadratic, 1.0};
    case Wavelength::nm589:
      return {w, 0.0, 1.0, kRhoSteady532, RateRegime::pure_quadratic, 1.0};
  }
  throw DomainError("unknown wavelength");
}

double steady_state_population(const RateCoefficients& rates) {
  const double total = rates.total();
  if (!(total > 0.0)) throw DomainError("no-illumination steady state undefined");
  return std::clamp(rates.gamma_r / total, 0.0, 1.0);
}

double conversion_rate(const RateModel& model, double intensity) {
  if (!(intensity >= 0.0)) throw DomainError("intensity must be >= 0");
  const double quadratic = model.alpha * intensity * intensity;
  const double rate = model.regime == RateRegime::pure_quadratic
                          ? quadratic
                          : quadratic / (1.0 + intensity / model.i_sat);
  return rate * model.polarization_factor;
}

RateCoefficients split_rates(double total, double rho_st) {
  if (!(total >= 0.0)) throw DomainError("total rate must be >= 0");
  if (!(rho_st >= 0.0 && rho_st <= 1.0)) throw DomainError("rho_st must lie in [0, 1]");
  return {rho_st * total, (1.0 - rho_st) * total};
}

RateCoefficients rates_at(const RateModel& model, double intensity, double factor) {
  const double total = conversion_rate(model, std::max(intensity, 0.0)) * factor;
  return split_rates(total, model.rho_st);
}

ChargeState evolve_charge(ChargeState state, const IlluminationStep& step) {
  const double gamma = step.rates.total();
  if (!(gamma > 0.0) || step.duration <= 0.0) return state;
  const double rho_st = step.rates.gamma_r / gamma;
  const double decay = std::exp(-gamma * step.duration);
  const double rho = rho_st + (state.rho_minus() - rho_st) * decay;
  return ChargeState(std::clamp(rho, 0.0, 1.0));
}

ChargeState evolve_through_sequence(ChargeState state, std::span<const IlluminationStep> steps) {
  for (const auto& step : steps) state = evolve_charge(state, step);
  return state;
}

double mean_population(ChargeState state, const IlluminationStep& step) {
  const double gamma = step.rates.total();
  const double x = gamma * step.duration;
  if (!(x > 0.0)) return state.rho_minus();
  const double rho_st = step.rates.gamma_r / gamma;
  // (1 - e^{-x}) / x, written with expm1 for small x.
  const double weight = -std::expm1(-x) / x;
  return std::clamp(rho_st + (state.rho_minus() - rho_st) * weight, 0.0, 1.0);
}

}  // namespace csd
