#include "csd/spin.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "csd/errors.hpp"
#include "csd/levenberg_marquardt.hpp"

namespace csd {

void SpinParams::validate() const {
  if (!(zfs_d > 0.0)) throw DomainError("zero-field splitting must be > 0");
  if (!(gyro > 0.0)) throw DomainError("gyromagnetic ratio must be > 0");
  if (!(linewidth > 0.0)) throw DomainError("ODMR linewidth must be > 0");
  if (!(contrast >= 0.0 && contrast <= 1.0)) throw DomainError("ODMR contrast must lie in [0, 1]");
  if (!(t2_star > 0.0)) throw DomainError("T2* must be > 0");
  if (!(rabi_decay > 0.0)) throw DomainError("Rabi decay time must be > 0");
  if (!(rabi_freq_at_unit_drive >= 0.0)) throw DomainError("Rabi scale must be >= 0");
}

Vec3 tetrahedral_axis(int axis_index) {
  static constexpr double s = 0.57735026918962576451;  // 1/sqrt(3)
  switch (axis_index) {
    case 0: return {s, s, s};
    case 1: return {s, -s, -s};
    case 2: return {-s, s, -s};
    case 3: return {-s, -s, s};
    default: throw DomainError("NV axis index must be 0..3");
  }
}

AxialField project_on_axis(const MagneticField& field, int axis_index) {
  const Vec3 n = tetrahedral_axis(axis_index);
  const double par = field.vector.dot(n);
  const Vec3 perp = field.vector - par * n;
  return {par, perp.norm()};
}

Matrix3 spin_hamiltonian(const MagneticField& field, int axis_index, const SpinParams& params) {
  const AxialField b = project_on_axis(field, axis_index);
  const double d = params.zfs_d * 1000.0;
  const double bz = params.gyro * b.parallel;
  const double bx = params.gyro * b.perpendicular / std::sqrt(2.0);
  return Matrix3{{{d + bz, bx, 0.0}, {bx, 0.0, bx}, {0.0, bx, d - bz}}};
}

TransitionPair transition_frequencies(const MagneticField& field, int axis_index,
                                      const SpinParams& params) {
  const auto eig = eigen_symmetric(spin_hamiltonian(field, axis_index, params));
  const auto& e = eig.values;
  return {(e[1] - e[0]) / 1000.0, (e[2] - e[0]) / 1000.0};
}

Curve SpinTrace::as_curve() const {
  Curve c;
  c.reserve(abscissa.size());
  for (std::size_t i = 0; i < abscissa.size(); ++i) c.push_back({abscissa[i], values[i]});
  return c;
}

std::vector<double> spin_weights(const Scene& scene, const PulseSequence& sequence, Vec2 scan_pos) {
  const PointResult point = run_sequence_at_point(scene, sequence, scan_pos);
  std::vector<double> w(point.nvs.size(), 0.0);
  if (!(point.total_counts > 0.0)) return w;
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = point.nvs[i].counts / point.total_counts;
  return w;
}

double lorentzian(double f, double center, double fwhm) {
  const double x = 2.0 * (f - center) / fwhm;
  return 1.0 / (1.0 + x * x);
}

namespace {

void require_increasing(std::span<const double> xs, const char* what) {
  for (std::size_t i = 1; i < xs.size(); ++i) {
    if (!(xs[i] > xs[i - 1])) {
      throw DomainError(std::string(what) + " must be strictly increasing");
    }
  }
}

}  // namespace

OdmrSpectrum odmr_spectrum(const Scene& scene, const PulseSequence& sequence,
                           std::span<const double> mw_freqs_ghz, Vec2 scan_pos) {
  if (mw_freqs_ghz.empty()) throw DomainError("empty frequency list");
  require_increasing(mw_freqs_ghz, "microwave frequencies");
  const auto w = spin_weights(scene, sequence, scan_pos);

  std::vector<TransitionPair> lines;
  lines.reserve(scene.nvs.size());
  for (const auto& nv : scene.nvs) {
    lines.push_back(transition_frequencies(scene.field, nv.axis_index, nv.spin));
  }

  OdmrSpectrum out;
  out.abscissa.reserve(mw_freqs_ghz.size());
  out.values.reserve(mw_freqs_ghz.size());
  for (const double f_ghz : mw_freqs_ghz) {
    const double f = f_ghz * 1000.0;
    double dip = 0.0;
    for (std::size_t i = 0; i < scene.nvs.size(); ++i) {
      if (w[i] == 0.0) continue;
      const auto& spin = scene.nvs[i].spin;
      const double lm = lorentzian(f, lines[i].minus * 1000.0, spin.linewidth);
      const double lp = lorentzian(f, lines[i].plus * 1000.0, spin.linewidth);
      // Both transitions deplete the same m_s = 0 population, so overlapping
      // lines saturate at the single-line contrast.
      dip += w[i] * spin.contrast * (1.0 - (1.0 - lm) * (1.0 - lp));
    }
    out.abscissa.push_back(f);
    out.values.push_back(1.0 - dip);
  }
  return out;
}

RabiTrace rabi_trace(const Scene& scene, const PulseSequence& sequence, double drive_mhz,
                     double mw_freq_ghz, std::span<const double> times_us, Vec2 scan_pos) {
  if (!(drive_mhz >= 0.0)) throw DomainError("drive must be >= 0");
  require_increasing(times_us, "Rabi times");
  if (!times_us.empty() && !(times_us.front() >= 0.0)) throw DomainError("times must be >= 0");
  const auto w = spin_weights(scene, sequence, scan_pos);

  struct Response {
    double amplitude;
    double frequency;  // MHz
  };
  std::vector<Response> response;
  response.reserve(scene.nvs.size());
  for (const auto& nv : scene.nvs) {
    const auto lines = transition_frequencies(scene.field, nv.axis_index, nv.spin);
    const double dm = (mw_freq_ghz - lines.minus) * 1000.0;
    const double dp = (mw_freq_ghz - lines.plus) * 1000.0;
    const double detuning = std::abs(dm) < std::abs(dp) ? dm : dp;
    const double omega = drive_mhz * nv.spin.rabi_freq_at_unit_drive;
    const double general = std::hypot(omega, detuning);
    response.push_back({general > 0.0 ? (omega * omega) / (general * general) : 0.0, general});
  }

  RabiTrace out;
  out.abscissa.assign(times_us.begin(), times_us.end());
  out.values.reserve(times_us.size());
  for (const double t : times_us) {
    double dip = 0.0;
    for (std::size_t i = 0; i < scene.nvs.size(); ++i) {
      if (w[i] == 0.0) continue;
      const auto& spin = scene.nvs[i].spin;
      const double s = std::sin(kPi * response[i].frequency * t);
      dip += w[i] * spin.contrast * response[i].amplitude * s * s * std::exp(-t / spin.rabi_decay);
    }
    out.values.push_back(1.0 - dip);
  }
  return out;
}

RamseyTrace ramsey_trace(const Scene& scene, const PulseSequence& sequence, double detuning_mhz,
                         std::span<const double> taus_us, Vec2 scan_pos) {
  require_increasing(taus_us, "Ramsey delays");
  if (!taus_us.empty() && !(taus_us.front() >= 0.0)) throw DomainError("delays must be >= 0");
  const auto w = spin_weights(scene, sequence, scan_pos);

  RamseyTrace out;
  out.abscissa.assign(taus_us.begin(), taus_us.end());
  out.values.reserve(taus_us.size());
  for (const double tau : taus_us) {
    double dip = 0.0;
    for (std::size_t i = 0; i < scene.nvs.size(); ++i) {
      if (w[i] == 0.0) continue;
      const auto& spin = scene.nvs[i].spin;
      const double envelope = std::exp(-(tau / spin.t2_star) * (tau / spin.t2_star));
      dip += w[i] * 0.5 * spin.contrast * (1.0 - std::cos(2.0 * kPi * detuning_mhz * tau) * envelope);
    }
    out.values.push_back(1.0 - dip);
  }
  return out;
}

double axis_angle_deg(const MagneticField& field, int axis_index) {
  const double b = field.magnitude();
  if (b == 0.0) return 0.0;
  const double c = std::min(1.0, std::abs(field.vector.dot(tetrahedral_axis(axis_index))) / b);
  return std::acos(c) * 180.0 / kPi;
}

AxialField axial_field_from_pair(double minus_ghz, double plus_ghz, const SpinParams& params) {
  const double d = params.zfs_d * 1000.0;
  const double wm = minus_ghz * 1000.0;
  const double wp = plus_ghz * 1000.0;
  // Eigenvalues sum to trace(H) = 2D.
  const double e0 = (2.0 * d - wm - wp) / 3.0;
  const double e1 = e0 + wm;
  const double e2 = e0 + wp;
  // For this H: e0 e1 + e0 e2 + e1 e2 = D^2 - bz^2 - bx^2 and e0 e1 e2 = -D bx^2,
  // with bz, bx the parallel and perpendicular Zeeman terms in MHz.
  const double c2 = e0 * e1 + e0 * e2 + e1 * e2;
  const double bx2 = std::max(0.0, -e0 * e1 * e2 / d);
  const double bz2 = std::max(0.0, d * d - bx2 - c2);
  return {std::sqrt(bz2) / params.gyro, std::sqrt(bx2) / params.gyro};
}

FieldEstimate infer_field(std::span<const FrequencyObservation, 2> obs, const SpinParams& params) {
  params.validate();
  const int ia = obs[0].axis_index;
  const int ib = obs[1].axis_index;
  if (ia == ib) throw DomainError("field inference needs two distinct NV axes");
  const Vec3 u = tetrahedral_axis(ia);
  const Vec3 v = tetrahedral_axis(ib);

  const std::array<double, 4> target{obs[0].minus_ghz * 1000.0, obs[0].plus_ghz * 1000.0,
                                     obs[1].minus_ghz * 1000.0, obs[1].plus_ghz * 1000.0};
  for (double f : target) {
    if (!(f > 0.0) || !std::isfinite(f)) throw DomainError("transition frequencies must be > 0");
  }

  auto residual = [&](const Eigen::VectorXd& x, Eigen::VectorXd& r) {
    const MagneticField field{{x[0], x[1], x[2]}};
    const auto fa = transition_frequencies(field, ia, params);
    const auto fb = transition_frequencies(field, ib, params);
    r[0] = fa.minus * 1000.0 - target[0];
    r[1] = fa.plus * 1000.0 - target[1];
    r[2] = fb.minus * 1000.0 - target[2];
    r[3] = fb.plus * 1000.0 - target[3];
  };

  // Closed-form per-NV components give the field up to the signs of the two
  // parallel projections and of the component normal to both axes.
  const AxialField fa = axial_field_from_pair(obs[0].minus_ghz, obs[0].plus_ghz, params);
  const AxialField fb = axial_field_from_pair(obs[1].minus_ghz, obs[1].plus_ghz, params);
  const double magnitude = 0.5 * (std::hypot(fa.parallel, fa.perpendicular) +
                                  std::hypot(fb.parallel, fb.perpendicular));
  const double g = u.dot(v);
  Vec3 normal = u.cross(v);
  normal = (1.0 / normal.norm()) * normal;

  std::vector<Eigen::Vector3d> starts;
  for (const double sa : {1.0, -1.0}) {
    for (const double sb : {1.0, -1.0}) {
      const double pa = sa * fa.parallel;
      const double pb = sb * fb.parallel;
      const double ca = (pa - g * pb) / (1.0 - g * g);
      const double cb = (pb - g * pa) / (1.0 - g * g);
      const double inplane2 = ca * ca + cb * cb + 2.0 * ca * cb * g;
      const double cn = std::sqrt(std::max(0.0, magnitude * magnitude - inplane2));
      for (const double sn : {1.0, -1.0}) {
        const Vec3 b = ca * u + cb * v + (sn * cn) * normal;
        starts.emplace_back(b.x, b.y, b.z);
      }
    }
  }
  // Coarse directional starts as a fallback for inconsistent data.
  const double scale = std::max(magnitude, 1.0);
  for (int k = 0; k < kAxisCount; ++k) {
    const Vec3 a = tetrahedral_axis(k);
    starts.emplace_back(scale * a.x, scale * a.y, scale * a.z);
    starts.emplace_back(-scale * a.x, -scale * a.y, -scale * a.z);
  }

  LmOptions options;
  options.step_tolerance = 1e-13;
  options.gradient_tolerance = 1e-13;
  options.fd_relative_step = 1e-5;

  bool any_converged = false;
  double best_rss = std::numeric_limits<double>::infinity();
  Eigen::Vector3d best = Eigen::Vector3d::Zero();
  for (const auto& start : starts) {
    const LmResult fit = levenberg_marquardt(residual, start, 4, options);
    any_converged = any_converged || fit.converged;
    const bool better =
        fit.rss < best_rss ||
        (fit.rss == best_rss &&
         std::lexicographical_compare(fit.params.data(), fit.params.data() + 3, best.data(),
                                      best.data() + 3));
    if (better) {
      best_rss = fit.rss;
      best = fit.params;
    }
  }
  if (!any_converged) {
    throw NumericalError("field inference did not converge", std::sqrt(best_rss));
  }

  FieldEstimate est;
  est.field = MagneticField{{best[0], best[1], best[2]}};
  est.magnitude = est.field.magnitude();
  est.angles_deg = {axis_angle_deg(est.field, ia), axis_angle_deg(est.field, ib)};
  est.residual_mhz = std::sqrt(best_rss);
  est.starts = static_cast<int>(starts.size());
  return est;
}

}  // namespace csd
