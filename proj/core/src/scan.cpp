#include "csd/scan.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <thread>

#include "csd/errors.hpp"
#include "csd/rng.hpp"

namespace csd {

void Scene::validate() const {
  if (!(background_rate >= 0.0)) throw DomainError("background rate must be >= 0");
  for (const auto& nv : nvs) {
    if (!std::isfinite(nv.position.x) || !std::isfinite(nv.position.y)) {
      throw DomainError("NV position must be finite");
    }
    if (nv.axis_index < 0 || nv.axis_index >= kAxisCount) {
      throw DomainError("NV axis index must be 0..3");
    }
    if (!(nv.count_rate >= 0.0)) throw DomainError("NV count rate must be >= 0");
    nv.spin.validate();
  }
}

std::string_view to_string(PhaseRole role) {
  switch (role) {
    case PhaseRole::init: return "init";
    case PhaseRole::deplete: return "deplete";
    case PhaseRole::readout_charge: return "readout-charge";
    case PhaseRole::readout_spin: return "readout-spin";
  }
  return "?";
}

std::string_view to_string(SequenceKind kind) {
  switch (kind) {
    case SequenceKind::confocal: return "confocal";
    case SequenceKind::icsd: return "iCSD";
    case SequenceKind::rcsd: return "rCSD";
    case SequenceKind::gsd: return "GSD";
    case SequenceKind::custom: return "custom";
  }
  return "?";
}

SequenceKind parse_sequence_kind(std::string_view text) {
  if (text == "confocal") return SequenceKind::confocal;
  if (text == "iCSD" || text == "icsd") return SequenceKind::icsd;
  if (text == "rCSD" || text == "rcsd") return SequenceKind::rcsd;
  if (text == "GSD" || text == "gsd") return SequenceKind::gsd;
  if (text == "custom") return SequenceKind::custom;
  throw DomainError("unknown sequence kind '" + std::string(text) + "'");
}

void PulseSequence::validate() const {
  int readouts = 0;
  for (const auto& phase : phases) {
    phase.beam.validate();
    phase.rate_model.validate();
    if (!(phase.duration >= 0.0)) throw DomainError("phase duration must be >= 0");
    if (phase.is_readout()) ++readouts;
  }
  if (readouts > 1) throw DomainError("a pulse sequence holds at most one readout phase");
  detection.validate();
  if (!(i_sat_fluor > 0.0)) throw DomainError("fluorescence saturation power must be > 0");
}

const RateModel& RateTable::at(Wavelength w) const {
  switch (w) {
    case Wavelength::nm532: return nm532;
    case Wavelength::nm589: return nm589;
    case Wavelength::nm637: return nm637;
  }
  return nm532;
}

RateModel& RateTable::at(Wavelength w) {
  return const_cast<RateModel&>(std::as_const(*this).at(w));
}

namespace {

PulsePhase make_phase(PhaseRole role, const RateModel& model, BeamKind kind, double width,
                      double power, double duration, const PhaseSettings& overrides) {
  PulsePhase phase;
  phase.role = role;
  phase.rate_model = model;
  phase.beam.kind = overrides.beam.value_or(kind);
  phase.beam.width = overrides.width.value_or(width);
  phase.beam.peak_intensity = overrides.power.value_or(power);
  phase.duration = overrides.duration.value_or(duration);
  return phase;
}

}  // namespace

PulseSequence preset_sequence(SequenceKind kind, const PresetOptions& options) {
  const double w = options.detection_width;
  const auto& rates = options.rates;
  // Focused "G" beams share the FWHM of the detection lobe.
  const double g_fwhm = 0.5 * w;

  PulseSequence seq;
  seq.label = kind;
  seq.detection = {BeamKind::standing_cos2, w, 1.0, {}};

  auto readout = [&] {
    if (options.spin_readout) {
      return make_phase(PhaseRole::readout_spin, rates.nm532, BeamKind::gaussian, g_fwhm, 0.7, 0.3,
                        options.readout);
    }
    return make_phase(PhaseRole::readout_charge, rates.nm589, BeamKind::gaussian, g_fwhm, 0.1, 5.0,
                      options.readout);
  };

  switch (kind) {
    case SequenceKind::confocal:
      seq.phases.push_back(make_phase(PhaseRole::readout_charge, rates.nm532, BeamKind::gaussian,
                                      g_fwhm, 0.68, 5.0, options.readout));
      break;
    case SequenceKind::icsd:
      seq.phases.push_back(make_phase(PhaseRole::init, rates.nm637, BeamKind::gaussian, g_fwhm,
                                      10.0, 100.0, options.init));
      seq.phases.push_back(make_phase(PhaseRole::deplete, rates.nm532,
                                      BeamKind::standing_sin2_doughnut, w, 34.0, 40.0,
                                      options.deplete));
      seq.phases.push_back(readout());
      break;
    case SequenceKind::rcsd:
      seq.phases.push_back(make_phase(PhaseRole::init, rates.nm532, BeamKind::gaussian, g_fwhm,
                                      0.68, 2.0, options.init));
      seq.phases.push_back(make_phase(PhaseRole::deplete, rates.nm637,
                                      BeamKind::standing_sin2_doughnut, w, 22.0, 50.0,
                                      options.deplete));
      seq.phases.push_back(readout());
      break;
    case SequenceKind::gsd: {
      auto phase = make_phase(PhaseRole::readout_charge, rates.nm532,
                              BeamKind::standing_sin2_doughnut, w, 34.0, 5.0, options.readout);
      phase.readout = ReadoutModel::saturable;
      seq.phases.push_back(phase);
      break;
    }
    case SequenceKind::custom:
      throw DomainError("no preset for a custom sequence");
  }
  seq.validate();
  return seq;
}

double axis_azimuth(int axis_index) {
  const Vec3 a = tetrahedral_axis(axis_index);
  return std::atan2(a.y, a.x);
}

double polarization_factor(const PulseSequence& sequence, int axis_index) {
  if (!sequence.polarization) return 1.0;
  const auto& pol = *sequence.polarization;
  const double angle = pol.angle_deg * kPi / 180.0;
  return 1.0 + pol.amplitude * std::cos(2.0 * (angle - axis_azimuth(axis_index)));
}

PointResult run_sequence_at_point(const Scene& scene, const PulseSequence& sequence, Vec2 scan_pos) {
  PointResult out;
  out.nvs.reserve(scene.nvs.size());
  double readout_time = 0.0;
  for (const auto& phase : sequence.phases) {
    if (phase.is_readout()) readout_time += phase.duration;
  }

  for (const auto& nv : scene.nvs) {
    const Vec2 offset = nv.position - scan_pos;
    const double k = polarization_factor(sequence, nv.axis_index);
    const double h = beam_shape(sequence.detection.kind, sequence.detection.width, offset.norm());

    NVPointResult result;
    result.detection = h;
    ChargeState state = nv.charge;
    bool read = false;
    for (const auto& phase : sequence.phases) {
      const double intensity = beam_intensity(phase.beam, offset);
      const IlluminationStep step{rates_at(phase.rate_model, intensity, k), phase.duration};
      if (!phase.is_readout()) {
        state = evolve_charge(state, step);
        continue;
      }
      if (!read) {
        result.charge = state;
        read = true;
      }
      const double exposure = nv.count_rate * phase.duration * h;
      if (phase.readout == ReadoutModel::saturable) {
        const double peak = phase.beam.peak_intensity;
        if (peak > 0.0) {
          const double s = intensity / (intensity + sequence.i_sat_fluor);
          const double s_ref = peak / (peak + sequence.i_sat_fluor);
          result.counts += exposure * s / s_ref;
        }
      } else if (sequence.readout_back_action) {
        result.counts += exposure * mean_population(state, step);
        state = evolve_charge(state, step);
      } else {
        result.counts += exposure * state.rho_minus();
      }
    }
    if (!read) result.charge = state;
    out.total_counts += result.counts;
    out.nvs.push_back(result);
  }
  out.total_counts += scene.background_rate * readout_time;
  return out;
}

void ScanGrid::validate() const {
  if (!(pitch > 0.0)) throw DomainError("grid pitch must be > 0");
  if (width <= 0 || height <= 0) throw DomainError("grid must have at least one pixel");
}

ScanGrid ScanGrid::centered(Vec2 center, double pitch, int width, int height) {
  ScanGrid g;
  g.pitch = pitch;
  g.width = width;
  g.height = height;
  g.origin = {center.x - 0.5 * (width - 1) * pitch, center.y - 0.5 * (height - 1) * pitch};
  return g;
}

ScanImage simulate_scan(const Scene& scene, const PulseSequence& sequence, const ScanGrid& grid,
                        const ScanOptions& options) {
  grid.validate();
  scene.validate();
  sequence.validate();

  ScanImage image;
  image.origin = grid.origin;
  image.pitch = grid.pitch;
  image.width = grid.width;
  image.height = grid.height;
  image.sampled = options.seed.has_value();
  image.values.assign(static_cast<std::size_t>(grid.width) * grid.height, 0.0);

  auto render_rows = [&](int first, int stride) {
    for (int row = first; row < grid.height; row += stride) {
      for (int col = 0; col < grid.width; ++col) {
        const double expected =
            run_sequence_at_point(scene, sequence, grid.pixel_center(row, col)).total_counts;
        double value = expected;
        if (options.seed) {
          SplitMix64 gen(substream_seed(*options.seed, static_cast<std::uint64_t>(row),
                                        static_cast<std::uint64_t>(col)));
          value = 0.0;
          if (expected > 0.0) {
            std::poisson_distribution<long long> poisson(expected);
            value = static_cast<double>(poisson(gen));
          }
        }
        image.at(row, col) = value;
      }
    }
  };

  int threads = options.threads;
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min(threads, grid.height);
  if (threads <= 1) {
    render_rows(0, 1);
  } else {
    std::vector<std::jthread> workers;
    workers.reserve(threads);
    for (int t = 0; t < threads; ++t) workers.emplace_back(render_rows, t, threads);
  }
  return image;
}

Curve simulate_profile(const Scene& scene, const PulseSequence& sequence, Vec2 from, Vec2 to,
                       int samples) {
  if (samples < 2) throw DomainError("a profile needs at least 2 samples");
  scene.validate();
  sequence.validate();
  const Vec2 d = to - from;
  const double length = d.norm();
  Curve out;
  out.reserve(static_cast<std::size_t>(samples));
  for (int i = 0; i < samples; ++i) {
    const double f = static_cast<double>(i) / (samples - 1);
    out.push_back({f * length, run_sequence_at_point(scene, sequence, from + f * d).total_counts});
  }
  return out;
}

Curve extract_row(const ScanImage& image, int row) {
  if (row < 0 || row >= image.height) throw DomainError("row index out of bounds");
  Curve curve;
  curve.reserve(image.width);
  for (int col = 0; col < image.width; ++col) {
    curve.push_back({image.origin.x + col * image.pitch, image.at(row, col)});
  }
  return curve;
}

Curve extract_column(const ScanImage& image, int col) {
  if (col < 0 || col >= image.width) throw DomainError("column index out of bounds");
  Curve curve;
  curve.reserve(image.height);
  for (int row = 0; row < image.height; ++row) {
    curve.push_back({image.origin.y + row * image.pitch, image.at(row, col)});
  }
  return curve;
}

Curve extract_line(const ScanImage& image, Vec2 from, Vec2 to) {
  auto pixel_of = [&](Vec2 p) {
    const double col = std::round((p.x - image.origin.x) / image.pitch);
    const double row = std::round((p.y - image.origin.y) / image.pitch);
    return std::pair{row, col};
  };
  auto inside = [&](Vec2 p) {
    const auto [row, col] = pixel_of(p);
    return row >= 0 && row < image.height && col >= 0 && col < image.width;
  };
  if (!inside(from) || !inside(to)) throw DomainError("line endpoints fall outside the image");

  const double length = (to - from).norm();
  const int steps = std::max(1, static_cast<int>(std::ceil(length / image.pitch)));
  Curve curve;
  curve.reserve(steps + 1);
  for (int i = 0; i <= steps; ++i) {
    const double t = static_cast<double>(i) / steps;
    const Vec2 p = from + t * (to - from);
    const auto [row, col] = pixel_of(p);
    curve.push_back({t * length, image.at(static_cast<int>(row), static_cast<int>(col))});
  }
  return curve;
}

double fwhm_from_profile(const Curve& curve, FeaturePolarity polarity) {
  if (curve.size() < 3) throw DomainError("profile needs at least three samples");
  const std::size_t n = curve.size();
  std::vector<double> v(n);
  std::transform(curve.begin(), curve.end(), v.begin(), [](const CurvePoint& p) { return p.value; });

  std::size_t ext = 0;
  double half = 0.0;
  if (polarity == FeaturePolarity::peak) {
    ext = static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
    if (!(v[ext] > 0.0)) throw NumericalError("feature not resolved");
    half = 0.5 * v[ext];
  } else {
    // The dip is measured against its lower shoulder, which is the far-field
    // baseline for a flat background and the ring crest for a dark spot inside
    // a finite detection lobe.
    std::vector<double> left_max(n), right_max(n);
    left_max[0] = v[0];
    for (std::size_t i = 1; i < n; ++i) left_max[i] = std::max(left_max[i - 1], v[i]);
    right_max[n - 1] = v[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) right_max[i] = std::max(right_max[i + 1], v[i]);
    double best = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double depth = std::min(left_max[i], right_max[i]) - v[i];
      if (depth > best) {
        best = depth;
        ext = i;
      }
    }
    if (!(best > 0.0)) throw NumericalError("feature not resolved");
    // Flip so the walk below looks for values falling under the half level.
    const double top = v[ext] + best;
    for (auto& x : v) x = top - x;
    half = 0.5 * best;
  }

  auto cross = [&](std::size_t inner, std::size_t outer) {
    const double t = (v[inner] - half) / (v[inner] - v[outer]);
    return curve[inner].position + t * (curve[outer].position - curve[inner].position);
  };

  std::optional<double> left;
  for (std::size_t i = ext; i > 0; --i) {
    if (v[i - 1] < half) {
      left = cross(i, i - 1);
      break;
    }
  }
  std::optional<double> right;
  for (std::size_t i = ext; i + 1 < n; ++i) {
    if (v[i + 1] < half) {
      right = cross(i, i + 1);
      break;
    }
  }
  if (!left || !right) throw NumericalError("feature not resolved");
  return std::abs(*right - *left);
}

double measure_feature_fwhm(const Scene& scene, const PulseSequence& sequence, Vec2 center,
                            FeaturePolarity polarity, double initial_halfwidth, int samples) {
  if (!(initial_halfwidth > 0.0)) throw DomainError("profile window must be > 0");
  double half = initial_halfwidth;
  double fwhm = 0.0;
  for (int pass = 0; pass < 24; ++pass) {
    const Curve c = simulate_profile(scene, sequence, center - Vec2{half, 0.0},
                                     center + Vec2{half, 0.0}, samples);
    fwhm = fwhm_from_profile(c, polarity);
    if (fwhm >= 0.2 * half) break;
    half = 2.5 * fwhm;
  }
  return fwhm;
}

MaximaReport count_maxima(const Curve& curve, double min_prominence) {
  MaximaReport report;
  const std::size_t n = curve.size();
  if (n == 0) return report;
  double top = curve[0].value;
  for (const auto& p : curve) top = std::max(top, p.value);
  if (!(top > 0.0)) return report;
  const double threshold = min_prominence * top;

  // Plateaus count once; a maximum needs a drop of `threshold` on both sides
  // before the curve climbs higher.
  std::vector<std::size_t> peaks;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = curve[i].value;
    double left_valley = v;
    bool left_ok = (i == 0);
    for (std::size_t j = i; j-- > 0;) {
      if (curve[j].value > v) break;
      if (curve[j].value == v && j + 1 == i) {
        left_ok = false;  // only the leftmost sample of a plateau
        break;
      }
      left_valley = std::min(left_valley, curve[j].value);
      if (v - left_valley >= threshold) {
        left_ok = true;
        break;
      }
      if (j == 0) left_ok = true;
    }
    if (!left_ok) continue;
    double right_valley = v;
    bool right_ok = (i + 1 == n);
    for (std::size_t j = i + 1; j < n; ++j) {
      if (curve[j].value > v) break;
      right_valley = std::min(right_valley, curve[j].value);
      if (v - right_valley >= threshold) {
        right_ok = true;
        break;
      }
      if (j + 1 == n) right_ok = true;
    }
    if (right_ok) peaks.push_back(i);
  }
  report.maxima = static_cast<int>(peaks.size());
  if (peaks.size() >= 2) {
    std::vector<std::size_t> order = peaks;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return curve[a].value > curve[b].value; });
    const std::size_t a = std::min(order[0], order[1]);
    const std::size_t b = std::max(order[0], order[1]);
    double valley = curve[a].value;
    for (std::size_t j = a; j <= b; ++j) valley = std::min(valley, curve[j].value);
    const double lower = std::min(curve[a].value, curve[b].value);
    report.dip_fraction = (lower - valley) / top;
  }
  return report;
}

}  // namespace csd
