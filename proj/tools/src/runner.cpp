#include "runner.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <ostream>
#include <random>
#include <sstream>

#include "csd/analysis.hpp"
#include "csd/errors.hpp"
#include "csd/image_io.hpp"
#include "csd/optics.hpp"
#include "csd/rng.hpp"
#include "csd/spin.hpp"

namespace csd::tools {

const std::string& RunReport::value(const std::string& metric) const {
  for (const auto& r : rows) {
    if (r.metric == metric) return r.value;
  }
  throw std::out_of_range("no summary metric " + metric);
}

bool RunReport::has(const std::string& metric) const {
  return std::any_of(rows.begin(), rows.end(), [&](const SummaryRow& r) { return r.metric == metric; });
}

namespace {

class Output {
 public:
  Output(const RunOptions& options, RunReport& report) : options_(options), report_(report) {}

  void metric(const std::string& name, double value, const std::string& unit) {
    report_.rows.push_back({name, format_number(value), unit});
  }
  void label(const std::string& name, const std::string& value) {
    report_.rows.push_back({name, value, "label"});
  }

  void file(const std::string& name, const std::function<void(std::ostream&)>& body) {
    const auto path = options_.output_dir / name;
    std::ostringstream buffer;
    body(buffer);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << buffer.str();
    out.close();
    if (!out) throw IoError("write failed for " + path.string());
    report_.artifacts.push_back(name);
    report_.rows.push_back({"artifact", name, "file"});
    log("wrote " + path.string());
  }

  void log(const std::string& line) const {
    if (options_.log) *options_.log << line << '\n';
  }

 private:
  const RunOptions& options_;
  RunReport& report_;
};

FeaturePolarity polarity_of(SequenceKind kind) {
  return kind == SequenceKind::icsd || kind == SequenceKind::gsd ? FeaturePolarity::dip
                                                                 : FeaturePolarity::peak;
}

std::string mode_name(SequenceKind kind) {
  std::string s(to_string(kind));
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::vector<double> linspace(double start, double stop, int points) {
  std::vector<double> out(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    out[static_cast<std::size_t>(i)] =
        points == 1 ? start : start + (stop - start) * i / (points - 1);
  }
  return out;
}

// Shape metrics come from the noise-free centre row so that shot noise does
// not register as extra maxima.
void image_metrics(Output& out, const std::string& prefix, const ExperimentConfig& cfg,
                   const ScanImage& image, SequenceKind kind) {
  const double peak = *std::max_element(image.values.begin(), image.values.end());
  out.metric(prefix + "peak_counts", peak, "counts");
  const int row = image.height / 2;
  const Vec2 left{image.origin.x, image.origin.y + row * image.pitch};
  const Vec2 right{image.origin.x + (image.width - 1) * image.pitch, left.y};
  const Curve expected = image.width >= 2
                             ? simulate_profile(cfg.scene, cfg.sequence(kind), left, right, image.width)
                             : Curve{};
  const MaximaReport maxima = count_maxima(expected);
  out.metric(prefix + "profile_maxima", maxima.maxima, "count");
  if (maxima.maxima >= 2) out.metric(prefix + "dip_fraction", maxima.dip_fraction, "ratio");
  if (cfg.scene.nvs.size() != 1) return;
  try {
    out.metric(prefix + "fwhm", fwhm_from_profile(expected, polarity_of(kind)), "nm");
  } catch (const std::exception&) {
    // unresolved feature: the metric is omitted
  }
}

ScanImage run_scan(const ExperimentConfig& cfg, SequenceKind kind, std::uint64_t stream) {
  const auto grid = ScanGrid::centered(cfg.grid.center, cfg.grid.pitch, cfg.grid.width, cfg.grid.height);
  ScanOptions options;
  if (cfg.seed) options.seed = substream_seed(*cfg.seed, 0x5ca0, stream);
  options.threads = cfg.threads;
  return simulate_scan(cfg.scene, cfg.sequence(kind), grid, options);
}

void run_scan_kind(const ExperimentConfig& cfg, Output& out) {
  const ScanImage image = run_scan(cfg, cfg.preset, 0);
  out.file("scan.pgm", [&](std::ostream& s) { write_pgm(s, image); });
  out.file("profile.csv", [&](std::ostream& s) {
    write_curve_csv(s, "x_nm", extract_row(image, image.height / 2));
  });
  out.label("preset", std::string(to_string(cfg.preset)));
  image_metrics(out, "", cfg, image, cfg.preset);
}

void run_compare_modes(const ExperimentConfig& cfg, Output& out) {
  const SequenceKind modes[] = {SequenceKind::confocal, SequenceKind::gsd, SequenceKind::icsd,
                                SequenceKind::rcsd};
  std::uint64_t stream = 0;
  for (const auto kind : modes) {
    const ScanImage image = run_scan(cfg, kind, stream++);
    const std::string name = mode_name(kind);
    out.file(name + ".pgm", [&](std::ostream& s) { write_pgm(s, image); });
    out.file(name + "_profile.csv", [&](std::ostream& s) {
      write_curve_csv(s, "x_nm", extract_row(image, image.height / 2));
    });
    image_metrics(out, name + "_", cfg, image, kind);
  }
}

void spin_weight_metrics(const ExperimentConfig& cfg, const PulseSequence& seq, Output& out) {
  const auto w = spin_weights(cfg.scene, seq, cfg.spectrum.position);
  for (std::size_t i = 0; i < w.size(); ++i) {
    const auto& nv = cfg.scene.nvs[i];
    const auto lines = transition_frequencies(cfg.scene.field, nv.axis_index, nv.spin);
    const std::string p = "nv" + std::to_string(i) + "_";
    out.metric(p + "weight", w[i], "ratio");
    out.metric(p + "omega_minus", lines.minus, "GHz");
    out.metric(p + "omega_plus", lines.plus, "GHz");
  }
}

void trace_metrics(const SpinTrace& trace, Output& out) {
  const auto it = std::min_element(trace.values.begin(), trace.values.end());
  out.metric("min_signal", *it, "ratio");
}

void run_odmr(const ExperimentConfig& cfg, Output& out) {
  const PulseSequence seq = cfg.sequence();
  const auto freqs = linspace(cfg.spectrum.start, cfg.spectrum.stop, cfg.spectrum.points);
  const auto spectrum = odmr_spectrum(cfg.scene, seq, freqs, cfg.spectrum.position);
  out.file("odmr.csv", [&](std::ostream& s) {
    write_curve_csv(s, "frequency_mhz", spectrum.as_curve());
  });
  out.label("preset", std::string(to_string(cfg.preset)));
  spin_weight_metrics(cfg, seq, out);
  trace_metrics(spectrum, out);

  int dips = 0;
  const auto& v = spectrum.values;
  for (std::size_t i = 1; i + 1 < v.size(); ++i) {
    if (v[i] < v[i - 1] && v[i] <= v[i + 1] && 1.0 - v[i] >= cfg.spectrum.dip_threshold) ++dips;
  }
  out.metric("detected_dips", dips, "count");

  // Vector field from the first two NVs' lines, as one would from the
  // measured resonances.
  if (cfg.scene.nvs.size() >= 2 && cfg.scene.nvs[0].axis_index != cfg.scene.nvs[1].axis_index) {
    std::array<FrequencyObservation, 2> obs{};
    for (int k = 0; k < 2; ++k) {
      const auto& nv = cfg.scene.nvs[static_cast<std::size_t>(k)];
      const auto lines = transition_frequencies(cfg.scene.field, nv.axis_index, nv.spin);
      obs[static_cast<std::size_t>(k)] = {nv.axis_index, lines.minus, lines.plus};
    }
    const auto est = infer_field(std::span<const FrequencyObservation, 2>(obs), cfg.scene.nvs[0].spin);
    out.metric("inferred_field", est.magnitude, "G");
    out.metric("inferred_theta_nv0", est.angles_deg[0], "deg");
    out.metric("inferred_theta_nv1", est.angles_deg[1], "deg");
    out.metric("inference_residual", est.residual_mhz, "MHz");
  }
}

void run_rabi(const ExperimentConfig& cfg, Output& out) {
  const PulseSequence seq = cfg.sequence();
  const auto times = linspace(cfg.spectrum.start, cfg.spectrum.stop, cfg.spectrum.points);
  const auto trace = rabi_trace(cfg.scene, seq, cfg.spectrum.drive, cfg.spectrum.mw_freq, times,
                                cfg.spectrum.position);
  out.file("rabi.csv", [&](std::ostream& s) { write_curve_csv(s, "time_us", trace.as_curve()); });
  out.label("preset", std::string(to_string(cfg.preset)));
  spin_weight_metrics(cfg, seq, out);
  trace_metrics(trace, out);
  const auto& v = trace.values;
  for (std::size_t i = 1; i + 1 < v.size(); ++i) {
    if (v[i] < v[i - 1] && v[i] <= v[i + 1]) {
      out.metric("first_minimum_time", trace.abscissa[i], "us");
      break;
    }
  }
}

void run_ramsey(const ExperimentConfig& cfg, Output& out) {
  const PulseSequence seq = cfg.sequence();
  const auto taus = linspace(cfg.spectrum.start, cfg.spectrum.stop, cfg.spectrum.points);
  const auto trace = ramsey_trace(cfg.scene, seq, cfg.spectrum.detuning, taus, cfg.spectrum.position);
  out.file("ramsey.csv", [&](std::ostream& s) { write_curve_csv(s, "delay_us", trace.as_curve()); });
  out.label("preset", std::string(to_string(cfg.preset)));
  spin_weight_metrics(cfg, seq, out);
  trace_metrics(trace, out);
}

struct SweepInfo {
  const char* name;
  const char* unit;
};

SweepInfo describe(SweepVariable v) {
  switch (v) {
    case SweepVariable::init_power: return {"init_power", "mW"};
    case SweepVariable::init_duration: return {"init_duration", "us"};
    case SweepVariable::deplete_power: return {"deplete_power", "mW"};
    case SweepVariable::deplete_duration: return {"deplete_duration", "us"};
    case SweepVariable::readout_power: return {"readout_power", "mW"};
    case SweepVariable::readout_duration: return {"readout_duration", "us"};
  }
  return {"?", "?"};
}

void run_resolution_sweep(const ExperimentConfig& cfg, Output& out) {
  Scene scene = cfg.scene;
  if (scene.nvs.empty()) scene.nvs.emplace_back();
  if (scene.nvs.size() != 1) throw DomainError("resolution-sweep needs a single-NV scene");
  const Vec2 center = scene.nvs.front().position;
  const auto info = describe(cfg.sweep.variable);

  Curve curve;
  for (const double x : cfg.sweep.values) {
    ExperimentConfig c = cfg;
    auto& o = c.preset_options;
    switch (cfg.sweep.variable) {
      case SweepVariable::init_power: o.init.power = x; break;
      case SweepVariable::init_duration: o.init.duration = x; break;
      case SweepVariable::deplete_power: o.deplete.power = x; break;
      case SweepVariable::deplete_duration: o.deplete.duration = x; break;
      case SweepVariable::readout_power: o.readout.power = x; break;
      case SweepVariable::readout_duration: o.readout.duration = x; break;
    }
    const PulseSequence seq = c.sequence();
    const double w = measure_feature_fwhm(scene, seq, center, polarity_of(cfg.preset),
                                          cfg.sweep.window, cfg.sweep.samples);
    curve.push_back({x, w});
    out.log(std::string(info.name) + " " + format_number(x) + " -> fwhm " + format_number(w) + " nm");
  }
  out.file("resolution.csv", [&](std::ostream& s) {
    write_curve_csv(s, std::string(info.name) + "_" + info.unit, curve);
  });
  out.label("preset", std::string(to_string(cfg.preset)));
  out.label("sweep_variable", info.name);

  bool decreasing = true;
  std::size_t best = 0;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    if (i > 0 && !(curve[i].value < curve[i - 1].value)) decreasing = false;
    if (curve[i].value < curve[best].value) best = i;
  }
  out.metric("min_fwhm", curve[best].value, "nm");
  out.metric("optimum_value", curve[best].position, info.unit);
  out.metric("interior_optimum", best > 0 && best + 1 < curve.size() ? 1 : 0, "bool");
  out.metric("strictly_decreasing", decreasing ? 1 : 0, "bool");

  const bool power = cfg.sweep.variable == SweepVariable::deplete_power;
  const bool duration = cfg.sweep.variable == SweepVariable::deplete_duration;
  if ((power || duration) && curve.size() >= 3 && cfg.preset != SequenceKind::gsd &&
      cfg.preset != SequenceKind::confocal) {
    const PulseSequence seq = cfg.sequence();
    const PulsePhase* deplete = nullptr;
    for (const auto& p : seq.phases) {
      if (p.role == PhaseRole::deplete) deplete = &p;
    }
    const double omega = cfg.sweep.omega_d.value_or(deplete->beam.width);
    const double fixed = power ? deplete->duration : deplete->power();
    std::vector<DataPoint> pts;
    for (const auto& p : curve) pts.push_back({p.position, p.value});
    const FitResult fit = fit_resolution_curve(
        pts, power ? ResolutionSweep::power : ResolutionSweep::duration, omega, fixed);
    const double alpha = fit.value("alpha");
    double rel = 0.0;
    for (const auto& p : pts) {
      const double beta = power ? alpha * p.x * p.x * fixed : alpha * fixed * fixed * p.x;
      const double d = (resolution_eq6({omega, beta}) - p.y) / p.y;
      rel += d * d;
    }
    out.metric("fit_alpha", alpha, "1/(us mW^2)");
    out.metric("fit_alpha_stderr", fit.std_error("alpha"), "1/(us mW^2)");
    out.metric("fit_relative_rms", std::sqrt(rel / pts.size()), "ratio");
    out.metric("model_alpha", deplete->rate_model.alpha, "1/(us mW^2)");
  }
  if (cfg.sweep.reference_fwhm) {
    const double ref = *cfg.sweep.reference_fwhm;
    out.metric("reference_fwhm", ref, "nm");
    out.metric("reference_relative_error", (curve.back().value - ref) / ref, "ratio");
    out.label("reference_kind", "calibration-consistency");
  }
}

double charge_at(const RateModel& model, double power, double start_rho, double t) {
  return evolve_charge(ChargeState(start_rho), {rates_at(model, power), t}).rho_minus();
}

FitResult fit_trace(const ExperimentConfig& cfg, double power, std::uint64_t stream, Curve* out_curve) {
  const RateModel& model = cfg.preset_options.rates.at(cfg.trace.wavelength);
  std::vector<DataPoint> pts;
  const auto times = linspace(0.0, cfg.trace.duration, cfg.trace.points);
  for (std::size_t i = 0; i < times.size(); ++i) {
    double y = cfg.trace.counts * charge_at(model, power, cfg.trace.start_rho, times[i]);
    if (cfg.seed) {
      SplitMix64 g(substream_seed(*cfg.seed, stream, i));
      y = static_cast<double>(std::poisson_distribution<long long>(y)(g));
    }
    pts.push_back({times[i], y});
  }
  if (out_curve) {
    for (const auto& p : pts) out_curve->push_back({p.x, p.y});
  }
  return fit_charge_decay(pts);
}

void run_rate_trace(const ExperimentConfig& cfg, Output& out) {
  const RateModel& model = cfg.preset_options.rates.at(cfg.trace.wavelength);
  Curve curve;
  const FitResult fit = fit_trace(cfg, cfg.trace.power, 0, &curve);
  out.file("trace.csv", [&](std::ostream& s) { write_curve_csv(s, "time_us", curve); });
  out.label("wavelength", std::string(to_string(cfg.trace.wavelength)));
  out.metric("power", cfg.trace.power, "mW");
  out.metric("model_gamma", conversion_rate(model, cfg.trace.power), "1/us");
  out.metric("fit_gamma", fit.value("gamma"), "1/us");
  out.metric("fit_gamma_stderr", fit.std_error("gamma"), "1/us");
  out.metric("fit_plateau", fit.value("plateau"), "counts");
  out.metric("fit_start", fit.value("start"), "counts");
  out.metric("fit_steady_state", fit.value("plateau") / cfg.trace.counts, "ratio");
  out.metric("model_steady_state", model.rho_st, "ratio");

  if (cfg.trace.powers.empty()) return;
  Curve rates;
  std::vector<DataPoint> pts;
  std::uint64_t stream = 1;
  for (const double p : cfg.trace.powers) {
    // Each trace spans ~5 relaxation times of its own rate.
    ExperimentConfig c = cfg;
    const double g = conversion_rate(model, p);
    if (!(g > 0.0)) throw DomainError("power dependence needs a nonzero conversion rate");
    c.trace.duration = 5.0 / g;
    const FitResult f = fit_trace(c, p, stream++, nullptr);
    rates.push_back({p, f.value("gamma")});
    pts.push_back({p, f.value("gamma")});
  }
  out.file("rates.csv", [&](std::ostream& s) { write_curve_csv(s, "power_mw", rates); });
  const FitResult law = fit_power_exponent(pts);
  out.metric("fit_exponent", law.value("exponent"), "1");
  out.metric("fit_exponent_stderr", law.std_error("exponent"), "1");
  out.metric("fit_coefficient", law.value("coefficient"), "1/(us mW^n)");
}

void run_fit(const ExperimentConfig& cfg, Output& out) {
  std::ifstream in(cfg.fit.input);
  if (!in) throw IoError("cannot open fit input " + cfg.fit.input.string());
  const NamedCurve data = read_curve_csv(in);
  std::vector<DataPoint> pts;
  for (const auto& p : data.curve) pts.push_back({p.position, p.value});

  FitResult fit;
  std::function<double(double)> model;
  switch (cfg.fit.model) {
    case FitModel::charge_decay: {
      fit = fit_charge_decay(pts);
      const double g = fit.value("gamma"), a = fit.value("plateau"), s = fit.value("start");
      model = [=](double t) { return a + (s - a) * std::exp(-g * t); };
      out.label("model", "charge-decay");
      break;
    }
    case FitModel::power_law: {
      fit = fit_power_exponent(pts);
      const double n = fit.value("exponent"), c = fit.value("coefficient");
      model = [=](double x) { return c * std::pow(x, n); };
      out.label("model", "power-law");
      break;
    }
    case FitModel::resolution: {
      const bool power = cfg.fit.sweep_power;
      fit = fit_resolution_curve(pts, power ? ResolutionSweep::power : ResolutionSweep::duration,
                                 cfg.fit.omega_d, cfg.fit.fixed);
      const double alpha = fit.value("alpha"), fixed = cfg.fit.fixed, w = cfg.fit.omega_d;
      model = [=](double x) {
        return resolution_eq6({w, power ? alpha * x * x * fixed : alpha * fixed * fixed * x});
      };
      out.label("model", "resolution");
      break;
    }
  }
  Curve fitted;
  for (const auto& p : pts) fitted.push_back({p.x, model(p.x)});
  out.file("fit_curve.csv", [&](std::ostream& s) { write_curve_csv(s, data.abscissa, fitted); });
  for (std::size_t i = 0; i < fit.names.size(); ++i) {
    out.metric("fit_" + fit.names[i], fit.values[i], "1");
    out.metric("fit_" + fit.names[i] + "_stderr", fit.std_errors[i], "1");
  }
  out.metric("fit_rss", fit.rss, "1");
  out.metric("fit_iterations", fit.iterations, "count");
}

}  // namespace

RunReport run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  std::error_code ec;
  std::filesystem::create_directories(options.output_dir, ec);
  if (ec) throw IoError("cannot create " + options.output_dir.string() + ": " + ec.message());

  RunReport report;
  Output out(options, report);
  report.rows.push_back({"experiment", std::string(to_string(config.kind)), "label"});
  report.rows.push_back({"name", config.name, "label"});
  if (config.seed) report.rows.push_back({"seed", std::to_string(*config.seed), "1"});

  switch (config.kind) {
    case ExperimentKind::scan: run_scan_kind(config, out); break;
    case ExperimentKind::compare_modes: run_compare_modes(config, out); break;
    case ExperimentKind::odmr: run_odmr(config, out); break;
    case ExperimentKind::rabi: run_rabi(config, out); break;
    case ExperimentKind::ramsey: run_ramsey(config, out); break;
    case ExperimentKind::resolution_sweep: run_resolution_sweep(config, out); break;
    case ExperimentKind::rate_trace: run_rate_trace(config, out); break;
    case ExperimentKind::fit: run_fit(config, out); break;
  }

  // Summary last, so it lists every artifact.
  const auto path = options.output_dir / "summary.csv";
  std::ofstream summary(path, std::ios::binary | std::ios::trunc);
  if (!summary) throw IoError("cannot write " + path.string());
  summary << "metric,value,unit\n";
  for (const auto& r : report.rows) summary << r.metric << ',' << r.value << ',' << r.unit << '\n';
  summary.close();
  if (!summary) throw IoError("write failed for " + path.string());
  out.log("wrote " + path.string());
  return report;
}

}  // namespace csd::tools
