#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "csd/errors.hpp"
#include "csd/image_io.hpp"

namespace csd::tools {

std::string_view to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::scan: return "scan";
    case ExperimentKind::odmr: return "odmr";
    case ExperimentKind::rabi: return "rabi";
    case ExperimentKind::ramsey: return "ramsey";
    case ExperimentKind::resolution_sweep: return "resolution-sweep";
    case ExperimentKind::rate_trace: return "rate-trace";
    case ExperimentKind::compare_modes: return "compare-modes";
    case ExperimentKind::fit: return "fit";
  }
  return "?";
}

PulseSequence ExperimentConfig::sequence(SequenceKind kind) const {
  PulseSequence seq = preset_sequence(kind, preset_options);
  if (detection_beam) seq.detection.kind = *detection_beam;
  seq.polarization = polarization;
  seq.i_sat_fluor = i_sat_fluor;
  seq.readout_back_action = back_action;
  seq.validate();
  return seq;
}

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

struct Entry {
  std::string key;
  std::string value;
  int line = 0;
  bool used = false;
};

struct Section {
  std::string name;
  int line = 0;
  std::vector<Entry> entries;
};

const std::map<std::string, bool, std::less<>> kSections = {
    // name -> repeatable
    {"experiment", false}, {"sequence", false}, {"rates", false}, {"scene", false},
    {"spin", false},       {"nv", true},        {"grid", false},  {"spectrum", false},
    {"sweep", false},      {"trace", false},    {"fit", false},
};

std::vector<Section> split_sections(std::istream& in, const std::string& source) {
  std::vector<Section> sections;
  std::set<std::string, std::less<>> seen;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(std::string_view(raw).substr(0, hash));
    if (line.empty()) continue;
    auto fail = [&](const std::string& msg) {
      throw ConfigError(source + ":" + std::to_string(line_no) + ": " + msg);
    };
    if (line.front() == '[') {
      if (line.back() != ']') fail("malformed section header");
      std::string name = trim(std::string_view(line).substr(1, line.size() - 2));
      const auto it = kSections.find(name);
      if (it == kSections.end()) fail("unknown section [" + name + "]");
      if (!it->second && !seen.insert(name).second) fail("duplicate section [" + name + "]");
      sections.push_back({std::move(name), line_no, {}});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected 'key = value'");
    if (sections.empty()) fail("key outside of any section");
    std::string key = trim(std::string_view(line).substr(0, eq));
    std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) fail("empty key");
    if (value.empty()) fail("empty value for '" + key + "'");
    auto& entries = sections.back().entries;
    if (std::any_of(entries.begin(), entries.end(), [&](const Entry& e) { return e.key == key; })) {
      fail("duplicate key '" + key + "'");
    }
    entries.push_back({std::move(key), std::move(value), line_no, false});
  }
  return sections;
}

// Typed access to one section; every lookup marks the key as consumed.
class Reader {
 public:
  Reader(Section& section, const std::string& source) : section_(section), source_(source) {}

  std::optional<std::string> text(std::string_view key) {
    for (auto& e : section_.entries) {
      if (e.key == key) {
        e.used = true;
        current_ = &e;
        return e.value;
      }
    }
    return std::nullopt;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    const int line = current_ ? current_->line : section_.line;
    const std::string key = current_ ? current_->key : std::string();
    throw ConfigError(source_ + ":" + std::to_string(line) + ": [" + section_.name + "] " + key +
                      ": " + msg);
  }

  std::optional<double> number(std::string_view key) {
    const auto t = text(key);
    if (!t) return std::nullopt;
    try {
      return parse_number(*t);
    } catch (const DomainError&) {
      fail("not a number: '" + *t + "'");
    }
  }

  void number(std::string_view key, double& out) {
    if (const auto v = number(key)) out = *v;
  }

  std::optional<long long> integer(std::string_view key) {
    const auto t = text(key);
    if (!t) return std::nullopt;
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(t->data(), t->data() + t->size(), v);
    if (ec != std::errc() || ptr != t->data() + t->size()) fail("not an integer: '" + *t + "'");
    return v;
  }

  void integer(std::string_view key, int& out, long long lo, long long hi) {
    if (const auto v = integer(key)) {
      if (*v < lo || *v > hi) {
        fail("must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
      }
      out = static_cast<int>(*v);
    }
  }

  std::optional<std::uint64_t> unsigned64(std::string_view key) {
    const auto t = text(key);
    if (!t) return std::nullopt;
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(t->data(), t->data() + t->size(), v);
    if (ec != std::errc() || ptr != t->data() + t->size()) {
      fail("not an unsigned integer: '" + *t + "'");
    }
    return v;
  }

  void boolean(std::string_view key, bool& out) {
    const auto t = text(key);
    if (!t) return;
    if (*t == "true" || *t == "yes" || *t == "1") {
      out = true;
    } else if (*t == "false" || *t == "no" || *t == "0") {
      out = false;
    } else {
      fail("expected true or false, got '" + *t + "'");
    }
  }

  std::optional<std::vector<double>> list(std::string_view key) {
    const auto t = text(key);
    if (!t) return std::nullopt;
    std::vector<double> out;
    std::stringstream ss(*t);
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        out.push_back(parse_number(item));
      } catch (const DomainError&) {
        fail("not a number: '" + trim(item) + "'");
      }
    }
    return out;
  }

  Vec2 vec2(std::string_view key, Vec2 fallback) {
    const auto v = list(key);
    if (!v) return fallback;
    if (v->size() != 2) fail("expected two comma-separated numbers");
    return {(*v)[0], (*v)[1]};
  }

  template <class Parse>
  auto parsed(std::string_view key, Parse parse) -> std::optional<decltype(parse(""))> {
    const auto t = text(key);
    if (!t) return std::nullopt;
    try {
      return parse(*t);
    } catch (const std::exception& e) {
      fail(e.what());
    }
  }

  void finish() const {
    for (const auto& e : section_.entries) {
      if (!e.used) {
        throw ConfigError(source_ + ":" + std::to_string(e.line) + ": unknown key '" + e.key +
                          "' in [" + section_.name + "]");
      }
    }
  }

 private:
  Section& section_;
  const std::string& source_;
  const Entry* current_ = nullptr;
};

ExperimentKind parse_kind(std::string_view t) {
  for (auto k : {ExperimentKind::scan, ExperimentKind::odmr, ExperimentKind::rabi,
                 ExperimentKind::ramsey, ExperimentKind::resolution_sweep,
                 ExperimentKind::rate_trace, ExperimentKind::compare_modes, ExperimentKind::fit}) {
    if (to_string(k) == t) return k;
  }
  throw DomainError("unknown experiment kind '" + std::string(t) + "'");
}

SweepVariable parse_sweep_variable(std::string_view t) {
  if (t == "init_power") return SweepVariable::init_power;
  if (t == "init_duration") return SweepVariable::init_duration;
  if (t == "deplete_power") return SweepVariable::deplete_power;
  if (t == "deplete_duration") return SweepVariable::deplete_duration;
  if (t == "readout_power") return SweepVariable::readout_power;
  if (t == "readout_duration") return SweepVariable::readout_duration;
  throw DomainError("unknown sweep variable '" + std::string(t) + "'");
}

RateRegime parse_regime(std::string_view t) {
  if (t == "pure-quadratic") return RateRegime::pure_quadratic;
  if (t == "saturating") return RateRegime::saturating;
  throw DomainError("unknown rate regime '" + std::string(t) + "'");
}

FitModel parse_fit_model(std::string_view t) {
  if (t == "charge-decay") return FitModel::charge_decay;
  if (t == "power-law") return FitModel::power_law;
  if (t == "resolution") return FitModel::resolution;
  throw DomainError("unknown fit model '" + std::string(t) + "'");
}

void read_phase(Reader& r, const std::string& prefix, PhaseSettings& phase) {
  if (const auto v = r.number(prefix + "_power")) phase.power = *v;
  if (const auto v = r.number(prefix + "_duration")) phase.duration = *v;
  if (const auto v = r.number(prefix + "_width")) phase.width = *v;
  if (const auto v = r.parsed(prefix + "_beam", parse_beam_kind)) phase.beam = *v;
}

void read_spin(Reader& r, SpinParams& spin) {
  r.number("zfs", spin.zfs_d);
  r.number("gyro", spin.gyro);
  r.number("linewidth", spin.linewidth);
  r.number("contrast", spin.contrast);
  r.number("t2_star", spin.t2_star);
  r.number("rabi_scale", spin.rabi_freq_at_unit_drive);
  r.number("rabi_decay", spin.rabi_decay);
}

}  // namespace

ExperimentConfig parse_config(std::istream& in, const std::string& source,
                              const std::filesystem::path& base_dir) {
  auto sections = split_sections(in, source);
  ExperimentConfig cfg;
  bool have_kind = false;
  SpinParams spin_defaults;

  // [spin] supplies defaults for every [nv], wherever it appears.
  for (auto& s : sections) {
    if (s.name != "spin") continue;
    Reader r(s, source);
    read_spin(r, spin_defaults);
    r.finish();
  }

  for (auto& s : sections) {
    Reader r(s, source);
    if (s.name == "experiment") {
      if (const auto k = r.parsed("kind", parse_kind)) {
        cfg.kind = *k;
        have_kind = true;
      }
      if (const auto v = r.text("name")) {
        if (v->find(',') != std::string::npos) r.fail("name must not contain commas");
        cfg.name = *v;
      }
      if (const auto v = r.unsigned64("seed")) cfg.seed = *v;
      r.integer("threads", cfg.threads, 0, 1024);
      if (const auto v = r.text("output")) cfg.output_dir = base_dir / *v;
    } else if (s.name == "sequence") {
      if (const auto v = r.parsed("preset", parse_sequence_kind)) cfg.preset = *v;
      r.number("detection_width", cfg.preset_options.detection_width);
      if (const auto v = r.parsed("detection_beam", parse_beam_kind)) cfg.detection_beam = *v;
      r.boolean("spin_readout", cfg.preset_options.spin_readout);
      r.number("i_sat_fluor", cfg.i_sat_fluor);
      r.boolean("back_action", cfg.back_action);
      const auto angle = r.number("polarization_angle");
      const auto amplitude = r.number("polarization_amplitude");
      if (angle || amplitude) {
        cfg.polarization = LinearPolarization{};
        if (angle) cfg.polarization->angle_deg = *angle;
        if (amplitude) cfg.polarization->amplitude = *amplitude;
      }
      read_phase(r, "init", cfg.preset_options.init);
      read_phase(r, "deplete", cfg.preset_options.deplete);
      read_phase(r, "readout", cfg.preset_options.readout);
    } else if (s.name == "rates") {
      for (const char* nm : {"532", "589", "637"}) {
        RateModel& m = cfg.preset_options.rates.at(parse_wavelength(nm));
        const std::string suffix = std::string("_") + nm;
        r.number("alpha" + suffix, m.alpha);
        r.number("i_sat" + suffix, m.i_sat);
        r.number("rho_st" + suffix, m.rho_st);
        if (const auto v = r.parsed("regime" + suffix, parse_regime)) m.regime = *v;
      }
    } else if (s.name == "scene") {
      r.number("background_rate", cfg.scene.background_rate);
      if (const auto v = r.list("field")) {
        if (v->size() != 3) r.fail("expected three comma-separated numbers (G)");
        cfg.scene.field.vector = {(*v)[0], (*v)[1], (*v)[2]};
      }
    } else if (s.name == "nv") {
      NVCenter nv;
      nv.spin = spin_defaults;
      r.number("x", nv.position.x);
      r.number("y", nv.position.y);
      r.integer("axis", nv.axis_index, 0, kAxisCount - 1);
      r.number("count_rate", nv.count_rate);
      if (const auto v = r.number("rho")) {
        try {
          nv.charge = ChargeState(*v);
        } catch (const DomainError& e) {
          r.fail(e.what());
        }
      }
      read_spin(r, nv.spin);
      cfg.scene.nvs.push_back(nv);
    } else if (s.name == "grid") {
      cfg.grid.center = r.vec2("center", cfg.grid.center);
      r.number("pitch", cfg.grid.pitch);
      r.integer("width", cfg.grid.width, 1, 4096);
      r.integer("height", cfg.grid.height, 1, 4096);
    } else if (s.name == "spectrum") {
      r.number("start", cfg.spectrum.start);
      r.number("stop", cfg.spectrum.stop);
      r.integer("points", cfg.spectrum.points, 1, 1000000);
      cfg.spectrum.position = r.vec2("position", cfg.spectrum.position);
      r.number("drive", cfg.spectrum.drive);
      r.number("mw_freq", cfg.spectrum.mw_freq);
      r.number("detuning", cfg.spectrum.detuning);
      r.number("dip_threshold", cfg.spectrum.dip_threshold);
    } else if (s.name == "sweep") {
      if (const auto v = r.parsed("variable", parse_sweep_variable)) cfg.sweep.variable = *v;
      if (const auto v = r.list("values")) cfg.sweep.values = *v;
      if (const auto v = r.number("omega_d")) cfg.sweep.omega_d = *v;
      r.number("window", cfg.sweep.window);
      r.integer("samples", cfg.sweep.samples, 11, 1000000);
      if (const auto v = r.number("reference_fwhm")) cfg.sweep.reference_fwhm = *v;
    } else if (s.name == "trace") {
      if (const auto v = r.parsed("wavelength", parse_wavelength)) cfg.trace.wavelength = *v;
      r.number("power", cfg.trace.power);
      r.number("start_rho", cfg.trace.start_rho);
      r.number("duration", cfg.trace.duration);
      r.integer("points", cfg.trace.points, 4, 1000000);
      r.number("counts", cfg.trace.counts);
      if (const auto v = r.list("powers")) cfg.trace.powers = *v;
    } else if (s.name == "fit") {
      if (const auto v = r.text("input")) cfg.fit.input = base_dir / *v;
      if (const auto v = r.parsed("model", parse_fit_model)) cfg.fit.model = *v;
      if (const auto v = r.text("sweep")) {
        if (*v == "power") {
          cfg.fit.sweep_power = true;
        } else if (*v == "duration") {
          cfg.fit.sweep_power = false;
        } else {
          r.fail("expected power or duration");
        }
      }
      r.number("omega_d", cfg.fit.omega_d);
      r.number("fixed", cfg.fit.fixed);
    } else if (s.name == "spin") {
      read_spin(r, spin_defaults);  // already applied; consume the keys
    }
    r.finish();
  }

  if (!have_kind) throw ConfigError(source + ": [experiment] kind is required");

  // Cross-field checks that no single line owns.
  try {
    cfg.scene.validate();
    for (const auto& nv : cfg.scene.nvs) nv.spin.validate();
    if (cfg.kind != ExperimentKind::fit && cfg.kind != ExperimentKind::rate_trace) {
      const auto kind = cfg.kind == ExperimentKind::compare_modes ? SequenceKind::confocal : cfg.preset;
      (void)cfg.sequence(kind);
    }
  } catch (const DomainError& e) {
    throw ConfigError(source + ": invalid configuration: " + e.what());
  }
  if (cfg.kind == ExperimentKind::resolution_sweep && cfg.sweep.values.empty()) {
    throw ConfigError(source + ": [sweep] values is required for resolution-sweep");
  }
  if (cfg.kind == ExperimentKind::fit && cfg.fit.input.empty()) {
    throw ConfigError(source + ": [fit] input is required for fit");
  }
  if ((cfg.kind == ExperimentKind::odmr || cfg.kind == ExperimentKind::rabi ||
       cfg.kind == ExperimentKind::ramsey) &&
      !(cfg.spectrum.stop > cfg.spectrum.start) && cfg.spectrum.points > 1) {
    throw ConfigError(source + ": [spectrum] stop must exceed start");
  }
  if (!(cfg.grid.pitch > 0.0)) throw ConfigError(source + ": [grid] pitch must be > 0");
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  return parse_config(in, path.string(), path.parent_path());
}

}  // namespace csd::tools
