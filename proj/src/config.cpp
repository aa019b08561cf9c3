// Copyright 2026 The PulseForge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <filesystem>
#include <set>

#include "json.hpp"

#include "pulseforge/constants.hpp"
#include "pulseforge/error.hpp"
#include "pulseforge/io.hpp"
#include "pulseforge/scenario.hpp"

namespace pulseforge {
namespace {

using nlohmann::json;
using constants::kTwoPi;

/** Object reader that rejects keys it was never asked about. */
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail("expected an object");
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(path_ + ": " + msg);
  }

  bool has(const std::string& key) {
    used_.insert(key);
    return j_.contains(key) && !j_.at(key).is_null();
  }

  const json& at(const std::string& key) {
    if (!has(key)) fail("missing key '" + key + "'");
    return j_.at(key);
  }

  std::string child(const std::string& key) const { return path_ + "." + key; }

  double number(const std::string& key) {
    const json& v = at(key);
    if (!v.is_number()) fail("'" + key + "' must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail("'" + key + "' must be finite");
    return x;
  }
  std::optional<double> opt_number(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return number(key);
  }
  void number_into(const std::string& key, double& out) {
    if (has(key)) out = number(key);
  }
  double positive(const std::string& key) {
    const double x = number(key);
    if (!(x > 0.0)) fail("'" + key + "' must be > 0");
    return x;
  }

  int integer(const std::string& key) {
    const json& v = at(key);
    if (!v.is_number_integer()) fail("'" + key + "' must be an integer");
    return v.get<int>();
  }
  void integer_into(const std::string& key, int& out) {
    if (has(key)) out = integer(key);
  }

  std::string string(const std::string& key) {
    const json& v = at(key);
    if (!v.is_string()) fail("'" + key + "' must be a string");
    return v.get<std::string>();
  }
  void string_into(const std::string& key, std::string& out) {
    if (has(key)) out = string(key);
  }

  bool boolean(const std::string& key) {
    const json& v = at(key);
    if (!v.is_boolean()) fail("'" + key + "' must be true or false");
    return v.get<bool>();
  }
  void boolean_into(const std::string& key, bool& out) {
    if (has(key)) out = boolean(key);
  }

  /** Throws on keys that were never read. */
  void finish() const {
    for (const auto& [key, value] : j_.items())
      if (!used_.count(key)) fail("unknown key '" + key + "'");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

void read_trap(Reader& r, Scenario& s) {
  Reader t(r.at("trap"), r.child("trap"));
  s.trap.ion_count = t.integer("ions");
  s.trap.omega_xy = kTwoPi * 1e6 * t.positive("transverse_mhz");
  s.trap.omega_z = kTwoPi * 1e6 * t.positive("axial_mhz");
  t.finish();
}

void read_tones(Reader& r, Scenario& s) {
  Reader t(r.at("tones"), r.child("tones"));
  t.number_into("eta", s.tones.eta);
  if (auto v = t.opt_number("detuning_khz")) s.tones.detuning_hz = *v * 1e3;
  s.tones.detuning_ratio = t.opt_number("detuning_ratio");
  if (auto v = t.opt_number("eta_rabi_khz")) s.tones.eta_rabi_hz = *v * 1e3;
  s.tones.j0_hz = t.opt_number("j0_hz");
  s.tones.target_p = t.opt_number("target_p");
  t.finish();
}

void read_sequence(Reader& r, Scenario& s, const std::string& base_dir) {
  Reader q(r.at("sequence"), r.child("sequence"));
  auto& seq = s.sequence;
  const bool has_builder = q.has("builder");
  const bool has_file = q.has("file");
  if (has_builder == has_file) q.fail("exactly one of 'builder' and 'file' is required");
  if (has_builder) {
    seq.builder = q.string("builder");
    seq.file.clear();
  } else {
    seq.builder.clear();
    const std::filesystem::path p = q.string("file");
    seq.file = (p.is_relative() && !base_dir.empty()) ? (std::filesystem::path(base_dir) / p).string()
                                                      : p.string();
  }
  if (q.has("t1_us") && q.has("t1_j0")) q.fail("give only one of 't1_us' and 't1_j0'");
  if (auto v = q.opt_number("t1_us")) seq.t1 = *v * 1e-6;
  seq.t1_j0 = q.opt_number("t1_j0");
  if (auto v = q.opt_number("t_pi_us")) seq.t_pi = *v * 1e-6;
  q.boolean_into("decoupled", seq.decoupled);
  if (q.has("fields_hz")) {
    Reader f(q.at("fields_hz"), q.child("fields_hz"));
    f.number_into("x", seq.bx_hz);
    f.number_into("y", seq.by_hz);
    f.number_into("z", seq.bz_hz);
    f.finish();
  }
  q.finish();
}

void read_shape(Reader& r, Scenario& s) {
  if (!r.has("shape")) {
    s.sequence.shape.reset();
    return;
  }
  Reader p(r.at("shape"), r.child("shape"));
  double exponent = 2.0;
  p.number_into("exponent", exponent);
  s.sequence.shape = PulseShape::tukey(p.number("ramp_us") * 1e-6, 0.0, exponent);
  p.finish();
}

void read_noise(Reader& r, Scenario& s) {
  if (!r.has("noise")) return;
  Reader n(r.at("noise"), r.child("noise"));
  n.boolean_into("stark", s.noise.stark);
  n.boolean_into("detuning", s.noise.detuning);
  n.boolean_into("heating", s.noise.heating);
  auto& p = s.noise.params;
  n.number_into("stark_sigma", p.stark.fractional_sigma);
  n.number_into("stark_exponent", p.stark.spectrum_exponent);
  if (auto v = n.opt_number("stark_band_low_hz")) p.stark.band_low = *v;
  if (auto v = n.opt_number("stark_band_high_hz")) p.stark.band_high = *v;
  if (auto v = n.opt_number("detuning_sigma_hz")) p.detuning.sigma = kTwoPi * *v;
  n.number_into("kick_amplitude", p.heating.kick_amplitude);
  if (auto v = n.opt_number("kick_interval_us")) p.heating.interval = *v * 1e-6;
  n.integer_into("heating_mode", p.heating.target_mode);
  n.finish();
}

void read_samples(Reader& r, Scenario& s) {
  Reader q(r.at("samples"), r.child("samples"));
  auto& sm = s.samples;
  if (q.has("every_segments") && q.has("every_cycles"))
    q.fail("give only one of 'every_segments' and 'every_cycles'");
  if (q.has("every_segments")) {
    sm.every_segments = q.integer("every_segments");
    sm.every_cycles = 0;
  }
  if (q.has("every_cycles")) {
    sm.every_cycles = q.integer("every_cycles");
    sm.every_segments = 0;
  }
  int limits = 0;
  if (auto v = q.opt_number("max_time_ms")) sm.max_time = *v * 1e-3, ++limits;
  if ((sm.max_periods = q.opt_number("max_periods"))) ++limits;
  if ((sm.max_jbar = q.opt_number("max_time_jbar"))) ++limits;
  if (limits != 1) q.fail("exactly one of 'max_time_ms', 'max_periods', 'max_time_jbar' is required");
  q.finish();
}

FitChoice parse_fit(Reader& r) {
  if (!r.has("fit")) return FitChoice::None;
  const std::string f = r.string("fit");
  if (f == "none") return FitChoice::None;
  if (f == "damped-cosine") return FitChoice::DampedCosine;
  if (f == "exponential") return FitChoice::Exponential;
  r.fail("unknown fit '" + f + "' (none, damped-cosine, exponential)");
}

Scenario read_scenario(const json& j, const std::string& path, const std::string& base_dir) {
  Reader r(j, path);
  Scenario s;
  s.name = r.string("name");
  r.has("description");
  r.string_into("label", s.label);
  if (r.has("engine")) {
    try {
      s.engine = parse_engine(r.string("engine"));
    } catch (const Error& e) {
      r.fail(e.what());
    }
  }
  if (r.has("couplings")) {
    Reader c(r.at("couplings"), r.child("couplings"));
    s.trap.ion_count = c.integer("ions");
    s.power_law_j0_hz = c.positive("j0_hz");
    s.power_law_p = c.number("p");
    c.finish();
    s.use_trap = false;
    if (r.has("trap") || r.has("tones")) r.fail("'couplings' replaces 'trap' and 'tones'");
  } else {
    read_trap(r, s);
    read_tones(r, s);
  }
  read_sequence(r, s, base_dir);
  read_shape(r, s);
  read_noise(r, s);
  r.string_into("initial_state", s.initial_state);
  r.integer_into("realizations", s.realizations);
  if (r.has("seed")) {
    const json& v = r.at("seed");
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
      r.fail("'seed' must be a non-negative integer");
    s.seed = v.get<std::uint64_t>();
  }
  read_samples(r, s);
  if (r.has("observables")) {
    const json& obs = r.at("observables");
    if (!obs.is_array() || obs.empty()) r.fail("'observables' must be a non-empty array");
    s.observables.clear();
    for (const auto& o : obs) {
      const std::string b = o.is_string() ? o.get<std::string>() : "";
      if (b != "x" && b != "y" && b != "z") r.fail("observables must be \"x\", \"y\" or \"z\"");
      if (std::find(s.observables.begin(), s.observables.end(), b[0]) != s.observables.end())
        r.fail("duplicate observable '" + b + "'");
      s.observables.push_back(b[0]);
    }
  }
  s.fit = parse_fit(r);
  if (r.has("propagator")) {
    Reader p(r.at("propagator"), r.child("propagator"));
    p.integer_into("n_max", s.n_max);
    if (auto v = p.opt_number("dt_ns")) s.dt = *v * 1e-9;
    p.number_into("mode_drop_factor", s.mode_drop_factor);
    p.finish();
  }
  r.has("variants");
  r.finish();
  return s;
}

}  // namespace

std::string engine_name(Engine e) {
  switch (e) {
    case Engine::FullSpinPhonon: return "full-spin-phonon";
    case Engine::SpinOnlySequence: return "spin-only-sequence";
    case Engine::SpinOnlyAverage: return "spin-only-average";
  }
  return "unknown";
}

Engine parse_engine(const std::string& name) {
  for (Engine e : {Engine::FullSpinPhonon, Engine::SpinOnlySequence, Engine::SpinOnlyAverage})
    if (engine_name(e) == name) return e;
  throw ParseError("unknown engine '" + name + "' (full-spin-phonon, spin-only-sequence, spin-only-average)");
}

ScenarioSet parse_scenario_config(const std::string& json_text, const std::string& base_dir) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("scenario config: ") + e.what());
  }
  if (!root.is_object()) throw ParseError("scenario config: top level must be an object");
  std::optional<std::uint64_t> replay_seed;
  std::optional<int> replay_realizations;
  if (root.contains("run_record")) {
    try {
      replay_seed = root.at("seed").get<std::uint64_t>();
      replay_realizations = root.at("realizations").get<int>();
      root = json(root.at("config"));
    } catch (const json::exception& e) {
      throw ParseError(std::string("run record: ") + e.what());
    }
    if (!root.is_object()) throw ParseError("run record: 'config' must be an object");
  }
  ScenarioSet set;
  set.replay_seed = replay_seed;
  set.replay_realizations = replay_realizations;
  set.canonical_config = root.dump();
  set.name = root.value("name", std::string{});
  if (root.contains("description") && root["description"].is_string())
    set.description = root["description"].get<std::string>();

  json base = root;
  base.erase("variants");
  if (!root.contains("variants")) {
    Scenario s = read_scenario(base, "scenario", base_dir);
    if (s.label.empty()) s.label = s.name;
    s.validate();
    set.variants.push_back(std::move(s));
    return set;
  }
  const json& variants = root["variants"];
  if (!variants.is_array() || variants.empty())
    throw ParseError("scenario: 'variants' must be a non-empty array of patches");
  std::set<std::string> labels;
  for (std::size_t i = 0; i < variants.size(); ++i) {
    const std::string path = "variants[" + std::to_string(i) + "]";
    const json& patch = variants[i];
    if (!patch.is_object() || !patch.contains("label") || !patch["label"].is_string())
      throw ParseError(path + ": each variant needs a string 'label'");
    if (patch.contains("variants")) throw ParseError(path + ": variants cannot nest");
    json merged = base;
    merged.merge_patch(patch);
    Scenario s = read_scenario(merged, path, base_dir);
    if (!labels.insert(s.label).second) throw ParseError(path + ": duplicate label '" + s.label + "'");
    s.validate();
    set.variants.push_back(std::move(s));
  }
  return set;
}

ScenarioSet load_scenario_config(const std::string& path) {
  const std::string text = read_file(path);
  const auto dir = std::filesystem::path(path).parent_path().string();
  try {
    return parse_scenario_config(text, dir);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void Scenario::validate() const {
  const auto fail = [&](const std::string& msg) {
    throw ParseError("scenario '" + name + "'" + (label.empty() || label == name ? "" : " variant '" + label + "'") +
                     ": " + msg);
  };
  if (name.empty()) fail("name must not be empty");
  if (trap.ion_count < 2) fail("at least two ions are required");
  if (realizations < 1) fail("realizations must be >= 1");
  if (!(sequence.t1 > 0.0) || sequence.t_pi < 0.0) fail("t1 must be > 0 and t_pi >= 0");
  if (sequence.t1_j0 && !(*sequence.t1_j0 > 0.0)) fail("t1_j0 must be > 0");
  if (samples.every_segments < 0 || samples.every_cycles < 0 ||
      (samples.every_segments == 0) == (samples.every_cycles == 0))
    fail("sample spacing must be a positive number of segments or cycles");
  for (const auto& lim : {samples.max_time, samples.max_periods, samples.max_jbar})
    if (lim && !(*lim > 0.0)) fail("sample limit must be > 0");
  if (n_max < 1) fail("propagator n_max must be >= 1");
  if (!(dt > 0.0)) fail("propagator dt must be > 0");
  if (mode_drop_factor < 0.0) fail("mode_drop_factor must be >= 0");

  if (use_trap) {
    const int ways = (tones.detuning_hz ? 1 : 0) + (tones.detuning_ratio ? 1 : 0) + (tones.eta_rabi_hz ? 1 : 0) +
                     (tones.j0_hz ? 1 : 0) + (tones.target_p ? 1 : 0);
    const bool ok = ways == 2 && !(tones.j0_hz && tones.eta_rabi_hz) && !(tones.target_p && !tones.j0_hz) &&
                    !(tones.detuning_ratio && tones.j0_hz);
    if (!ok)
      fail("tones need exactly two of detuning_khz, detuning_ratio, eta_rabi_khz, or j0_hz with detuning_khz or "
           "target_p");
  }

  if (engine == Engine::FullSpinPhonon) {
    if (!use_trap) fail("the full spin-phonon engine needs 'trap' and 'tones'");
    if (sequence.builder != "xy2" && sequence.builder != "cpmg" && sequence.file.empty())
      fail("the full spin-phonon engine runs xx/yy sequences only (builders xy2, cpmg)");
    if (sequence.bx_hz != 0.0 || sequence.by_hz != 0.0)
      fail("the full spin-phonon engine realises z fields only");
    if (sequence.bz_hz != 0.0 && sequence.builder != "cpmg")
      fail("z fields in the full spin-phonon engine require the cpmg builder");
  } else {
    if (noise.heating) fail("heating acts on motion and needs the full spin-phonon engine");
    if ((noise.stark || noise.detuning) && !use_trap) fail("noise channels need 'trap' and 'tones'");
    if (engine == Engine::SpinOnlyAverage && noise.any())
      fail("the spin-only-average engine is noise-free");
  }
  if (fit == FitChoice::DampedCosine && observables.front() != 'z')
    fail("the damped-cosine fit uses the z observable, which must be listed first");
  noise.effective().validate();
}

NoiseConfig NoiseSpec::effective() const {
  NoiseConfig c = params;
  if (!stark) c.stark.fractional_sigma = 0.0;
  if (!detuning) c.detuning.sigma = 0.0;
  if (!heating) c.heating.kick_amplitude = 0.0;
  return c;
}

}  // namespace pulseforge
