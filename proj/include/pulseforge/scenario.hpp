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


#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pulseforge/analysis.hpp"
#include "pulseforge/ion_chain.hpp"
#include "pulseforge/noise.hpp"
#include "pulseforge/pulse_shape.hpp"
#include "pulseforge/sequence.hpp"
#include "pulseforge/sequence_io.hpp"

namespace pulseforge {

enum class Engine { FullSpinPhonon, SpinOnlySequence, SpinOnlyAverage };

std::string engine_name(Engine e);
Engine parse_engine(const std::string& name);

/**
 * Drive specification. The detuning delta is measured from the centre-of-mass
 * mode; exactly one way of fixing (delta, eta*Omega) must be given:
 * two of {detuning_hz, detuning_ratio, eta_rabi_hz}, or detuning_hz with j0_hz,
 * or target_p with j0_hz (detuning solved for the exponent, Rabi rate for J0).
 */
struct ToneSpec {
  double eta = 0.08;
  std::optional<double> detuning_hz;
  std::optional<double> detuning_ratio;
  std::optional<double> eta_rabi_hz;
  std::optional<double> j0_hz;
  std::optional<double> target_p;
};

struct SequenceSpec {
  /** Builder name, or empty when `file` is used. */
  std::string builder = "xy2";
  std::string file;
  double t1 = 120e-6;
  /** When set, t1 = t1_j0 / J0 with J0 in rad/s. */
  std::optional<double> t1_j0;
  double t_pi = 0.0;
  double bx_hz = 0.0;
  double by_hz = 0.0;
  double bz_hz = 0.0;
  /** False replaces every pulse by the identity (the plain sequence). */
  bool decoupled = true;
  /** Tukey interaction envelope; flat when empty. */
  std::optional<PulseShape> shape;
};

struct NoiseSpec {
  bool stark = false;
  bool detuning = false;
  bool heating = false;
  NoiseConfig params;

  bool any() const { return stark || detuning || heating; }
  /** Parameters with disabled channels zeroed. */
  NoiseConfig effective() const;
};

struct SampleSpec {
  /** Sample every this many segments (frame-corrected); a cycle is steps().size() segments. */
  int every_segments = 0;
  int every_cycles = 1;
  std::optional<double> max_time;     ///< seconds
  std::optional<double> max_periods;  ///< periods of the ideal flop at 2 J0bar
  std::optional<double> max_jbar;     ///< t * J0bar
};

enum class FitChoice { None, DampedCosine, Exponential };

/** One fully specified run (a variant of a scenario). Units are SI. */
struct Scenario {
  std::string name;
  std::string label;
  Engine engine = Engine::FullSpinPhonon;
  TrapConfig trap{2, 0.0, 0.0};
  bool use_trap = true;
  ToneSpec tones;
  /** Explicit power-law couplings (spin-only engines without a trap). */
  std::optional<double> power_law_j0_hz;
  std::optional<double> power_law_p;
  SequenceSpec sequence;
  NoiseSpec noise;
  /** Pattern string (u d + - r l per site) or a name: polarized-x/y/z, neel-z, neel-x. */
  std::string initial_state = "polarized-z-down";
  int realizations = 1;
  std::uint64_t seed = 1;
  SampleSpec samples;
  /** Subset of "x", "y", "z". */
  std::vector<char> observables{'z'};
  FitChoice fit = FitChoice::None;
  int n_max = 2;
  double dt = 15e-9;
  double mode_drop_factor = 50.0;

  /** Throws ParseError naming the scenario on inconsistent settings. */
  void validate() const;
};

/** A named family of variants sharing one configuration file. */
struct ScenarioSet {
  std::string name;
  std::string description;
  std::vector<Scenario> variants;
  /** The configuration as loaded, compact JSON. */
  std::string canonical_config;
  /** Set when the configuration was taken from a run record. */
  std::optional<std::uint64_t> replay_seed;
  std::optional<int> replay_realizations;
};

/**
 * Parses a JSON scenario configuration. Top-level keys form the base
 * scenario; an optional "variants" array holds JSON merge patches, each with a
 * "label". Every physical key carries its unit in the name (t1_us, j0_hz, ...).
 * A run.json record is accepted too and replays its embedded configuration
 * with the recorded seed and realization count.
 */
ScenarioSet parse_scenario_config(const std::string& json_text, const std::string& base_dir = "");
ScenarioSet load_scenario_config(const std::string& path);

struct BuiltinScenario {
  std::string name;
  std::string description;
  std::string config;  ///< JSON text
};
const std::vector<BuiltinScenario>& builtin_scenarios();
/** Builtin by name; throws PreconditionError for unknown names. */
const BuiltinScenario& builtin_scenario(const std::string& name);

/** Derived quantities of a scenario variant. */
struct ResolvedScenario {
  Scenario spec;
  std::optional<ModeStructure> modes;
  std::optional<ToneConfig> tones;
  Eigen::MatrixXd couplings;  ///< rad/s
  double j0 = 0.0;            ///< rad/s
  double fitted_p = 0.0;
  double beta = 1.0;
  double jbar0 = 0.0;  ///< rad/s
  PulseSequence sequence;
  std::vector<double> sample_times;
  /** Pulses applied before each sample (toggling-frame readout). */
  std::vector<Eigen::Matrix2cd> sample_frames;
  double duration = 0.0;
  int cycles = 0;
};

ResolvedScenario resolve_scenario(const Scenario& s);

struct RunOptions {
  std::optional<std::uint64_t> seed;
  std::optional<int> realizations;
  int workers = 0;  ///< 0: hardware concurrency
  bool quiet = true;
};

struct VariantResult {
  std::string label;
  ResolvedScenario resolved;
  std::vector<std::pair<char, ObservableSeries>> series;
  std::optional<ScalarSeries> imbalance;
  std::optional<FitResult> fit;
  std::string fit_error;
  std::vector<std::uint64_t> seeds;
  bool truncation_suspect = false;
  double max_top_level_population = 0.0;
  double max_norm_drift = 0.0;
  std::vector<int> dropped_modes;

  /** Site-averaged series of one basis. */
  const ObservableSeries& observable(char basis) const;
};

struct RunOutput {
  std::string name;
  std::vector<VariantResult> variants;
  std::string series_csv;
  std::string fits_csv;
  std::string run_json;
  std::uint64_t scenario_hash = 0;
  double wall_seconds = 0.0;
};

RunOutput run_scenario(const ScenarioSet& set, const RunOptions& options = {});

/** Writes series.csv, fits.csv and run.json into `dir`; nothing is left behind on failure. */
void write_run_output(const RunOutput& out, const std::string& dir);

/** 64-bit FNV-1a. */
std::uint64_t fnv1a(const std::string& bytes);

/** Project version recorded in run metadata. */
std::string engine_version();

}  // namespace pulseforge
