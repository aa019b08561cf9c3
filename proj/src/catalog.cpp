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


#include "pulseforge/error.hpp"
#include "pulseforge/scenario.hpp"

namespace pulseforge {

namespace {

const char* const kFig2 = R"json({
  "name": "fig2_two_ion_xy",
  "description": "Two ions under the two-pulse XY form at delta/etaOmega = 4.1 with every noise channel, decoupled against the plain interaction.",
  "engine": "full-spin-phonon",
  "trap": {"ions": 2, "transverse_mhz": 4.8, "axial_mhz": 0.5},
  "tones": {"eta": 0.08, "detuning_khz": 30, "detuning_ratio": 4.1},
  "sequence": {"builder": "xy2", "t1_us": 120, "t_pi_us": 0},
  "shape": {"ramp_us": 20, "exponent": 2},
  "noise": {"stark": true, "detuning": true, "heating": true},
  "initial_state": "polarized-z-down",
  "realizations": 20,
  "seed": 2026,
  "samples": {"every_segments": 1, "max_periods": 6},
  "observables": ["z"],
  "fit": "damped-cosine",
  "propagator": {"n_max": 4, "dt_ns": 15},
  "variants": [
    {"label": "decoupled"},
    {"label": "plain", "shape": null, "sequence": {"decoupled": false}}
  ]
})json";

const char* const kFig3a = R"json({
  "name": "fig3a_drive_rate",
  "description": "Decoupled two-ion flops at delta/etaOmega = 5 for interaction segments from 50 to 200 us.",
  "engine": "full-spin-phonon",
  "trap": {"ions": 2, "transverse_mhz": 4.8, "axial_mhz": 0.5},
  "tones": {"eta": 0.08, "eta_rabi_khz": 25, "detuning_ratio": 5},
  "sequence": {"builder": "xy2", "t1_us": 120, "t_pi_us": 0},
  "shape": {"ramp_us": 20, "exponent": 2},
  "noise": {"stark": true, "detuning": true, "heating": true},
  "initial_state": "polarized-z-down",
  "realizations": 20,
  "seed": 2026,
  "samples": {"every_segments": 1, "max_periods": 5},
  "observables": ["z"],
  "fit": "damped-cosine",
  "propagator": {"n_max": 4, "dt_ns": 15},
  "variants": [
    {"label": "t1_50us", "sequence": {"t1_us": 50}},
    {"label": "t1_80us", "sequence": {"t1_us": 80}},
    {"label": "t1_120us", "sequence": {"t1_us": 120}},
    {"label": "t1_160us", "sequence": {"t1_us": 160}},
    {"label": "t1_200us", "sequence": {"t1_us": 200}}
  ]
})json";

const char* const kFig3b = R"json({
  "name": "fig3b_detuning_scan",
  "description": "Coherent flops f*tau against delta/etaOmega at etaOmega = 2pi x 25 kHz, with and without decoupling.",
  "engine": "full-spin-phonon",
  "trap": {"ions": 2, "transverse_mhz": 4.8, "axial_mhz": 0.5},
  "tones": {"eta": 0.08, "eta_rabi_khz": 25, "detuning_ratio": 5},
  "sequence": {"builder": "xy2", "t1_us": 120, "t_pi_us": 0},
  "shape": {"ramp_us": 20, "exponent": 2},
  "noise": {"stark": true, "detuning": true, "heating": true},
  "initial_state": "polarized-z-down",
  "realizations": 20,
  "seed": 2026,
  "samples": {"every_segments": 1, "max_periods": 5},
  "observables": ["z"],
  "fit": "damped-cosine",
  "propagator": {"n_max": 4, "dt_ns": 15},
  "variants": [
    {"label": "r2_decoupled", "tones": {"detuning_ratio": 2}},
    {"label": "r2_plain", "tones": {"detuning_ratio": 2}, "shape": null, "sequence": {"decoupled": false}},
    {"label": "r3_decoupled", "tones": {"detuning_ratio": 3}},
    {"label": "r3_plain", "tones": {"detuning_ratio": 3}, "shape": null, "sequence": {"decoupled": false}},
    {"label": "r5_decoupled", "tones": {"detuning_ratio": 5}},
    {"label": "r5_plain", "tones": {"detuning_ratio": 5}, "shape": null, "sequence": {"decoupled": false}},
    {"label": "r7.5_decoupled", "tones": {"detuning_ratio": 7.5}},
    {"label": "r7.5_plain", "tones": {"detuning_ratio": 7.5}, "shape": null, "sequence": {"decoupled": false}}
  ]
})json";

const char* const kFig4 = R"json({
  "name": "fig4_ten_ion_cpmg",
  "description": "Ten ions prepared along +-x under XX couplings (p = 1.32, J0 = 2pi x 204 Hz), CPMG against the plain interaction, Stark and detuning noise in the spin-only engine.",
  "engine": "spin-only-sequence",
  "trap": {"ions": 10, "transverse_mhz": 4.8, "axial_mhz": 0.5},
  "tones": {"eta": 0.08, "target_p": 1.32, "j0_hz": 204},
  "sequence": {"builder": "cpmg", "t1_us": 120, "t_pi_us": 0},
  "shape": {"ramp_us": 20, "exponent": 2},
  "noise": {"stark": true, "detuning": true},
  "initial_state": "neel-x",
  "realizations": 20,
  "seed": 2026,
  "samples": {"every_cycles": 1, "max_time_jbar": 30},
  "observables": ["x"],
  "fit": "exponential",
  "variants": [
    {"label": "decoupled"},
    {"label": "plain", "shape": null, "sequence": {"decoupled": false}, "samples": {"max_time_jbar": 8}}
  ]
})json";

const char* const kFig5 = R"json({
  "name": "fig5_haldane_shastry",
  "description": "Four ions with inverse-square couplings under the Heisenberg sequence at t1 J0 = 0.05: conserved magnetisation for polarised states and Neel dynamics against the averaged Hamiltonian.",
  "engine": "spin-only-sequence",
  "trap": {"ions": 4, "transverse_mhz": 4.8, "axial_mhz": 0.5},
  "tones": {"eta": 0.08, "target_p": 2.05, "j0_hz": 84},
  "sequence": {"builder": "heisenberg", "t1_j0": 0.05, "t_pi_us": 0},
  "initial_state": "neel-z",
  "seed": 2026,
  "samples": {"every_cycles": 1, "max_time_jbar": 3},
  "observables": ["z", "x", "y"],
  "variants": [
    {"label": "polarized_x", "initial_state": "polarized-x"},
    {"label": "polarized_y", "initial_state": "polarized-y"},
    {"label": "polarized_z", "initial_state": "polarized-z"},
    {"label": "neel_z", "initial_state": "neel-z"},
    {"label": "neel_z_average", "initial_state": "neel-z", "engine": "spin-only-average"}
  ]
})json";

const char* const kFigHSSM = R"json({
  "name": "figHSSM_modified_sequence",
  "description": "Four ions under the Heisenberg sequence with two quarter-turn pulses removed, which breaks the total-spin symmetry.",
  "engine": "spin-only-sequence",
  "trap": {"ions": 4, "transverse_mhz": 4.8, "axial_mhz": 0.5},
  "tones": {"eta": 0.08, "target_p": 2.05, "j0_hz": 84},
  "sequence": {"builder": "hs_modified", "t1_j0": 0.05, "t_pi_us": 0},
  "initial_state": "polarized-z",
  "seed": 2026,
  "samples": {"every_cycles": 1, "max_time_jbar": 3},
  "observables": ["z", "x", "y"],
  "variants": [
    {"label": "modified_polarized_z"},
    {"label": "modified_neel_z", "initial_state": "neel-z"},
    {"label": "heisenberg_uudd", "initial_state": "uudd", "sequence": {"builder": "heisenberg"}},
    {"label": "modified_uudd", "initial_state": "uudd"}
  ]
})json";

}  // namespace

const std::vector<BuiltinScenario>& builtin_scenarios() {
  static const std::vector<BuiltinScenario> all = [] {
    std::vector<BuiltinScenario> v;
    for (const char* text : {kFig2, kFig3a, kFig3b, kFig4, kFig5, kFigHSSM}) {
      const ScenarioSet set = parse_scenario_config(text);
      v.push_back({set.name, set.description, text});
    }
    return v;
  }();
  return all;
}

const BuiltinScenario& builtin_scenario(const std::string& name) {
  for (const auto& b : builtin_scenarios())
    if (b.name == name) return b;
  throw PreconditionError("unknown builtin scenario '" + name + "'");
}

}  // namespace pulseforge
