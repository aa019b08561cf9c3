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


#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "pulseforge/analysis.hpp"
#include "pulseforge/constants.hpp"
#include "pulseforge/error.hpp"
#include "pulseforge/scenario.hpp"
#include "pulseforge/sequence.hpp"
#include "pulseforge/sequence_io.hpp"

namespace pf = pulseforge;

namespace {

struct SequenceArgs {
  std::string builder;
  std::string file;
  int n = 2;
  double j0_hz = 1.0;
  double p = 1.0;
  double t1_us = 120.0;
  double t_pi_us = 0.0;
  double bx_hz = 0.0;
  double by_hz = 0.0;
  double bz_hz = 0.0;
  std::optional<double> ramp_us;

  void attach(CLI::App* cmd) {
    auto* b = cmd->add_option("--builder", builder, "Named builder: cpmg, xy, xy2, heisenberg, hs_modified");
    auto* f = cmd->add_option("--sequence", file, "Sequence file")->check(CLI::ExistingFile);
    b->excludes(f);
    cmd->add_option("--n", n, "Spin count (builders)");
    cmd->add_option("--j,--j0-hz", j0_hz, "Nearest-neighbour coupling J0 in Hz (builders)");
    cmd->add_option("--p", p, "Power-law exponent (builders)");
    cmd->add_option("--t1-us", t1_us, "Interaction segment length in us (builders)");
    cmd->add_option("--t-pi-us", t_pi_us, "Pulse length in us (builders)");
    cmd->add_option("--bx-hz", bx_hz, "Uniform x field in Hz (cpmg, xy)");
    cmd->add_option("--by-hz", by_hz, "Uniform y field in Hz (cpmg, xy)");
    cmd->add_option("--bz-hz", bz_hz, "Uniform z field in Hz (cpmg, xy)");
    cmd->add_option("--ramp-us", ramp_us, "Bind a Tukey envelope with this ramp time (us)");
  }

  /** Sequence and its declared target. */
  std::pair<pf::PulseSequence, std::optional<pf::PauliSum>> load() const {
    pf::PulseSequence seq;
    std::optional<pf::PauliSum> target;
    if (!file.empty()) {
      auto sf = pf::load_sequence(file);
      seq = std::move(sf.sequence);
      target = std::move(sf.target);
    } else if (!builder.empty()) {
      pf::BuilderSpec spec;
      spec.name = builder;
      spec.spins = n;
      spec.j0_hz = j0_hz;
      spec.p = p;
      spec.t1 = t1_us * 1e-6;
      spec.t_pi = t_pi_us * 1e-6;
      spec.bx_hz = bx_hz;
      spec.by_hz = by_hz;
      spec.bz_hz = bz_hz;
      seq = pf::build_named(spec);
      target = pf::builder_target(spec);
    } else {
      throw pf::PreconditionError("give --builder or --sequence");
    }
    if (ramp_us) seq = seq.with_envelope(pf::PulseShape::tukey(*ramp_us * 1e-6, 0.0));
    return {std::move(seq), std::move(target)};
  }
};

std::string pauli_hz(const pf::PauliSum& op, double divisor) {
  if (op.empty()) return "0";
  std::string out;
  for (const auto& [letters, c] : op.terms()) {
    const double v = c.real() / divisor;
    if (std::abs(v) < 1e-12 * op.max_abs_coefficient() / divisor) continue;
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    if (!out.empty()) out += " + ";
    out += std::string(buf) + "*" + letters;
  }
  return out.empty() ? "0" : out;
}

pf::PauliSum noise_operator(int n, const std::string& axis) {
  if (axis == "x") return pf::uniform_field(n, pf::Pauli::X);
  if (axis == "y") return pf::uniform_field(n, pf::Pauli::Y);
  return pf::uniform_field(n, pf::Pauli::Z);
}

std::optional<std::uint64_t> env_seed() {
  const char* v = std::getenv("PULSEFORGE_SEED");
  if (!v || !*v) return std::nullopt;
  try {
    std::size_t used = 0;
    const unsigned long long s = std::stoull(v, &used);
    if (used != std::string(v).size()) throw std::invalid_argument(v);
    return s;
  } catch (const std::exception&) {
    throw pf::ParseError(std::string("PULSEFORGE_SEED is not a non-negative integer: ") + v);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamical-decoupling and trapped-ion spin simulation toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", pf::engine_version());

  auto* run = app.add_subcommand("run", "Run a scenario and write series.csv, fits.csv and run.json");
  std::string config, builtin, out_dir = "pulseforge-out";
  std::optional<std::uint64_t> seed;
  std::optional<int> realizations;
  int workers = 0;
  auto* cfg_opt = run->add_option("--config", config, "Scenario JSON file (or a run.json to replay)")
                      ->check(CLI::ExistingFile);
  run->add_option("--builtin", builtin, "Builtin scenario name (see catalog)")->excludes(cfg_opt);
  run->add_option("--seed", seed, "Master seed (overrides PULSEFORGE_SEED and the config)");
  run->add_option("--realizations", realizations, "Noise realizations per variant")->check(CLI::PositiveNumber);
  run->add_option("--workers", workers, "Worker threads (default: available cores)")->check(CLI::NonNegativeNumber);
  run->add_option("--out", out_dir, "Output directory");

  auto* validate = app.add_subcommand("validate", "Check frame closure, target match and noise cancellation");
  SequenceArgs vargs;
  vargs.attach(validate);
  bool strict = false;
  std::vector<std::string> noise_axes{"z"};
  std::optional<std::size_t> drop;
  validate->add_flag("--strict-target", strict, "Require every toggled segment to equal the target");
  validate->add_option("--noise", noise_axes, "Noise axes to test (x, y, z)")
      ->check(CLI::IsMember({"x", "y", "z"}));
  validate->add_option("--drop-pulse", drop, "Replace pulse K (0-based) by the identity first");

  auto* avg = app.add_subcommand("avg-ham", "Print the average Hamiltonian and its time-dilution factor");
  SequenceArgs aargs;
  aargs.attach(avg);

  auto* catalog = app.add_subcommand("catalog", "List builtin scenarios");
  std::string show;
  catalog->add_option("--show", show, "Print the configuration of one builtin");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      pf::ScenarioSet set;
      if (!builtin.empty()) {
        set = pf::parse_scenario_config(pf::builtin_scenario(builtin).config);
      } else if (!config.empty()) {
        set = pf::load_scenario_config(config);
      } else {
        throw pf::PreconditionError("give --config or --builtin");
      }
      pf::RunOptions opts;
      opts.seed = seed ? seed : env_seed();
      opts.realizations = realizations;
      opts.workers = workers;
      const pf::RunOutput out = pf::run_scenario(set, opts);
      pf::write_run_output(out, out_dir);
      for (const auto& v : out.variants) {
        std::cout << v.label << ": J0 = " << v.resolved.j0 / pf::constants::kTwoPi
                  << " Hz, J0bar = " << v.resolved.jbar0 / pf::constants::kTwoPi << " Hz";
        if (v.fit) {
          if (v.fit->kind == pf::FitKind::DampedCosine)
            std::cout << ", f = " << v.fit->frequency << " Hz, f*tau = " << v.fit->f_tau();
          else
            std::cout << ", J0bar*tau = " << v.resolved.jbar0 * v.fit->tau;
        } else if (!v.fit_error.empty()) {
          std::cout << ", fit failed: " << v.fit_error;
        }
        if (v.truncation_suspect) std::cout << " [phonon truncation suspect]";
        std::cout << "\n";
      }
      std::cout << "wrote " << out_dir << "/{series.csv,fits.csv,run.json} in " << out.wall_seconds << " s\n";
      return 0;
    }

    if (*validate) {
      auto [seq, target] = vargs.load();
      if (drop) seq = pf::drop_pulse(seq, *drop);
      const int n = seq.spin_count();
      if (!target) {
        target = seq.steps().front().segment.hamiltonian;
        std::cout << "note: no declared target; using the first segment Hamiltonian\n";
      }
      pf::DecouplingOptions o;
      o.strict_target = strict;
      bool pass = true;
      for (const auto& axis : noise_axes) {
        const auto rep = pf::validate_decoupling(seq, *target, noise_operator(n, axis), o);
        std::cout << "noise along " << axis << ":\n" << rep.to_string();
        pass = pass && rep.pass();
      }
      std::cout << "verdict: " << (pass ? "pass" : "fail") << "\n";
      return pass ? 0 : 1;
    }

    if (*avg) {
      auto [seq, target] = aargs.load();
      const double scale = pf::time_dilution_factor(seq);
      const pf::PauliSum hbar = pf::average_hamiltonian(seq);
      std::cout << "H_avg = " << scale << " x (" << pauli_hz(hbar, pf::constants::kTwoPi * scale) << ") Hz\n";
      std::cout << "scale: " << scale << "\n";
      return 0;
    }

    if (*catalog) {
      if (!show.empty()) {
        std::cout << pf::builtin_scenario(show).config << "\n";
        return 0;
      }
      for (const auto& b : pf::builtin_scenarios()) std::cout << b.name << "\n    " << b.description << "\n";
      return 0;
    }
  } catch (const pf::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
