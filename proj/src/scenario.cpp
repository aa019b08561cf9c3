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


#include "pulseforge/scenario.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <exception>
#include <filesystem>
#include <thread>

#include "json.hpp"

#include "pulseforge/constants.hpp"
#include "pulseforge/error.hpp"
#include "pulseforge/io.hpp"
#include "pulseforge/propagator.hpp"

#ifndef PULSEFORGE_VERSION
#define PULSEFORGE_VERSION "0.0.0"
#endif

namespace pulseforge {
namespace {

using nlohmann::ordered_json;
using constants::kTwoPi;

[[noreturn]] void rethrow_with_context(const std::string& ctx) {
  try {
    throw;
  } catch (const ParseError& e) {
    throw ParseError(ctx + e.what());
  } catch (const DimensionError& e) {
    throw DimensionError(ctx + e.what());
  } catch (const PreconditionError& e) {
    throw PreconditionError(ctx + e.what());
  } catch (const ConvergenceError& e) {
    throw ConvergenceError(ctx + e.what());
  } catch (const UnsupportedShapeError& e) {
    throw UnsupportedShapeError(ctx + e.what());
  } catch (const std::exception& e) {
    throw Error(ctx + e.what());
  }
}

std::string context(const Scenario& s) {
  std::string c = "scenario '" + s.name + "'";
  if (!s.label.empty() && s.label != s.name) c += " variant '" + s.label + "'";
  return c + ": ";
}

std::string initial_pattern(const std::string& spec, int n) {
  const auto alternate = [n](char a, char b) {
    std::string p;
    for (int j = 0; j < n; ++j) p += (j % 2 == 0) ? a : b;
    return p;
  };
  if (spec == "polarized-x") return std::string(n, '+');
  if (spec == "polarized-y") return std::string(n, 'r');
  if (spec == "polarized-z") return std::string(n, 'u');
  if (spec == "polarized-z-down") return std::string(n, 'd');
  if (spec == "neel-z") return alternate('u', 'd');
  if (spec == "neel-x") return alternate('+', '-');
  if (static_cast<int>(spec.size()) != n)
    throw PreconditionError("initial state '" + spec + "' is neither a known name nor a pattern of " +
                            std::to_string(n) + " sites");
  for (char c : spec)
    if (std::string("ud+-rl").find(c) == std::string::npos)
      throw PreconditionError(std::string("initial state pattern has invalid site '") + c + "'");
  return spec;
}

Eigen::Vector3d bloch_vector(char c) {
  switch (c) {
    case 'u': return {0, 0, 1};
    case 'd': return {0, 0, -1};
    case '+': return {1, 0, 0};
    case '-': return {-1, 0, 0};
    case 'r': return {0, 1, 0};
    default: return {0, -1, 0};
  }
}

int basis_index(char b) { return b == 'x' ? 0 : (b == 'y' ? 1 : 2); }

/** M(a, b) with F sigma_a F^dagger = sum_b M(a, b) sigma_b. */
Eigen::Matrix3d frame_map(const Eigen::Matrix2cd& f) {
  using C = std::complex<double>;
  std::array<Eigen::Matrix2cd, 3> s;
  s[0] << 0, 1, 1, 0;
  s[1] << 0, C(0, -1), C(0, 1), 0;
  s[2] << 1, 0, 0, -1;
  Eigen::Matrix3d m;
  for (int a = 0; a < 3; ++a) {
    const Eigen::Matrix2cd rotated = f * s[a] * f.adjoint();
    for (int b = 0; b < 3; ++b) m(a, b) = 0.5 * (s[b] * rotated).trace().real();
  }
  return m;
}

ToneConfig resolve_tones(const Scenario& s, const ModeStructure& modes) {
  const auto& spec = s.tones;
  ToneConfig t;
  t.eta = spec.eta;
  t.phase_1 = t.phase_2 = -std::numbers::pi / 2.0;
  const double com = modes.frequencies(0);
  if (spec.target_p) {
    t.mu = solve_detuning_for_exponent(modes, t.eta, *spec.target_p, kTwoPi * 2e3, kTwoPi * 5e6);
    t.rabi_1 = t.rabi_2 = solve_rabi_for_j0(modes, t, kTwoPi * *spec.j0_hz);
  } else if (spec.j0_hz) {
    t.mu = com + kTwoPi * *spec.detuning_hz;
    t.rabi_1 = t.rabi_2 = solve_rabi_for_j0(modes, t, kTwoPi * *spec.j0_hz);
  } else {
    const double delta = spec.detuning_hz ? kTwoPi * *spec.detuning_hz
                                          : *spec.detuning_ratio * kTwoPi * *spec.eta_rabi_hz;
    const double eta_rabi = spec.eta_rabi_hz ? kTwoPi * *spec.eta_rabi_hz : delta / *spec.detuning_ratio;
    t.mu = com + delta;
    t.rabi_1 = t.rabi_2 = eta_rabi / t.eta;
  }
  t.validate();
  return t;
}

PulseSequence make_sequence(const Scenario& s, const Eigen::MatrixXd& couplings, double t1) {
  const int n = static_cast<int>(couplings.rows());
  PulseSequence seq;
  if (!s.sequence.file.empty()) {
    seq = load_sequence(s.sequence.file).sequence;
    if (seq.spin_count() != n)
      throw DimensionError("sequence file has " + std::to_string(seq.spin_count()) + " spins, scenario has " +
                           std::to_string(n));
  } else {
    BuilderSpec b;
    b.name = s.sequence.builder;
    b.spins = n;
    b.couplings = couplings;
    b.t1 = t1;
    b.t_pi = s.sequence.t_pi;
    b.bx_hz = s.sequence.bx_hz;
    b.by_hz = s.sequence.by_hz;
    b.bz_hz = s.sequence.bz_hz;
    seq = build_named(b);
  }
  if (!s.sequence.decoupled) seq = seq.without_pulses();
  if (const auto& sh = s.sequence.shape)
    seq = seq.with_envelope(PulseShape::tukey(sh->ramp_time, t1, sh->intensity_exponent));
  return seq;
}

void build_schedule(ResolvedScenario& r) {
  const Scenario& s = r.spec;
  const auto& steps = r.sequence.steps();
  const std::size_t m = steps.size();
  const double period = r.sequence.cycle_time();
  std::vector<double> ends(m);
  double acc = 0.0;
  for (std::size_t i = 0; i < m; ++i) ends[i] = acc += steps[i].segment.duration + steps[i].pulse.duration;

  double span = 0.0;
  if (s.samples.max_time) {
    span = *s.samples.max_time;
  } else {
    if (!(r.jbar0 > 0.0)) throw PreconditionError("sample limit needs a nonzero averaged coupling");
    span = s.samples.max_periods ? *s.samples.max_periods * kTwoPi / (2.0 * r.jbar0) : *s.samples.max_jbar / r.jbar0;
  }
  r.cycles = std::max(1, static_cast<int>(std::ceil(span / period - 1e-9)));
  r.duration = r.cycles * period;

  const std::size_t total = static_cast<std::size_t>(r.cycles) * m;
  const std::size_t stride = s.samples.every_segments > 0 ? static_cast<std::size_t>(s.samples.every_segments)
                                                          : static_cast<std::size_t>(s.samples.every_cycles) * m;
  const bool toggle = s.engine != Engine::SpinOnlyAverage;
  const Eigen::Matrix2cd cycle = pulse_product(r.sequence, m);
  Eigen::Matrix2cd power = Eigen::Matrix2cd::Identity();
  std::size_t power_of = 0;
  r.sample_times.clear();
  r.sample_frames.clear();
  for (std::size_t g = 0; g <= total; g += stride) {
    const std::size_t c = g / m;
    const std::size_t i = g % m;
    while (power_of < c) power = cycle * power, ++power_of;
    r.sample_times.push_back(std::min(r.duration, c * period + (i > 0 ? ends[i - 1] : 0.0)));
    r.sample_frames.push_back(toggle ? Eigen::Matrix2cd(pulse_product(r.sequence, i) * power)
                                     : Eigen::Matrix2cd::Identity());
  }
}

/** Tone intensity relative to the flat top at time t (zero during pulses). */
double intensity_profile(const PulseSequence& seq, double t) {
  const double period = seq.cycle_time();
  double local = std::fmod(t, period);
  for (const auto& st : seq.steps()) {
    if (local <= st.segment.duration) {
      if (!st.segment.envelope) return 1.0;
      const double f = field_envelope(local, *st.segment.envelope);
      return f * f;
    }
    local -= st.segment.duration;
    if (local < st.pulse.duration) return 0.0;
    local -= st.pulse.duration;
  }
  return 1.0;
}

struct Trajectory {
  std::vector<SpinObservables> obs;
  double top = 0.0;
  bool truncation = false;
  double drift = 0.0;
};

struct VariantContext {
  ResolvedScenario resolved;
  std::string pattern;
  Eigen::VectorXcd initial;
  std::vector<Eigen::Matrix3d> maps;
  std::optional<SpinPhononPropagator> propagator;
  DriveProgram program;
  PauliSum hbar;
  NoiseConfig noise;
  bool noisy = false;
  int realizations = 1;
  std::uint64_t seed = 0;
  std::vector<int> dropped;
};

SpinObservables to_frame(const SpinObservables& lab, const Eigen::Matrix3d& m) {
  SpinObservables out = lab;
  for (std::size_t j = 0; j < lab.z.size(); ++j) {
    const Eigen::Vector3d v(lab.x[j], lab.y[j], lab.z[j]);
    const Eigen::Vector3d w = m * v;
    out.x[j] = w(0);
    out.y[j] = w(1);
    out.z[j] = w(2);
  }
  return out;
}

Trajectory run_trajectory(const VariantContext& ctx, std::uint64_t seed) {
  const ResolvedScenario& r = ctx.resolved;
  const Scenario& s = r.spec;
  Trajectory out;
  std::vector<SpinObservables> lab;
  switch (s.engine) {
    case Engine::FullSpinPhonon: {
      SpinPhononState state = ctx.propagator->initial_state(ctx.initial);
      NoiseRealization nz;
      if (ctx.noisy) nz = sample_noise(ctx.noise, ctx.program.duration, seed);
      auto res = ctx.propagator->evolve(state, ctx.program, ctx.noisy ? &nz : nullptr, r.sample_times);
      lab = std::move(res.spins);
      out.top = res.max_top_level_population;
      out.truncation = res.truncation_suspect;
      out.drift = res.max_norm_drift;
      break;
    }
    case Engine::SpinOnlySequence: {
      if (!ctx.noisy) {
        lab = evolve_spin_only(ctx.initial, r.sequence, nullptr, r.sample_times).spins;
        break;
      }
      const NoiseRealization nz = sample_noise(ctx.noise, r.duration, seed);
      ToneConfig tones = *r.tones;
      PulseSequence seq = r.sequence;
      if (nz.detuning_offset != 0.0) {
        tones.mu += nz.detuning_offset;
        const double t1 = r.sequence.steps().front().segment.duration;
        seq = make_sequence(s, coupling_matrix(*r.modes, tones), t1);
      }
      SpinNoise noise;
      const SpinNoise* np = nullptr;
      if (nz.stark_active()) {
        noise.op = uniform_field(r.spec.trap.ion_count, Pauli::Z);
        noise.epsilon = [&nz, &tones, &seq](double t) {
          return induced_stark_shift(nz.stark[0].at(t), nz.stark[1].at(t), tones) * intensity_profile(seq, t);
        };
        np = &noise;
      }
      lab = evolve_spin_only(ctx.initial, seq, np, r.sample_times).spins;
      break;
    }
    case Engine::SpinOnlyAverage:
      lab = evolve_spin_only(ctx.initial, ctx.hbar, r.sample_times).spins;
      break;
  }
  out.obs.reserve(lab.size());
  for (std::size_t k = 0; k < lab.size(); ++k) out.obs.push_back(to_frame(lab[k], ctx.maps[k]));
  return out;
}

VariantContext prepare(const Scenario& s, const ScenarioSet& set, const RunOptions& options) {
  VariantContext ctx;
  ctx.resolved = resolve_scenario(s);
  const ResolvedScenario& r = ctx.resolved;
  ctx.pattern = initial_pattern(s.initial_state, s.trap.ion_count);
  ctx.initial = spin_pattern_state(ctx.pattern);
  for (const auto& f : r.sample_frames) ctx.maps.push_back(frame_map(f));
  ctx.noise = s.noise.effective();
  ctx.noisy = s.noise.any();
  ctx.seed = options.seed.value_or(set.replay_seed.value_or(s.seed));
  ctx.realizations = ctx.noisy ? options.realizations.value_or(set.replay_realizations.value_or(s.realizations)) : 1;
  if (ctx.realizations < 1) throw PreconditionError("realizations must be >= 1");
  if (s.engine == Engine::FullSpinPhonon) {
    PropagatorOptions po;
    po.mode_drop_factor = s.mode_drop_factor;
    ctx.propagator.emplace(*r.modes, r.tones->eta, s.n_max, po);
    ctx.dropped = ctx.propagator->drop_far_modes(*r.tones);
    ProgramOptions pg;
    pg.cycles = r.cycles;
    pg.frame_bz = kTwoPi * s.sequence.bz_hz;
    ctx.program = program_from_sequence(r.sequence, *r.tones, pg);
    ctx.program.dt = s.dt;
    ctx.program.validate();
  } else if (s.engine == Engine::SpinOnlyAverage) {
    ctx.hbar = average_hamiltonian(r.sequence);
  }
  return ctx;
}

ObservableSeries reduce(const std::vector<Trajectory>& runs, const std::vector<double>& times, char basis) {
  const int b = basis_index(basis);
  const auto pick = [b](const SpinObservables& o) -> const std::vector<double>& {
    return b == 0 ? o.x : (b == 1 ? o.y : o.z);
  };
  ObservableSeries s;
  s.times = times;
  s.basis = basis;
  s.realizations = static_cast<int>(runs.size());
  const std::size_t sites = pick(runs.front().obs.front()).size();
  const double n = static_cast<double>(runs.size());
  for (std::size_t k = 0; k < times.size(); ++k) {
    std::vector<double> mean(sites, 0.0), se(sites, 0.0);
    for (std::size_t j = 0; j < sites; ++j) {
      double sum = 0.0;
      for (const auto& run : runs) sum += pick(run.obs[k])[j];
      mean[j] = sum / n;
      if (runs.size() > 1) {
        double ss = 0.0;
        for (const auto& run : runs) ss += std::pow(pick(run.obs[k])[j] - mean[j], 2);
        se[j] = std::sqrt(ss / (n - 1.0) / n);
      }
    }
    s.values.push_back(std::move(mean));
    s.stderrs.push_back(std::move(se));
  }
  s.validate();
  return s;
}

ordered_json matrix_json(const Eigen::MatrixXd& m) {
  ordered_json rows = ordered_json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

ordered_json resolved_json(const VariantContext& ctx) {
  const ResolvedScenario& r = ctx.resolved;
  const Scenario& s = r.spec;
  ordered_json j;
  j["label"] = s.label;
  j["engine"] = engine_name(s.engine);
  j["ions"] = s.trap.ion_count;
  if (r.modes) {
    j["trap"] = {{"transverse_hz", s.trap.omega_xy / kTwoPi}, {"axial_hz", s.trap.omega_z / kTwoPi}};
    std::vector<double> f(r.modes->frequencies.data(), r.modes->frequencies.data() + r.modes->mode_count());
    for (double& x : f) x /= kTwoPi;
    j["mode_frequencies_hz"] = f;
  }
  if (r.tones) {
    const double eta_rabi = r.tones->eta * r.tones->rabi_1;
    const double delta = r.tones->mu - r.modes->frequencies(0);
    j["tones"] = {{"eta", r.tones->eta},
                  {"rabi_hz", r.tones->rabi_1 / kTwoPi},
                  {"mu_hz", r.tones->mu / kTwoPi},
                  {"detuning_hz", delta / kTwoPi},
                  {"detuning_ratio", delta / eta_rabi}};
  }
  j["couplings_hz"] = matrix_json(r.couplings / kTwoPi);
  j["j0_hz"] = r.j0 / kTwoPi;
  j["fitted_p"] = r.fitted_p;
  j["beta"] = r.beta;
  j["jbar0_hz"] = r.jbar0 / kTwoPi;
  j["sequence"] = format_sequence(r.sequence);
  j["initial_state"] = ctx.pattern;
  j["cycles"] = r.cycles;
  j["duration_s"] = r.duration;
  j["samples"] = r.sample_times.size();
  j["observables"] = std::string(s.observables.begin(), s.observables.end());
  j["fit"] = s.fit == FitChoice::None ? "none" : (s.fit == FitChoice::DampedCosine ? "damped-cosine" : "exponential");
  const NoiseConfig& n = ctx.noise;
  j["noise"] = {{"stark_sigma", n.stark.fractional_sigma},
                {"stark_exponent", n.stark.spectrum_exponent},
                {"stark_band_hz", {n.stark.band_low, n.stark.band_high}},
                {"stark_window_s", n.stark.window},
                {"stark_grid_s", n.stark.grid_dt},
                {"detuning_sigma_hz", n.detuning.sigma / kTwoPi},
                {"kick_amplitude", n.heating.kick_amplitude},
                {"kick_interval_s", n.heating.interval},
                {"heating_mode", n.heating.target_mode}};
  if (s.engine == Engine::FullSpinPhonon)
    j["propagator"] = {{"n_max", s.n_max}, {"dt_s", s.dt}, {"mode_drop_factor", s.mode_drop_factor}};
  j["realizations"] = ctx.realizations;
  return j;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string engine_version() { return PULSEFORGE_VERSION; }

ResolvedScenario resolve_scenario(const Scenario& s) {
  try {
    s.validate();
    ResolvedScenario r;
    r.spec = s;
    const int n = s.trap.ion_count;
    if (s.use_trap) {
      r.modes = transverse_modes(s.trap);
      r.tones = resolve_tones(s, *r.modes);
      r.couplings = coupling_matrix(*r.modes, *r.tones);
    } else {
      r.couplings = power_law_couplings(n, kTwoPi * *s.power_law_j0_hz, *s.power_law_p);
    }
    if (n == 2) {
      r.j0 = r.couplings(0, 1);
    } else {
      const PowerLawFit fit = power_law_fit(r.couplings);
      r.j0 = fit.j0;
      r.fitted_p = fit.p;
    }
    if (!(r.j0 > 0.0)) throw PreconditionError("nearest-neighbour coupling scale must be positive");
    const double t1 = s.sequence.t1_j0 ? *s.sequence.t1_j0 / r.j0 : s.sequence.t1;
    r.sequence = make_sequence(s, r.couplings, t1);
    if (r.sequence.spin_count() != n) throw DimensionError("sequence spin count differs from the ion count");
    const auto& first = r.sequence.steps().front().segment;
    r.beta = first.envelope ? effective_beta(*first.envelope, first.duration) : 1.0;
    r.jbar0 = r.j0 * time_dilution_factor(r.sequence);
    build_schedule(r);
    return r;
  } catch (...) {
    rethrow_with_context(context(s));
  }
}

const ObservableSeries& VariantResult::observable(char basis) const {
  for (const auto& [b, s] : series)
    if (b == basis) return s;
  throw PreconditionError(std::string("observable '") + basis + "' was not recorded");
}

RunOutput run_scenario(const ScenarioSet& set, const RunOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  std::vector<VariantContext> ctx;
  for (const auto& s : set.variants) {
    try {
      ctx.push_back(prepare(s, set, options));
    } catch (...) {
      rethrow_with_context(context(s));
    }
  }

  struct Task {
    std::size_t variant;
    int index;
  };
  std::vector<Task> tasks;
  std::vector<std::vector<Trajectory>> runs(ctx.size());
  for (std::size_t v = 0; v < ctx.size(); ++v) {
    runs[v].resize(ctx[v].realizations);
    for (int k = 0; k < ctx[v].realizations; ++k) tasks.push_back({v, k});
  }
  std::vector<std::exception_ptr> errors(tasks.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  const auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size() && !failed; i = next++) {
      const Task& t = tasks[i];
      try {
        runs[t.variant][t.index] = run_trajectory(ctx[t.variant], mix_seed(ctx[t.variant].seed, t.index));
      } catch (...) {
        errors[i] = std::current_exception();
        failed = true;
      }
    }
  };
  std::size_t workers = options.workers > 0 ? static_cast<std::size_t>(options.workers)
                                            : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, tasks.size());
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (!errors[i]) continue;
    const Scenario& s = ctx[tasks[i].variant].resolved.spec;
    try {
      std::rethrow_exception(errors[i]);
    } catch (...) {
      rethrow_with_context(context(s) + "trajectory " + std::to_string(tasks[i].index) + ": ");
    }
  }

  RunOutput out;
  out.name = set.name;
  std::vector<std::pair<std::string, ObservableSeries>> csv_series;
  std::vector<std::pair<std::string, ScalarSeries>> csv_scalars;
  std::vector<std::pair<std::string, FitResult>> csv_fits;
  std::vector<FitRow> extra;
  ordered_json resolved = ordered_json::array();
  ordered_json variants = ordered_json::array();

  for (std::size_t v = 0; v < ctx.size(); ++v) {
    const VariantContext& c = ctx[v];
    const ResolvedScenario& r = c.resolved;
    const Scenario& s = r.spec;
    VariantResult res;
    res.label = s.label;
    res.resolved = r;
    res.dropped_modes = c.dropped;
    for (int k = 0; k < c.realizations; ++k) res.seeds.push_back(mix_seed(c.seed, k));
    for (const auto& t : runs[v]) {
      res.truncation_suspect = res.truncation_suspect || t.truncation;
      res.max_top_level_population = std::max(res.max_top_level_population, t.top);
      res.max_norm_drift = std::max(res.max_norm_drift, t.drift);
    }
    for (char b : s.observables) {
      res.series.emplace_back(b, reduce(runs[v], r.sample_times, b));
      csv_series.emplace_back(s.label + "." + b, res.series.back().second);
    }

    try {
      if (s.fit == FitChoice::DampedCosine) {
        const ObservableSeries& z = res.observable('z');
        ScalarSeries mean{z.times, z.mean(), z.mean_stderr()};
        FitOptions fo;
        fo.frequency_hint = 2.0 * r.jbar0 / kTwoPi;
        res.fit = fit_damped_cosine(mean, fo);
      } else if (s.fit == FitChoice::Exponential) {
        const char b = s.observables.front();
        std::vector<double> pattern;
        for (char site : c.pattern) pattern.push_back(bloch_vector(site)(basis_index(b)));
        res.imbalance = generalized_imbalance(res.observable(b), pattern);
        csv_scalars.emplace_back(s.label + ".imbalance", *res.imbalance);
        res.fit = fit_exponential_decay(*res.imbalance);
        extra.push_back({s.label + ".jbar0_tau", r.jbar0 * res.fit->tau, r.jbar0 * res.fit->tau_err});
      }
    } catch (const Error& e) {
      res.fit.reset();
      res.fit_error = e.what();
    }
    if (res.fit) csv_fits.emplace_back(s.label, *res.fit);
    if (s.fit != FitChoice::None && !res.fit) extra.push_back({s.label + ".fit_failed", 1.0, 0.0});
    extra.push_back({s.label + ".j0_hz", r.j0 / kTwoPi, 0.0});
    extra.push_back({s.label + ".jbar0_hz", r.jbar0 / kTwoPi, 0.0});
    extra.push_back({s.label + ".beta", r.beta, 0.0});
    if (s.trap.ion_count > 2) extra.push_back({s.label + ".fitted_p", r.fitted_p, 0.0});
    extra.push_back({s.label + ".realizations", static_cast<double>(c.realizations), 0.0});

    ordered_json rj = resolved_json(c);
    resolved.push_back(rj);
    rj["seeds"] = res.seeds;
    rj["truncation_suspect"] = res.truncation_suspect;
    rj["max_top_level_population"] = res.max_top_level_population;
    rj["max_norm_drift"] = res.max_norm_drift;
    rj["dropped_modes"] = res.dropped_modes;
    if (!res.fit_error.empty()) rj["fit_error"] = res.fit_error;
    variants.push_back(std::move(rj));
    out.variants.push_back(std::move(res));
  }

  out.series_csv = series_csv(csv_series, csv_scalars);
  out.fits_csv = fits_csv(csv_fits, extra);
  out.scenario_hash = fnv1a(resolved.dump());
  out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  ordered_json record;
  record["run_record"] = 1;
  record["scenario"] = set.name;
  record["scenario_hash"] = hex64(out.scenario_hash);
  record["engine_version"] = engine_version();
  record["seed"] = ctx.front().seed;
  record["realizations"] = options.realizations.value_or(set.replay_realizations.value_or(set.variants.front().realizations));
  record["started_utc"] = utc_now();
  record["wall_clock_s"] = out.wall_seconds;
  record["workers"] = workers;
  record["uncertainty"] = "standard errors over trajectories; fit errors from the least-squares covariance";
  record["variants"] = std::move(variants);
  record["config"] = ordered_json::parse(set.canonical_config);
  out.run_json = record.dump(2) + "\n";
  return out;
}

void write_run_output(const RunOutput& out, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const std::vector<std::pair<std::string, const std::string*>> files{
      {"series.csv", &out.series_csv}, {"fits.csv", &out.fits_csv}, {"run.json", &out.run_json}};
  std::vector<fs::path> staged;
  try {
    for (const auto& [name, content] : files) {
      const fs::path part = fs::path(dir) / (name + ".partial");
      staged.push_back(part);
      write_file_atomic(part.string(), *content);
    }
    for (std::size_t i = 0; i < files.size(); ++i) fs::rename(staged[i], fs::path(dir) / files[i].first);
  } catch (...) {
    std::error_code ec;
    for (const auto& p : staged) fs::remove(p, ec);
    throw;
  }
}

}  // namespace pulseforge
