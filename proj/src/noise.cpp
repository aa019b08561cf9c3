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

#include "pulseforge/noise.hpp"

#include <cmath>
#include <mutex>
#include <numeric>
#include <random>
#include <string>

#include <fftw3.h>

#include "pulseforge/error.hpp"

namespace pulseforge {

namespace {

// FFTW's planner is not re-entrant.
std::mutex& fftw_mutex() {
  static std::mutex m;
  return m;
}

std::vector<double> synthesise_window(const StarkNoiseConfig& cfg, std::size_t n,
                                      std::mt19937_64& rng) {
  const std::size_t bins = n / 2 + 1;
  const double df = 1.0 / (static_cast<double>(n) * cfg.grid_dt);
  std::uniform_real_distribution<double> phase(0.0, constants::kTwoPi);
  fftw_complex* spec = fftw_alloc_complex(bins);
  std::vector<double> out(n);
  for (std::size_t k = 0; k < bins; ++k) {
    const double f = static_cast<double>(k) * df;
    // Draw a phase for every bin so the stream does not depend on the band.
    const double ph = phase(rng);
    double a = 0.0;
    if (k > 0 && f >= cfg.band_low && f <= cfg.band_high)
      a = std::pow(f, -0.5 * cfg.spectrum_exponent);
    spec[k][0] = a * std::cos(ph);
    spec[k][1] = a * std::sin(ph);
  }
  if (n % 2 == 0) spec[bins - 1][1] = 0.0;
  {
    std::lock_guard lock(fftw_mutex());
    fftw_plan plan = fftw_plan_dft_c2r_1d(static_cast<int>(n), spec, out.data(), FFTW_ESTIMATE);
    fftw_execute(plan);
    fftw_destroy_plan(plan);
  }
  fftw_free(spec);
  const double mean = std::accumulate(out.begin(), out.end(), 0.0) / static_cast<double>(n);
  double var = 0.0;
  for (double& v : out) {
    v -= mean;
    var += v * v;
  }
  const double sd = std::sqrt(var / static_cast<double>(n));
  if (sd == 0.0) throw PreconditionError("Stark noise band contains no frequency bins");
  const double scale = cfg.fractional_sigma / sd;
  for (double& v : out) v *= scale;
  return out;
}

}  // namespace

NoiseConfig NoiseConfig::none() {
  NoiseConfig c;
  c.stark.fractional_sigma = 0.0;
  c.detuning.sigma = 0.0;
  c.heating.kick_amplitude = 0.0;
  return c;
}

void NoiseConfig::validate() const {
  if (stark.fractional_sigma < 0.0 || detuning.sigma < 0.0 || heating.kick_amplitude < 0.0)
    throw PreconditionError("noise magnitudes must be >= 0");
  if (!(stark.band_low > 0.0) || !(stark.band_low < stark.band_high))
    throw PreconditionError("Stark band must satisfy 0 < low < high");
  if (!(heating.interval > 0.0)) throw PreconditionError("heating interval must be > 0");
  if (!(stark.window > 0.0) || !(stark.grid_dt > 0.0))
    throw PreconditionError("Stark window and grid must be > 0");
  if (stark.grid_dt > 0.5 / stark.band_high + 1e-18)
    throw PreconditionError("Stark grid step " + std::to_string(stark.grid_dt) +
                            " s aliases the band edge at " + std::to_string(stark.band_high) + " Hz");
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

NoiseSeeds NoiseSeeds::derive(std::uint64_t master) {
  return {master, mix_seed(master, 1), mix_seed(master, 2), mix_seed(master, 3)};
}

std::array<SampledTrace, 2> sample_stark_traces(const StarkNoiseConfig& cfg, double duration,
                                               std::uint64_t seed) {
  NoiseConfig probe;
  probe.stark = cfg;
  probe.validate();
  std::array<SampledTrace, 2> traces;
  const auto needed = static_cast<std::size_t>(std::ceil(duration / cfg.grid_dt - 1e-9)) + 1;
  for (auto& t : traces) {
    t.t0 = 0.0;
    t.dt = cfg.grid_dt;
  }
  if (cfg.fractional_sigma == 0.0) {
    for (auto& t : traces) t.values.assign(needed, 0.0);
    return traces;
  }
  const auto window_n = static_cast<std::size_t>(std::llround(cfg.window / cfg.grid_dt));
  std::mt19937_64 rng(seed);
  for (auto& t : traces) {
    t.values.reserve(needed);
    while (t.values.size() < needed) {
      auto w = synthesise_window(cfg, window_n, rng);
      const std::size_t take = std::min(w.size(), needed - t.values.size());
      t.values.insert(t.values.end(), w.begin(), w.begin() + static_cast<std::ptrdiff_t>(take));
    }
  }
  return traces;
}

double induced_stark_shift(double x1, double x2, const ToneConfig& tones) {
  const double a1 = tones.rabi_1 * (1.0 + x1);
  const double a2 = tones.rabi_2 * (1.0 + x2);
  return (a2 * a2 - a1 * a1) / (4.0 * tones.mu);
}

double sample_detuning_offset(const DetuningNoiseConfig& cfg, std::uint64_t seed) {
  if (cfg.sigma == 0.0) return 0.0;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, cfg.sigma);
  return g(rng);
}

std::vector<HeatingKick> heating_kick_schedule(const HeatingNoiseConfig& cfg, double duration,
                                               std::uint64_t seed) {
  std::vector<HeatingKick> kicks;
  if (cfg.kick_amplitude == 0.0) return kicks;
  if (!(cfg.interval > 0.0)) throw PreconditionError("heating interval must be > 0");
  const auto count = static_cast<long>(std::floor(duration / cfg.interval + 1e-9));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> phase(0.0, constants::kTwoPi);
  kicks.reserve(static_cast<std::size_t>(std::max(0L, count)));
  for (long k = 1; k <= count; ++k)
    kicks.push_back({static_cast<double>(k) * cfg.interval, phase(rng), cfg.kick_amplitude,
                     cfg.target_mode});
  return kicks;
}

NoiseRealization sample_noise(const NoiseConfig& cfg, double duration, std::uint64_t seed) {
  cfg.validate();
  NoiseRealization r;
  r.seeds = NoiseSeeds::derive(seed);
  if (cfg.stark.fractional_sigma > 0.0) r.stark = sample_stark_traces(cfg.stark, duration, r.seeds.stark);
  r.detuning_offset = sample_detuning_offset(cfg.detuning, r.seeds.detuning);
  r.kicks = heating_kick_schedule(cfg.heating, duration, r.seeds.heating);
  return r;
}

}  // namespace pulseforge
