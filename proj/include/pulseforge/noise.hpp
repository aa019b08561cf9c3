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

#include <array>
#include <complex>
#include <cstdint>
#include <vector>

#include "pulseforge/constants.hpp"
#include "pulseforge/ion_chain.hpp"
#include "pulseforge/trace.hpp"

namespace pulseforge {

struct StarkNoiseConfig {
  double fractional_sigma = constants::kStarkFractionalSigma;
  double spectrum_exponent = constants::kStarkSpectrumExponent;
  double band_low = constants::kStarkBandLowHz;
  double band_high = constants::kStarkBandHighHz;
  double window = constants::kStarkWindow;
  double grid_dt = constants::kStarkGrid;
};

struct DetuningNoiseConfig {
  double sigma = constants::kTwoPi * constants::kDetuningSigmaHz;  ///< rad/s
};

struct HeatingNoiseConfig {
  double kick_amplitude = constants::kKickAmplitude;
  double interval = constants::kKickInterval;
  int target_mode = 0;  ///< index into the descending mode list; 0 is centre of mass
};

struct NoiseConfig {
  StarkNoiseConfig stark;
  DetuningNoiseConfig detuning;
  HeatingNoiseConfig heating;

  /** All channels at the published magnitudes. */
  static NoiseConfig defaults() { return {}; }
  /** All channels switched off. */
  static NoiseConfig none();
  void validate() const;
};

struct HeatingKick {
  double time = 0.0;
  double phase = 0.0;
  double amplitude = 0.0;
  int mode = 0;
  std::complex<double> alpha() const { return std::polar(amplitude, phase); }
};

/** Seeds derived from one master seed, one per channel. */
struct NoiseSeeds {
  std::uint64_t master = 0;
  std::uint64_t stark = 0;
  std::uint64_t detuning = 0;
  std::uint64_t heating = 0;

  static NoiseSeeds derive(std::uint64_t master);
};

struct NoiseRealization {
  /** Fractional intensity fluctuations x_1(t), x_2(t) of the two tones. */
  std::array<SampledTrace, 2> stark;
  double detuning_offset = 0.0;
  std::vector<HeatingKick> kicks;
  NoiseSeeds seeds;

  bool stark_active() const { return !stark[0].empty() || !stark[1].empty(); }
};

/** splitmix64 mixing step; used to derive independent sub-seeds. */
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

/**
 * Two independent 1/f^exponent traces covering [0, duration] on a grid of
 * grid_dt. Each window of cfg.window seconds is synthesised separately and
 * rescaled to zero mean and standard deviation fractional_sigma.
 */
std::array<SampledTrace, 2> sample_stark_traces(const StarkNoiseConfig& cfg, double duration,
                                               std::uint64_t seed);

/** (Omega_2^2 (1+x2)^2 - Omega_1^2 (1+x1)^2) / (4 mu), rad/s. */
double induced_stark_shift(double x1, double x2, const ToneConfig& tones);

/** Static Gaussian detuning offset (rad/s). */
double sample_detuning_offset(const DetuningNoiseConfig& cfg, std::uint64_t seed);

/** Kicks at multiples of the interval up to `duration`, uniformly random phases. */
std::vector<HeatingKick> heating_kick_schedule(const HeatingNoiseConfig& cfg, double duration,
                                               std::uint64_t seed);

/** Samples every channel for one trajectory. */
NoiseRealization sample_noise(const NoiseConfig& cfg, double duration, std::uint64_t seed);

}  // namespace pulseforge
