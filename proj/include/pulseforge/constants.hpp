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

#include <numbers>

namespace pulseforge::constants {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Trap and drive.
inline constexpr double kTransverseFrequencyHz = 4.8e6;
inline constexpr double kAxialFrequencyHz = 0.5e6;
inline constexpr double kLambDicke = 0.08;
inline constexpr double kIntegratorStep = 15e-9;
inline constexpr int kPhononCutoff = 2;
// Two-ion drive: detuning above the centre-of-mass mode.
inline constexpr double kTwoIonDetuningHz = 30e3;

// Sequence timing.
inline constexpr double kPiPulseTime = 5e-6;
inline constexpr double kRampTime = 20e-6;
inline constexpr double kSegmentTime = 120e-6;

// Noise channels.
inline constexpr double kStarkFractionalSigma = 0.021;
inline constexpr double kStarkSpectrumExponent = 2.0;
inline constexpr double kStarkBandLowHz = 100.0;
inline constexpr double kStarkBandHighHz = 1e6;
inline constexpr double kStarkWindow = 0.1;
inline constexpr double kStarkGrid = 0.4e-6;
inline constexpr double kDetuningSigmaHz = 4.5e3;

// Heating: each kick is D(alpha) with |alpha| = kKickAmplitude on the
// centre-of-mass mode. With uniformly random phases <n> grows by |alpha|^2
// per kick, i.e. kKickAmplitude^2 / kKickInterval = 66.7 quanta/s.
inline constexpr double kKickAmplitude = 0.01;
inline constexpr double kKickInterval = 1.5e-6;
inline constexpr double kHeatingRate = kKickAmplitude * kKickAmplitude / kKickInterval;

}  // namespace pulseforge::constants
