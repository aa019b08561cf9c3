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

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pulseforge/constants.hpp"
#include "pulseforge/ion_chain.hpp"
#include "pulseforge/krylov.hpp"
#include "pulseforge/noise.hpp"
#include "pulseforge/pauli.hpp"
#include "pulseforge/pulse_shape.hpp"
#include "pulseforge/sequence.hpp"
#include "pulseforge/spin_state.hpp"

namespace pulseforge {

/**
 * Spin register tensored with truncated phonon registers.
 *
 * Index = spin * phonon_dim + phonons, where the spin index uses site 0 as
 * the most significant bit (bit set = spin down along z) and the phonon
 * index is mixed-radix in (n_max + 1) with mode 0 most significant.
 */
class SpinPhononState {
 public:
  SpinPhononState(int spin_count, int mode_count, int n_max);

  /** Product of a spin state and phonon Fock states (default ground state). */
  static SpinPhononState product(const Eigen::VectorXcd& spins, int mode_count, int n_max,
                                 const std::vector<int>& fock = {});

  int spin_count() const { return spins_; }
  int mode_count() const { return modes_; }
  int n_max() const { return n_max_; }
  std::size_t spin_dim() const { return std::size_t{1} << spins_; }
  std::size_t phonon_dim() const { return phonon_dim_; }
  std::size_t size() const { return amp_.size(); }

  std::complex<double>* data() { return amp_.data(); }
  const std::complex<double>* data() const { return amp_.data(); }
  std::vector<std::complex<double>>& amplitudes() { return amp_; }
  const std::vector<std::complex<double>>& amplitudes() const { return amp_; }

  /** Occupation of `mode` in phonon index m. */
  int occupation(std::size_t m, int mode) const;
  std::size_t stride(int mode) const;

  double norm() const;
  SpinObservables spin_observables() const;
  std::vector<double> mean_phonons() const;
  /** Population in the n = n_max level, per mode. */
  std::vector<double> top_level_population() const;
  /** Spin-configuration populations (diagonal of the reduced spin density matrix). */
  std::vector<double> spin_populations() const;

 private:
  int spins_;
  int modes_;
  int n_max_;
  std::size_t phonon_dim_;
  std::vector<std::complex<double>> amp_;
};

/** One laser tone: Rabi rate (rad/s), detuning from the qubit (rad/s), phase (rad). */
struct Tone {
  double rabi = 0.0;
  double detuning = 0.0;
  double phase = 0.0;
  /** Index of the Stark trace modulating this tone, or -1. */
  int stark_channel = -1;
  /** Whether the static detuning offset shifts this tone away from the carrier. */
  bool detuning_noise = false;
};

/** Tones switched on together over [start, stop] under one envelope. */
struct ToneWindow {
  double start = 0.0;
  double stop = 0.0;
  PulseShape shape;
  std::vector<Tone> tones;
};

/** Ideal rotation applied instantaneously to the spin register. */
struct TimedRotation {
  double time = 0.0;
  GlobalRotation rotation;
};

struct DriveProgram {
  std::vector<ToneWindow> windows;
  std::vector<TimedRotation> rotations;
  std::vector<PhaseLaw> phase_laws;
  double dt = constants::kIntegratorStep;
  double duration = 0.0;

  /** Symmetric two-tone window at +-mu; tone 0 uses Stark channel 0, tone 1 channel 1. */
  void add_ms_window(double start, double stop, const PulseShape& shape, const ToneConfig& tones);
  /** Single resonant tone realising `rotation` over `length` seconds with a flat envelope. */
  void add_carrier(double start, double length, const GlobalRotation& rotation);
  void validate() const;
};

struct ProgramOptions {
  int cycles = 1;
  double t0 = 0.0;
  /** Engineered z field (rad/s) realised through drive-phase laws; CPMG cycles only. */
  double frame_bz = 0.0;
  /** Realise pulses with a resonant carrier over their duration instead of instantaneously. */
  bool shaped_rotations = false;
};

/**
 * Drive program for `cycles` repetitions of a sequence whose segments are
 * pure XX or YY couplings: each segment becomes a two-tone window with the
 * spin phase selecting the axis, each pulse an ideal rotation at the end of
 * its segment (or a carrier over the pulse time when shaped). The segment
 * envelope, when bound, shapes the window.
 */
DriveProgram program_from_sequence(const PulseSequence& seq, const ToneConfig& tones,
                                   const ProgramOptions& options);

struct PropagatorOptions {
  KrylovOptions krylov;
  /** Modes with |mu - omega| above this many eta*Omega are dropped; 0 keeps all. */
  double mode_drop_factor = 50.0;
  double truncation_threshold = 0.05;
  double norm_drift_threshold = 1e-6;
  /** Average each term's oscillation over the step rather than sampling it at the midpoint. */
  bool step_average = true;
};

struct PropagationResult {
  std::vector<double> times;
  std::vector<SpinObservables> spins;
  std::vector<std::vector<double>> mean_phonons;
  std::vector<std::vector<double>> spin_populations;
  double max_top_level_population = 0.0;
  bool truncation_suspect = false;
  double max_norm_drift = 0.0;
  bool norm_drift_exceeded = false;
  std::vector<int> dropped_modes;
  std::size_t steps = 0;
  int max_krylov_dimension = 0;
};

/**
 * Full spin-phonon propagator for the tone Hamiltonian in the interaction
 * picture of qubits and modes:
 *   H(t) = sum_j sigma+_j sum_tones (Omega/2) [1 + i eta sum_nu b_nu,j
 *          (a_nu e^{-i w_nu t} + a+_nu e^{i w_nu t})] e^{-i mu t + i phi - i phi_frame(t)} + h.c.
 */
class SpinPhononPropagator {
 public:
  SpinPhononPropagator(ModeStructure modes, double eta, int n_max, PropagatorOptions options = {});

  /** Keeps only the listed modes (indices into the full mode list). */
  void select_modes(const std::vector<int>& modes);
  /** Applies the drop rule for a given drive; returns the dropped mode indices. */
  std::vector<int> drop_far_modes(const ToneConfig& tones);

  const std::vector<int>& active_modes() const { return active_; }
  int n_max() const { return n_max_; }

  SpinPhononState initial_state(const Eigen::VectorXcd& spins, const std::vector<int>& fock = {}) const;

  /** Evolves `state` through the program, recording observables at `sample_times`. */
  PropagationResult evolve(SpinPhononState& state, const DriveProgram& program,
                           const NoiseRealization* noise, const std::vector<double>& sample_times) const;

 private:
  ModeStructure modes_;
  double eta_;
  int n_max_;
  PropagatorOptions opts_;
  std::vector<int> active_;
  std::vector<int> dropped_;
};

/** Noise applied to the spin-only engine: epsilon(t) times `op` during noise-bound segments. */
struct SpinNoise {
  std::function<double(double)> epsilon;
  PauliSum op;
};

struct SpinEvolutionOptions {
  KrylovOptions krylov;
  /** Longest Krylov step inside a segment with time-dependent coefficients. */
  double substep = 5e-6;
  int dense_cap = kDenseSpinCap;
};

struct SpinEvolutionResult {
  std::vector<double> times;
  std::vector<SpinObservables> spins;
};

/** Mode (a): exact evolution under a time-independent Hamiltonian. */
SpinEvolutionResult evolve_spin_only(const Eigen::VectorXcd& initial, const PauliSum& hamiltonian,
                                     const std::vector<double>& sample_times,
                                     const SpinEvolutionOptions& options = {});

/**
 * Mode (b): cycle-by-cycle evolution of a pulse sequence. Segment Hamiltonians
 * are scaled by their envelope profile; the optional noise term is added in
 * noise-bound segments. Pulses are instantaneous and occupy their duration.
 * Samples are taken at the requested times, which must fall on cycle
 * boundaries or inside segments.
 */
SpinEvolutionResult evolve_spin_only(const Eigen::VectorXcd& initial, const PulseSequence& seq,
                                     const SpinNoise* noise, const std::vector<double>& sample_times,
                                     const SpinEvolutionOptions& options = {});

}  // namespace pulseforge
