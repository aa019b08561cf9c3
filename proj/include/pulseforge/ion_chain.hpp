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

#include <string>

#include <Eigen/Dense>

namespace pulseforge {

/** Linear ion chain in a harmonic trap. Frequencies in rad/s. */
struct TrapConfig {
  int ion_count = 2;
  double omega_xy = 0.0;
  double omega_z = 0.0;

  void validate() const;
};

/**
 * Transverse normal modes, sorted by descending frequency (index 0 is the
 * centre-of-mass mode). amplitudes(nu, j) is the participation of ion j.
 */
struct ModeStructure {
  Eigen::VectorXd frequencies;
  Eigen::MatrixXd amplitudes;

  int mode_count() const { return static_cast<int>(frequencies.size()); }
  int ion_count() const { return static_cast<int>(amplitudes.cols()); }
};

/**
 * Bichromatic drive: tone 1 at +mu with Rabi rate rabi_1 and phase phase_1,
 * tone 2 at -mu. Rates and detunings in rad/s.
 */
struct ToneConfig {
  double rabi_1 = 0.0;
  double rabi_2 = 0.0;
  double mu = 0.0;
  double phase_1 = 0.0;
  double phase_2 = 0.0;
  double eta = 0.08;

  /** Warns when eta exceeds 0.2; throws on non-positive values. */
  void validate() const;
  /** (phase_1 + phase_2 + pi) / 2. */
  double spin_phase() const;
  /** (mu - omega_1) / 2 pi in Hz, relative to the highest mode. */
  double detuning_hz(const ModeStructure& modes) const;
};

struct PowerLawFit {
  double j0 = 0.0;
  double p = 0.0;
  /** False for two ions, where only J0 is determined. */
  bool exponent_defined = true;
  int excluded_pairs = 0;
};

/** Dimensionless axial positions minimising the harmonic plus Coulomb energy. */
Eigen::VectorXd equilibrium_positions(int ion_count, int max_iterations = 200);

/** Throws PreconditionError on an imaginary mode frequency (zigzag instability). */
ModeStructure transverse_modes(const TrapConfig& cfg);

/** Default resonance guard band, rad/s. */
inline constexpr double kDefaultGuardBand = 2.0 * 3.14159265358979323846 * 1e3;

/**
 * J_jk = sum_nu omega_nu eta^2 Omega_1 Omega_2 b_nu,j b_nu,k / (mu^2 - omega_nu^2),
 * in rad/s for the spin Hamiltonian sum_{j<k} J_jk sigma_j sigma_k. Positive
 * above the highest mode.
 */
Eigen::MatrixXd coupling_matrix(const ModeStructure& modes, const ToneConfig& tones,
                                double guard_band = kDefaultGuardBand);

/** Least-squares fit of log|J_jk| against log|j - k| over all pairs. */
PowerLawFit power_law_fit(const Eigen::MatrixXd& couplings);

/**
 * Detuning mu (rad/s) above the highest mode whose coupling matrix fits to
 * exponent `target_p`, found by bisection of mu - omega_1 in [lo, hi] (rad/s).
 */
double solve_detuning_for_exponent(const ModeStructure& modes, double eta, double target_p,
                                   double lo, double hi);

/** Equal-tone Rabi rate giving a fitted nearest-neighbour scale `target_j0` (rad/s). */
double solve_rabi_for_j0(const ModeStructure& modes, ToneConfig tones, double target_j0);

/** Writes row,col,value_rad_per_s. */
void write_coupling_csv(const std::string& path, const Eigen::MatrixXd& couplings);

}  // namespace pulseforge
