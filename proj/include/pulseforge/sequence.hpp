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

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pulseforge/pauli.hpp"
#include "pulseforge/pulse_shape.hpp"
#include "pulseforge/trace.hpp"

namespace pulseforge {

/** Interaction period: ideal Hamiltonian H_n held for t_n seconds. */
struct Segment {
  PauliSum hamiltonian;
  double duration = 0.0;
  /** Whether the noise operator is active during this segment. */
  bool noise_bound = true;
  /** Shaped interaction envelope; flat when empty. */
  std::optional<PulseShape> envelope;
};

/** Global rotation closing a segment, with the wall-clock time it occupies. */
struct Pulse {
  GlobalRotation rotation;
  double duration = 0.0;
};

struct SequenceStep {
  Segment segment;
  Pulse pulse;
};

/**
 * One period of a dynamical-decoupling cycle: segment, pulse, segment,
 * pulse, ... The pairing into steps enforces the alternation.
 */
class PulseSequence {
 public:
  PulseSequence() = default;
  PulseSequence(std::string name, std::vector<SequenceStep> steps);

  const std::string& name() const { return name_; }
  const std::vector<SequenceStep>& steps() const { return steps_; }
  int spin_count() const;
  double cycle_time() const;

  /**
   * Rotations the pulse product may reduce to instead of the identity, for
   * sequences whose target is invariant under them.
   */
  const std::vector<GlobalRotation>& closure_symmetries() const { return symmetries_; }
  void add_closure_symmetry(const GlobalRotation& r) { symmetries_.push_back(r); }

  /** Same timing with every pulse replaced by the identity. */
  PulseSequence without_pulses() const;
  /** Binds `shape` (duration set per segment) to every segment. */
  PulseSequence with_envelope(const PulseShape& shape) const;

 private:
  void validate() const;
  std::string name_;
  std::vector<SequenceStep> steps_;
  std::vector<GlobalRotation> symmetries_;
};

/** Accumulated product P_k ... P_1 of the first k pulses, as a 2x2 unitary. */
Eigen::Matrix2cd pulse_product(const PulseSequence& seq, std::size_t k);

/**
 * Toggling-frame Hamiltonians H'_n. When `noise` is given it is added to
 * every noise-bound segment before conjugation.
 */
std::vector<PauliSum> toggling_frame(const PulseSequence& seq,
                                     const std::optional<PauliSum>& noise = std::nullopt);

/** Toggled noise operator of each segment (zero for unbound segments). */
std::vector<PauliSum> toggled_noise(const PulseSequence& seq, const PauliSum& noise);

/** Effective duration beta_n t_n of a segment; t_n when no envelope is bound. */
double effective_duration(const Segment& seg, BetaModel model = BetaModel::Quadrature);

/** Sum of beta_n t_n over T: the factor relating H-bar to H_t. */
double time_dilution_factor(const PulseSequence& seq, BetaModel model = BetaModel::Quadrature);

/** Sum_n beta_n t_n H'_n / T. */
PauliSum average_hamiltonian(const PulseSequence& seq,
                             const std::optional<PauliSum>& noise = std::nullopt,
                             BetaModel model = BetaModel::Quadrature);

struct DecouplingOptions {
  double tolerance = 1e-10;
  /** Require H'_n = H_t segment by segment; otherwise compare H-bar with H_t. */
  bool strict_target = true;
};

struct DecouplingReport {
  double frame_closure_residual = 0.0;
  /** Symmetry the pulse product reduced to, when not the identity. */
  std::optional<GlobalRotation> closure_symmetry;
  std::vector<double> segment_target_residuals;
  double average_target_residual = 0.0;
  double noise_residual = 0.0;
  bool strict_target = true;

  bool frame_closure_pass = false;
  bool target_pass = false;
  bool noise_pass = false;
  bool pass() const { return frame_closure_pass && target_pass && noise_pass; }
  std::string to_string() const;
};

/**
 * Pulse-product phase-stripped deviation from the identity: the largest
 * |lambda - 1| over the eigenvalues of (P_n ... P_1)^{(x)N} after dividing by
 * the phase of its first nonzero element.
 */
double frame_closure_residual(const Eigen::Matrix2cd& product, int spin_count);

DecouplingReport validate_decoupling(const PulseSequence& seq, const PauliSum& target,
                                     const PauliSum& noise, const DecouplingOptions& opts = {});

/** Ising-type target: couplings J_jk sigma^x_j sigma^x_k plus a uniform field. */
struct TargetParams {
  Eigen::MatrixXd couplings;
  double bx = 0.0;
  double by = 0.0;
  double bz = 0.0;

  int spin_count() const { return static_cast<int>(couplings.rows()); }
};

/** J_jk = j0 / |j - k|^p for j != k. */
Eigen::MatrixXd power_law_couplings(int spin_count, double j0, double p);

/** sum_{j<k} J_jk P_j P_k for P in {X, Y, Z}. */
PauliSum pair_hamiltonian(const Eigen::MatrixXd& couplings, Pauli p);
/** Couplings plus uniform field. */
PauliSum ising_target(const TargetParams& params);
/** sum_{j<k} J_jk (XX + YY + ZZ) / 3. */
PauliSum heisenberg_target(const Eigen::MatrixXd& couplings);
/** sum_{j<k} J_jk (2 XX + YY) / 3. */
PauliSum hs_modified_target(const Eigen::MatrixXd& couplings);
/** sum_j sigma^p_j with unit coefficient. */
PauliSum uniform_field(int spin_count, Pauli p);

struct CpmgOptions {
  /** Second pulse is R_y(-pi) instead of R_y(pi). */
  bool alternate_sign = false;
  /** Both pulses about -y. */
  bool negative_axis = false;
  /** Flip the x and z field signs in the second segment (required for decoupling). */
  bool flip_fields = true;
};

PulseSequence build_cpmg(const TargetParams& target, double t1, double t_pi,
                         const CpmgOptions& opts = {});
/** Four-pulse XY cycle with the field signs cycled alongside. */
PulseSequence build_xy(const TargetParams& target, double t1, double t_pi);
/** Two-pulse form: XX, R_x(pi), XX, R_-y(pi). Closes up to a z parity. */
PulseSequence build_xy2(const Eigen::MatrixXd& couplings, double t1, double t_pi);
PulseSequence build_heisenberg(const Eigen::MatrixXd& couplings, double t1, double t_pi);
/** Heisenberg cycle with its two quarter-turn pulses removed. */
PulseSequence build_hs_modified(const Eigen::MatrixXd& couplings, double t1, double t_pi);

struct MagnusTerms {
  PauliSum first_order;
  PauliSum second_order;
  double mean_a = 0.0;
  double mean_c = 0.0;
  double fluctuation_a = 0.0;
  double fluctuation_c = 0.0;
};

/**
 * First- and second-order Magnus terms of the noise for a two-segment CPMG
 * cycle starting at `start`. The noise operator is sum_j sigma^z_j with
 * strength epsilon(t). The terms are defined so that the cycle evolves as
 * exp(-i t1 (2 H_t + first_order + second_order)).
 */
MagnusTerms magnus_error(const PulseSequence& seq, const std::function<double(double)>& epsilon,
                         double start = 0.0);
MagnusTerms magnus_error(const PulseSequence& seq, const SampledTrace& epsilon, double start = 0.0);

/** phi(t) = slope * t + offset on [start, end). */
struct PhaseLaw {
  double start = 0.0;
  double end = 0.0;
  double slope = 0.0;
  double offset = 0.0;
  double operator()(double t) const { return slope * t + offset; }
};

/**
 * Drive-phase laws that emulate a z field `bz` in the rotating frame for
 * `cycles` CPMG periods starting at t0. Continuity is checked at every
 * boundary.
 */
std::vector<PhaseLaw> rotating_frame_phase_schedule(const PulseSequence& seq, double bz,
                                                    double t0, int cycles = 1);

/** Evaluates a piecewise schedule; 0 outside all laws. */
double phase_at(const std::vector<PhaseLaw>& laws, double t);

}  // namespace pulseforge
