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

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "pulseforge/pauli.hpp"
#include "pulseforge/sequence.hpp"

namespace pulseforge {

/** Parameters of a named sequence builder. Frequencies in Hz, times in seconds. */
struct BuilderSpec {
  std::string name = "cpmg";
  int spins = 2;
  double j0_hz = 1.0;
  double p = 1.0;
  /** Explicit couplings in rad/s; overrides j0_hz and p when set. */
  std::optional<Eigen::MatrixXd> couplings;
  double t1 = 120e-6;
  double t_pi = 0.0;
  double bx_hz = 0.0;
  double by_hz = 0.0;
  double bz_hz = 0.0;

  Eigen::MatrixXd coupling_matrix() const;
};

/** cpmg, xy, xy2, heisenberg, hs_modified. */
const std::vector<std::string>& builder_names();

PulseSequence build_named(const BuilderSpec& spec);

/** Hamiltonian the builder is designed to realise (rad/s). */
PauliSum builder_target(const BuilderSpec& spec);

struct SequenceFile {
  PulseSequence sequence;
  /** Declared target (rad/s); empty when the file does not name one. */
  std::optional<PauliSum> target;
  /** Set when the file delegates to a builder. */
  std::optional<BuilderSpec> builder;
};

/**
 * Parses the line-based sequence format:
 *
 *   name <label>
 *   builder <name> [n=..] [j0_hz=..] [p=..] [t1_us=..] [t_pi_us=..] [bx_hz=..] [by_hz=..] [bz_hz=..]
 *   segment t_us=<duration> [noise=on|off] : <Pauli sum in Hz>
 *   pulse phase_deg=<phase> angle_deg=<angle> [t_us=<duration>]
 *   pulse axis=z angle_deg=<angle> [t_us=<duration>]
 *   envelope ramp_us=<t_p> [exponent=<1|2>]
 *   symmetry axis=z angle_deg=<angle>   (or phase_deg=..)
 *   target : <Pauli sum in Hz>
 *
 * '#' starts a comment. Every segment must be followed by a pulse. Errors
 * carry the offending line number.
 */
SequenceFile parse_sequence(std::string_view text);
SequenceFile load_sequence(const std::string& path);

/** Writes a sequence in the format read by parse_sequence. */
std::string format_sequence(const PulseSequence& seq, const std::optional<PauliSum>& target = std::nullopt);

/** Copy of `seq` with pulse `index` replaced by the identity. */
PulseSequence drop_pulse(const PulseSequence& seq, std::size_t index);

}  // namespace pulseforge
