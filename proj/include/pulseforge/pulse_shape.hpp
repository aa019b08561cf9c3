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

namespace pulseforge {

enum class ShapeKind { Flat, Tukey };

/**
 * Envelope of one interaction or rotation pulse.
 *
 * `ramp_time` is the cosine ramp length t_p at each end; the Tukey shaping
 * parameter is alpha = 2 t_p / duration. `intensity_exponent` maps the window
 * w(t) onto the coupling profile J(t)/J0 = w(t)^exponent: 1 when the window is
 * imprinted on intensity, 2 when it is imprinted on field amplitude.
 */
struct PulseShape {
  ShapeKind kind = ShapeKind::Flat;
  double ramp_time = 0.0;
  double duration = 0.0;
  double intensity_exponent = 2.0;

  static PulseShape flat(double duration) { return {ShapeKind::Flat, 0.0, duration, 2.0}; }
  static PulseShape tukey(double ramp_time, double duration, double exponent = 2.0) {
    return {ShapeKind::Tukey, ramp_time, duration, exponent};
  }

  double alpha() const { return duration > 0.0 ? 2.0 * ramp_time / duration : 0.0; }
  /** Throws PreconditionError when alpha is outside [0, 1] or times are negative. */
  void validate() const;
};

/** Coupling profile J(t)/J0 in [0, 1] for 0 <= t <= duration (window raised to the exponent). */
double tukey_envelope(double t, const PulseShape& shape);

/** Rabi-rate profile Omega(t)/Omega0; its square is tukey_envelope(). */
double field_envelope(double t, const PulseShape& shape);

enum class BetaModel {
  Quadrature,  ///< integral of the configured envelope
  Empirical,   ///< 1 - 1.178 t_p / t1, the in-situ calibration
};

/** Reference value 1 - 1.178 t_p / t1. */
double empirical_beta(double ramp_time, double t1);

/**
 * Fraction of the flat-top coupling area kept by a shaped interaction pulse of
 * length t1: integral of J(t) dt / (J0 t1). Requires t1 > 2 t_p.
 */
double effective_beta(const PulseShape& shape, double t1, BetaModel model = BetaModel::Quadrature);

}  // namespace pulseforge
