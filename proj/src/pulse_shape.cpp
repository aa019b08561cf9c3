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

#include "pulseforge/pulse_shape.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "pulseforge/error.hpp"

namespace pulseforge {

namespace {

double window(double t, const PulseShape& shape) {
  if (shape.kind == ShapeKind::Flat || shape.ramp_time <= 0.0) return 1.0;
  const double tp = shape.ramp_time;
  if (t <= 0.0 || t >= shape.duration) return 0.0;
  if (t < tp) return 0.5 * (1.0 - std::cos(std::numbers::pi * t / tp));
  if (t > shape.duration - tp)
    return 0.5 * (1.0 - std::cos(std::numbers::pi * (shape.duration - t) / tp));
  return 1.0;
}

}  // namespace

void PulseShape::validate() const {
  if (duration < 0.0 || ramp_time < 0.0) throw PreconditionError("pulse times must be >= 0");
  if (kind == ShapeKind::Tukey && duration > 0.0 && alpha() > 1.0 + 1e-12)
    throw PreconditionError("Tukey shaping parameter alpha=" + std::to_string(alpha()) +
                            " exceeds 1");
  if (intensity_exponent <= 0.0) throw PreconditionError("intensity exponent must be > 0");
}

double tukey_envelope(double t, const PulseShape& shape) {
  const double w = window(t, shape);
  if (shape.intensity_exponent == 1.0) return w;
  if (shape.intensity_exponent == 2.0) return w * w;
  return std::pow(w, shape.intensity_exponent);
}

double field_envelope(double t, const PulseShape& shape) {
  const double w = window(t, shape);
  if (shape.intensity_exponent == 2.0) return w;
  return std::pow(w, 0.5 * shape.intensity_exponent);
}

double empirical_beta(double ramp_time, double t1) { return 1.0 - 1.178 * ramp_time / t1; }

double effective_beta(const PulseShape& shape, double t1, BetaModel model) {
  const double tp = shape.kind == ShapeKind::Flat ? 0.0 : shape.ramp_time;
  if (tp == 0.0) return 1.0;
  if (t1 <= 2.0 * tp)
    throw PreconditionError("no plateau: t1 must exceed twice the ramp time");
  if (model == BetaModel::Empirical) return empirical_beta(tp, t1);
  PulseShape s = shape;
  s.duration = t1;
  // The plateau contributes exactly; only the two mirrored ramps need quadrature.
  const double ramp = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      [&](double t) { return tukey_envelope(t, s); }, 0.0, tp, 0, 1e-15);
  return (2.0 * ramp + (t1 - 2.0 * tp)) / t1;
}

}  // namespace pulseforge
