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

#include <vector>

namespace pulseforge {

/** Uniformly sampled real signal, linearly interpolated between samples. */
struct SampledTrace {
  double t0 = 0.0;
  double dt = 1.0;
  std::vector<double> values;

  bool empty() const { return values.empty(); }
  double end_time() const { return t0 + dt * static_cast<double>(values.size() - 1); }
  /** Value at t; clamps to the end samples outside the covered range. */
  double at(double t) const;
  /** Mean over [a, b] of the interpolated signal. */
  double mean(double a, double b) const;
};

}  // namespace pulseforge
