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

#include "pulseforge/trace.hpp"

#include <algorithm>
#include <cmath>

namespace pulseforge {

double SampledTrace::at(double t) const {
  if (values.empty()) return 0.0;
  const double x = (t - t0) / dt;
  if (x <= 0.0) return values.front();
  const auto last = values.size() - 1;
  if (x >= static_cast<double>(last)) return values.back();
  const auto i = static_cast<std::size_t>(x);
  const double f = x - static_cast<double>(i);
  return values[i] + f * (values[i + 1] - values[i]);
}

double SampledTrace::mean(double a, double b) const {
  if (values.empty()) return 0.0;
  if (b <= a) return at(a);
  // Exact integral of the piecewise-linear interpolant.
  auto node = [&](std::size_t i) { return t0 + dt * static_cast<double>(i); };
  double acc = 0.0;
  double lo = a;
  const double x = std::floor((a - t0) / dt);
  std::size_t i = x <= 0.0 ? 0 : static_cast<std::size_t>(x) + 1;
  while (lo < b) {
    double hi = b;
    if (i < values.size() && node(i) > lo) hi = std::min(b, node(i));
    acc += 0.5 * (at(lo) + at(hi)) * (hi - lo);
    lo = hi;
    ++i;
  }
  return acc / (b - a);
}

}  // namespace pulseforge
