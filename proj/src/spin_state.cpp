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

#include "pulseforge/spin_state.hpp"

#include <cmath>
#include <string>

#include "pulseforge/error.hpp"

namespace pulseforge {

using Complex = std::complex<double>;

Eigen::Vector2cd site_spinor(char c) {
  const double r = 1.0 / std::sqrt(2.0);
  switch (c) {
    case 'u': return {1.0, 0.0};
    case 'd': return {0.0, 1.0};
    case '+': return {r, r};
    case '-': return {r, -r};
    case 'r': return {Complex(r), Complex(0.0, r)};
    case 'l': return {Complex(r), Complex(0.0, -r)};
    default: throw ParseError(std::string("unknown spin pattern character '") + c + "'");
  }
}

Eigen::VectorXcd spin_pattern_state(std::string_view pattern) {
  if (pattern.empty()) throw ParseError("empty spin pattern");
  Eigen::VectorXcd psi = Eigen::VectorXcd::Ones(1);
  for (char c : pattern) {
    const Eigen::Vector2cd s = site_spinor(c);
    Eigen::VectorXcd next(psi.size() * 2);
    for (Eigen::Index i = 0; i < psi.size(); ++i) {
      next(2 * i) = psi(i) * s(0);
      next(2 * i + 1) = psi(i) * s(1);
    }
    psi = std::move(next);
  }
  return psi;
}

SpinObservables measure_spins(const Complex* state, int spin_count, std::size_t inner) {
  SpinObservables o;
  o.x.assign(spin_count, 0.0);
  o.y.assign(spin_count, 0.0);
  o.z.assign(spin_count, 0.0);
  const std::size_t dim = std::size_t{1} << spin_count;
  for (int j = 0; j < spin_count; ++j) {
    const std::size_t bit = std::size_t{1} << (spin_count - 1 - j);
    double z = 0.0;
    Complex off{};
    for (std::size_t s = 0; s < dim; ++s) {
      const Complex* a = state + s * inner;
      double pop = 0.0;
      for (std::size_t m = 0; m < inner; ++m) pop += std::norm(a[m]);
      z += (s & bit) ? -pop : pop;
      if (!(s & bit)) {
        const Complex* b = state + (s | bit) * inner;
        for (std::size_t m = 0; m < inner; ++m) off += std::conj(a[m]) * b[m];
      }
    }
    o.z[j] = z;
    o.x[j] = 2.0 * off.real();
    o.y[j] = 2.0 * off.imag();
  }
  return o;
}

void apply_global_unitary(Complex* state, int spin_count, std::size_t inner, const Eigen::Matrix2cd& u) {
  const std::size_t dim = std::size_t{1} << spin_count;
  for (int j = 0; j < spin_count; ++j) {
    const std::size_t bit = std::size_t{1} << (spin_count - 1 - j);
    for (std::size_t s = 0; s < dim; ++s) {
      if (s & bit) continue;
      Complex* a = state + s * inner;
      Complex* b = state + (s | bit) * inner;
      for (std::size_t m = 0; m < inner; ++m) {
        const Complex up = a[m], down = b[m];
        a[m] = u(0, 0) * up + u(0, 1) * down;
        b[m] = u(1, 0) * up + u(1, 1) * down;
      }
    }
  }
}

}  // namespace pulseforge
