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
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace pulseforge {

/** Per-site expectation values of sigma^x, sigma^y, sigma^z. */
struct SpinObservables {
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> z;
};

/**
 * Product state from a pattern with one character per site:
 * 'u'/'d' for +z/-z, '+'/'-' for +x/-x, 'r'/'l' for +y/-y.
 */
Eigen::VectorXcd spin_pattern_state(std::string_view pattern);

/** Single-site spinor for a pattern character. */
Eigen::Vector2cd site_spinor(char c);

/**
 * Spin expectations of a state laid out spin-major with `inner` consecutive
 * amplitudes per spin configuration (1 for a bare spin register).
 */
SpinObservables measure_spins(const std::complex<double>* state, int spin_count,
                              std::size_t inner = 1);

/** Applies the same 2x2 unitary to every spin. */
void apply_global_unitary(std::complex<double>* state, int spin_count, std::size_t inner,
                          const Eigen::Matrix2cd& u);

}  // namespace pulseforge
