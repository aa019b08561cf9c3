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
#include <functional>
#include <vector>

namespace pulseforge {

/** out = H * in for a Hermitian H of the propagator's dimension. */
using Matvec = std::function<void(const std::complex<double>* in, std::complex<double>* out)>;

struct KrylovOptions {
  int initial_dimension = 8;
  int max_dimension = 40;
  double tolerance = 1e-10;
};

struct KrylovStats {
  int dimension = 0;
  double error_estimate = 0.0;
  int substeps = 1;
};

/**
 * Lanczos approximation of exp(-i H dt) applied to a vector. The subspace
 * stops growing once the error estimate drops below the tolerance; it starts
 * with a budget of `initial_dimension` and grows towards `max_dimension`
 * before the step is split.
 */
class KrylovPropagator {
 public:
  KrylovPropagator(std::size_t dimension, KrylovOptions options = {});

  /** state <- exp(-i H dt) state. Throws ConvergenceError when the step cannot be resolved. */
  KrylovStats step(const Matvec& h, double dt, std::complex<double>* state);

  std::size_t dimension() const { return dim_; }

 private:
  bool try_step(const Matvec& h, double dt, std::complex<double>* state, int budget,
                KrylovStats& stats);

  std::size_t dim_;
  KrylovOptions opts_;
  std::vector<std::vector<std::complex<double>>> basis_;
  std::vector<double> alpha_;
  std::vector<double> beta_;
};

}  // namespace pulseforge
