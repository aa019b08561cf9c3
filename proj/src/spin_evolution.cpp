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

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "pulseforge/error.hpp"
#include "pulseforge/propagator.hpp"

namespace pulseforge {

namespace {

// Samples this close to a segment end are taken after its pulse.
double boundary_tol(double t) { return 1e-12 * std::max(1.0, std::abs(t)) + 1e-13; }

std::vector<double> sorted(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  for (double t : v)
    if (t < 0.0) throw PreconditionError("sample times must be >= 0");
  return v;
}

void check_initial(const Eigen::VectorXcd& psi, int spins) {
  if (psi.size() != (Eigen::Index{1} << spins)) throw DimensionError("initial state does not match the spin count");
}

}  // namespace

SpinEvolutionResult evolve_spin_only(const Eigen::VectorXcd& initial, const PauliSum& hamiltonian,
                                     const std::vector<double>& sample_times,
                                     const SpinEvolutionOptions& options) {
  const int n = hamiltonian.spin_count();
  if (n > options.dense_cap) throw DimensionError("spin count exceeds the dense cap");
  check_initial(initial, n);
  const auto times = sorted(sample_times);
  SpinEvolutionResult res;
  if (n <= 10) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(to_dense_matrix(hamiltonian, options.dense_cap));
    const Eigen::VectorXcd c0 = es.eigenvectors().adjoint() * initial;
    for (double t : times) {
      Eigen::VectorXcd ct = c0;
      for (Eigen::Index k = 0; k < ct.size(); ++k) ct(k) *= std::exp(Complex(0.0, -t * es.eigenvalues()(k)));
      const Eigen::VectorXcd psi = es.eigenvectors() * ct;
      res.times.push_back(t);
      res.spins.push_back(measure_spins(psi.data(), n));
    }
    return res;
  }
  const CompiledPauliSum h(hamiltonian);
  KrylovPropagator krylov(h.dimension(), options.krylov);
  const Matvec mv = [&](const Complex* in, Complex* out) {
    h.apply(std::span<const Complex>(in, h.dimension()), std::span<Complex>(out, h.dimension()));
  };
  Eigen::VectorXcd psi = initial;
  double now = 0.0;
  const double chunk = 1.0 / std::max(hamiltonian.max_abs_coefficient() * static_cast<double>(hamiltonian.size()), 1e-300);
  for (double t : times) {
    while (now < t) {
      const double step = std::min(chunk, t - now);
      krylov.step(mv, step, psi.data());
      now += step;
    }
    res.times.push_back(t);
    res.spins.push_back(measure_spins(psi.data(), n));
  }
  return res;
}

SpinEvolutionResult evolve_spin_only(const Eigen::VectorXcd& initial, const PulseSequence& seq,
                                     const SpinNoise* noise, const std::vector<double>& sample_times,
                                     const SpinEvolutionOptions& options) {
  const int n = seq.spin_count();
  if (n > options.dense_cap) throw DimensionError("spin count exceeds the dense cap");
  check_initial(initial, n);
  if (noise && noise->op.spin_count() != n) throw DimensionError("noise operator spin count mismatch");
  const auto times = sorted(sample_times);
  SpinEvolutionResult res;
  if (times.empty()) return res;

  std::vector<CompiledPauliSum> compiled;
  for (const auto& st : seq.steps()) compiled.emplace_back(st.segment.hamiltonian);
  const CompiledPauliSum noise_op = noise ? CompiledPauliSum(noise->op) : CompiledPauliSum();
  const std::size_t dim = std::size_t{1} << n;
  KrylovPropagator krylov(dim, options.krylov);
  Eigen::VectorXcd psi = initial;

  std::size_t next = 0;
  auto record_until = [&](double t) {
    while (next < times.size() && times[next] <= t + boundary_tol(t)) {
      res.times.push_back(times[next]);
      res.spins.push_back(measure_spins(psi.data(), n));
      ++next;
    }
  };

  double scale_h = 0.0, scale_e = 0.0;
  const CompiledPauliSum* current = nullptr;
  const Matvec mv = [&](const Complex* in, Complex* out) {
    std::span<const Complex> vin(in, dim);
    std::span<Complex> vout(out, dim);
    current->apply(vin, vout, scale_h);
    if (scale_e != 0.0) noise_op.apply_add(vin, vout, scale_e);
  };

  const double last = times.back();
  double t = 0.0;
  record_until(t);
  const double norm_scale = [&] {
    double m = 0.0;
    for (const auto& st : seq.steps())
      m = std::max(m, st.segment.hamiltonian.max_abs_coefficient() * static_cast<double>(st.segment.hamiltonian.size()));
    return m;
  }();
  while (next < times.size()) {
    for (std::size_t k = 0; k < seq.steps().size() && next < times.size(); ++k) {
      const auto& st = seq.steps()[k];
      const Segment& seg = st.segment;
      const double start = t, stop = t + seg.duration;
      const bool noisy = noise && seg.noise_bound && noise->epsilon;
      const bool varying = noisy || seg.envelope.has_value();
      // Interior breakpoints: substep grid and any sample times inside the segment.
      std::vector<double> cuts;
      const double sub = varying ? options.substep : std::max(seg.duration, 1e-300);
      const auto nsub = std::max<long>(1, static_cast<long>(std::ceil(seg.duration / sub - 1e-9)));
      for (long s = 1; s < nsub; ++s) cuts.push_back(start + seg.duration * static_cast<double>(s) / static_cast<double>(nsub));
      for (std::size_t q = next; q < times.size() && times[q] < stop - boundary_tol(stop); ++q)
        if (times[q] > start) cuts.push_back(times[q]);
      cuts.push_back(stop);
      std::sort(cuts.begin(), cuts.end());
      double a = start;
      current = &compiled[k];
      for (double b : cuts) {
        if (b - a <= 1e-15) continue;
        auto profile = [&](double tt) { return seg.envelope ? tukey_envelope(tt - start, *seg.envelope) : 1.0; };
        auto eps = [&](double tt) { return noisy ? noise->epsilon(tt) * profile(tt) : 0.0; };
        const double m = 0.5 * (a + b);
        // Simpson averages over the substep.
        scale_h = (profile(a) + 4.0 * profile(m) + profile(b)) / 6.0;
        scale_e = noisy ? (eps(a) + 4.0 * eps(m) + eps(b)) / 6.0 : 0.0;
        double remaining = b - a;
        // Keep individual Krylov steps moderate for large-norm segments.
        const double cap = norm_scale > 0.0 ? 2.0 / norm_scale : remaining;
        while (remaining > 1e-15) {
          const double h = std::min(remaining, std::max(cap, 1e-12));
          krylov.step(mv, h, psi.data());
          remaining -= h;
        }
        a = b;
        if (b < stop) record_until(b);
      }
      t = stop;
      if (!st.pulse.rotation.is_identity())
        apply_global_unitary(psi.data(), n, 1, st.pulse.rotation.matrix());
      record_until(t);
      t += st.pulse.duration;
      record_until(t);
      if (t > last + 1e-12 && next >= times.size()) break;
    }
  }
  return res;
}

}  // namespace pulseforge
