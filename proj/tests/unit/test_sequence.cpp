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

#include <cmath>
#include <numbers>

#include <gtest/gtest.h>
#include <unsupported/Eigen/MatrixFunctions>

#include "pulseforge/error.hpp"
#include "pulseforge/sequence.hpp"

namespace pf = pulseforge;
using pf::Complex;
using pf::PauliSum;

namespace {

constexpr double kPi = std::numbers::pi;

Eigen::MatrixXcd expm(const PauliSum& h, double t) {
  return (Complex(0, -t) * pf::to_dense_matrix(h)).exp();
}

// Dense one-cycle unitary: pulses as tensor powers, segments as exact exponentials.
Eigen::MatrixXcd cycle_unitary(const pf::PulseSequence& seq) {
  const int n = seq.spin_count();
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(1 << n, 1 << n);
  for (const auto& st : seq.steps()) {
    u = expm(st.segment.hamiltonian, st.segment.duration) * u;
    u = pf::global_rotation_matrix(st.pulse.rotation, n) * u;
  }
  return u;
}

double phase_free_distance(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  const Complex overlap = (b.adjoint() * a).trace();
  const Complex ph = std::abs(overlap) > 0 ? overlap / std::abs(overlap) : Complex(1.0);
  return (a - ph * b).norm();
}

pf::TargetParams params(int n, double j0, double bx = 0, double by = 0, double bz = 0) {
  pf::TargetParams p;
  p.couplings = pf::power_law_couplings(n, j0, 1.3);
  p.bx = bx;
  p.by = by;
  p.bz = bz;
  return p;
}

pf::PulseSequence rotate_start(const pf::PulseSequence& seq, std::size_t k) {
  std::vector<pf::SequenceStep> steps(seq.steps().begin() + static_cast<long>(k), seq.steps().end());
  steps.insert(steps.end(), seq.steps().begin(), seq.steps().begin() + static_cast<long>(k));
  return pf::PulseSequence(seq.name(), steps);
}

}  // namespace

TEST(Sequence, CycleTimeIsSumOfDurations) {
  auto seq = pf::build_heisenberg(pf::power_law_couplings(3, 1.0, 2.0), 120e-6, 5e-6);
  const double expected = 120e-6 + 120e-6 + 60e-6 + 60e-6 + 4 * 5e-6;
  EXPECT_NEAR(seq.cycle_time(), expected, 1e-15 * expected);
}

TEST(Sequence, RejectsBadSegments) {
  pf::Segment s;
  s.hamiltonian = PauliSum::parse("1*XX");
  s.duration = 0.0;
  EXPECT_THROW(pf::PulseSequence("bad", {{s, {}}}), pf::PreconditionError);
  EXPECT_THROW(pf::PulseSequence("empty", {}), pf::PreconditionError);
  s.duration = 1.0;
  s.hamiltonian = PauliSum::parse("(0,1)*XX");
  EXPECT_THROW(pf::PulseSequence("nonhermitian", {{s, {}}}), pf::PreconditionError);
}

TEST(TogglingFrame, SingleSegmentUnchanged) {
  pf::Segment s;
  s.hamiltonian = PauliSum::parse("1*XY + 0.5*ZI");
  s.duration = 1e-4;
  pf::PulseSequence seq("one", {{s, {pf::GlobalRotation::x(kPi / 3), 0.0}}});
  EXPECT_EQ(pf::toggling_frame(seq)[0], s.hamiltonian);
}

TEST(TogglingFrame, CpmgNoiseReversesSign) {
  auto p = params(3, 2.0, 0.0, 0.3, 0.0);
  auto seq = pf::build_cpmg(p, 1e-4, 0.0);
  const PauliSum noise = pf::uniform_field(3, pf::Pauli::Z) * Complex(0.7);
  auto h = pf::toggling_frame(seq, noise);
  const PauliSum ht = pf::ising_target(p);
  EXPECT_LT(pf::max_coefficient_distance(h[0], ht + noise), 1e-14);
  EXPECT_LT(pf::max_coefficient_distance(h[1], ht - noise), 1e-14);
}

TEST(TogglingFrame, HeisenbergMatchesDenseConjugation) {
  const auto j = pf::power_law_couplings(3, 1.0, 1.1);
  auto seq = pf::build_heisenberg(j, 1e-4, 0.0);
  auto toggled = pf::toggling_frame(seq);
  Eigen::MatrixXcd q = Eigen::MatrixXcd::Identity(8, 8);
  const pf::Pauli expected_axis[4] = {pf::Pauli::X, pf::Pauli::Y, pf::Pauli::Z, pf::Pauli::Z};
  for (std::size_t n = 0; n < seq.steps().size(); ++n) {
    Eigen::MatrixXcd oracle = q.adjoint() * pf::to_dense_matrix(seq.steps()[n].segment.hamiltonian) * q;
    EXPECT_LT((pf::to_dense_matrix(toggled[n]) - oracle).norm(), 1e-12);
    EXPECT_LT(pf::max_coefficient_distance(toggled[n], pf::pair_hamiltonian(j, expected_axis[n])), 1e-14);
    q = pf::global_rotation_matrix(seq.steps()[n].pulse.rotation, 3) * q;
  }
}

TEST(AverageHamiltonian, CpmgNoiseFreeIsTarget) {
  auto p = params(3, 1.5, 0.2, 0.1, -0.4);
  auto seq = pf::build_cpmg(p, 1e-4, 0.0);
  EXPECT_LT(pf::max_coefficient_distance(pf::average_hamiltonian(seq), pf::ising_target(p)), 1e-14);
}

TEST(AverageHamiltonian, TwoPulseXyDilution) {
  Eigen::MatrixXd j = pf::power_law_couplings(2, 1.0, 1.0);
  const double t1 = 120e-6, tpi = 5e-6;
  auto avg = pf::average_hamiltonian(pf::build_xy2(j, t1, tpi));
  EXPECT_NEAR(avg.coefficient("XX").real(), t1 / (t1 + tpi), 1e-15);
  EXPECT_EQ(avg.size(), 1u);
}

TEST(AverageHamiltonian, HeisenbergScaling) {
  const auto j = pf::power_law_couplings(2, 1.0, 2.0);
  const double t1 = 100e-6, tpi = 4e-6;
  auto seq = pf::build_heisenberg(j, t1, tpi);
  const double scale = 3 * t1 / seq.cycle_time();
  EXPECT_NEAR(pf::time_dilution_factor(seq), scale, 1e-15);
  EXPECT_LT(pf::max_coefficient_distance(pf::average_hamiltonian(seq),
                                         pf::heisenberg_target(j) * Complex(scale)),
            1e-15);
  auto ideal = pf::build_heisenberg(j, t1, 0.0);
  EXPECT_DOUBLE_EQ(pf::time_dilution_factor(ideal), 1.0);
}

TEST(AverageHamiltonian, FourSiteHaldaneShastry) {
  const auto j = pf::power_law_couplings(4, 2 * kPi * 84.0, 2.05);
  const double t1 = 0.05 / (2 * kPi * 84.0);
  auto seq = pf::build_heisenberg(j, t1, 5e-6);
  const double scale = 3 * t1 / seq.cycle_time();
  auto expected = pf::heisenberg_target(j) * Complex(scale);
  EXPECT_LT(pf::max_coefficient_distance(pf::average_hamiltonian(seq), expected),
            1e-12 * expected.max_abs_coefficient());
}

TEST(AverageHamiltonian, EnvelopeWeightsByBeta) {
  Eigen::MatrixXd j = pf::power_law_couplings(2, 1.0, 1.0);
  const double t1 = 120e-6, tpi = 5e-6, tp = 20e-6;
  auto seq = pf::build_xy2(j, t1, tpi).with_envelope(pf::PulseShape::tukey(tp, t1, 2.0));
  const double beta = pf::effective_beta(pf::PulseShape::tukey(tp, t1, 2.0), t1);
  EXPECT_NEAR(pf::average_hamiltonian(seq).coefficient("XX").real(), beta * t1 / (t1 + tpi), 1e-14);
}

TEST(HsModified, AnisotropicAverage) {
  const auto j = pf::power_law_couplings(2, 1.0, 2.0);
  auto seq = pf::build_hs_modified(j, 1e-4, 5e-6);
  const double scale = 3e-4 / seq.cycle_time();
  auto avg = pf::average_hamiltonian(seq);
  EXPECT_LT(pf::max_coefficient_distance(avg, pf::hs_modified_target(j) * Complex(scale)), 1e-15);
  EXPECT_EQ(avg.coefficient("ZZ"), Complex(0.0));
  EXPECT_FALSE(pf::commutator(avg, pf::uniform_field(2, pf::Pauli::Z)).empty());
  EXPECT_TRUE(pf::commutator(pf::average_hamiltonian(pf::build_heisenberg(j, 1e-4, 5e-6)),
                             pf::uniform_field(2, pf::Pauli::Z)).empty());
}

TEST(HsModified, DiffersByTwoPulses) {
  const auto j = pf::power_law_couplings(3, 1.0, 2.0);
  auto a = pf::build_heisenberg(j, 1e-4, 5e-6);
  auto b = pf::build_hs_modified(j, 1e-4, 5e-6);
  ASSERT_EQ(a.steps().size(), b.steps().size());
  int diff = 0;
  for (std::size_t k = 0; k < a.steps().size(); ++k) {
    EXPECT_EQ(a.steps()[k].segment.hamiltonian, b.steps()[k].segment.hamiltonian);
    const auto& ra = a.steps()[k].pulse.rotation;
    const auto& rb = b.steps()[k].pulse.rotation;
    if (ra.angle != rb.angle || ra.axis_phase != rb.axis_phase) ++diff;
  }
  EXPECT_EQ(diff, 2);
  auto rep = pf::validate_decoupling(b, pf::hs_modified_target(j), pf::uniform_field(3, pf::Pauli::Z),
                                     {1e-10, false});
  EXPECT_TRUE(rep.pass()) << rep.to_string();
}

TEST(Validate, CpmgPasses) {
  auto p = params(3, 1.0, 0.4, 0.2, 0.3);
  const PauliSum noise = pf::uniform_field(3, pf::Pauli::Z);
  for (bool alt : {false, true}) {
    pf::CpmgOptions o;
    o.alternate_sign = alt;
    auto rep = pf::validate_decoupling(pf::build_cpmg(p, 1e-4, 5e-6, o), pf::ising_target(p), noise);
    EXPECT_TRUE(rep.pass()) << rep.to_string();
    EXPECT_LT(rep.frame_closure_residual, 1e-12);
    EXPECT_LT(rep.noise_residual, 1e-12);
    for (double r : rep.segment_target_residuals) EXPECT_LT(r, 1e-12);
  }
}

TEST(Validate, CpmgWithoutFieldFlipFailsTarget) {
  auto p = params(2, 1.0, 0.5, 0.0, 0.0);
  pf::CpmgOptions o;
  o.flip_fields = false;
  auto rep = pf::validate_decoupling(pf::build_cpmg(p, 1e-4, 0.0, o), pf::ising_target(p),
                                     pf::uniform_field(2, pf::Pauli::Z));
  EXPECT_FALSE(rep.target_pass);
  EXPECT_TRUE(rep.frame_closure_pass);
  EXPECT_TRUE(rep.noise_pass);
}

TEST(Validate, ZeroNoiseTriviallyCancels) {
  auto p = params(2, 1.0);
  pf::Segment s;
  s.hamiltonian = pf::ising_target(p);
  s.duration = 1e-4;
  pf::PulseSequence seq("free", {{s, {}}});
  auto rep = pf::validate_decoupling(seq, pf::ising_target(p), PauliSum(2));
  EXPECT_TRUE(rep.noise_pass);
  EXPECT_TRUE(rep.pass());
}

TEST(Validate, XyDecouplesAllAxes) {
  auto p = params(3, 1.0, 0.3, -0.2, 0.1);
  auto seq = pf::build_xy(p, 1e-4, 2e-6);
  for (pf::Pauli axis : {pf::Pauli::X, pf::Pauli::Y, pf::Pauli::Z}) {
    auto rep = pf::validate_decoupling(seq, pf::ising_target(p), pf::uniform_field(3, axis));
    EXPECT_TRUE(rep.pass()) << rep.to_string();
    EXPECT_LT(rep.noise_residual, 1e-12);
  }
}

TEST(Validate, TwoPulseXyClosesUpToZParity) {
  Eigen::MatrixXd j = pf::power_law_couplings(2, 1.0, 1.0);
  auto seq = pf::build_xy2(j, 1e-4, 5e-6);
  const PauliSum target = pf::pair_hamiltonian(j, pf::Pauli::X);
  auto rep = pf::validate_decoupling(seq, target, pf::uniform_field(2, pf::Pauli::Z));
  EXPECT_TRUE(rep.pass()) << rep.to_string();
  ASSERT_TRUE(rep.closure_symmetry.has_value());
  EXPECT_TRUE(rep.closure_symmetry->polar);
  // Without the parity allowance the bare product is not the identity.
  EXPECT_GT(pf::frame_closure_residual(pf::pulse_product(seq, 2), 2), 1.0);
  // A target that breaks the parity cannot use the allowance.
  auto broken = pf::validate_decoupling(seq, target + pf::uniform_field(2, pf::Pauli::X),
                                        PauliSum(2));
  EXPECT_FALSE(broken.frame_closure_pass);
}

TEST(Validate, HeisenbergCancelsNoiseAndCloses) {
  const auto j = pf::power_law_couplings(4, 1.0, 2.05);
  auto seq = pf::build_heisenberg(j, 1e-4, 3e-6);
  auto rep = pf::validate_decoupling(seq, pf::heisenberg_target(j), pf::uniform_field(4, pf::Pauli::Z),
                                     {1e-10, false});
  EXPECT_TRUE(rep.pass()) << rep.to_string();
  EXPECT_LT(rep.frame_closure_residual, 1e-12);
  auto strict = pf::validate_decoupling(seq, pf::heisenberg_target(j), PauliSum(4));
  EXPECT_FALSE(strict.target_pass);
}

TEST(Validate, DroppedPulseBreaksClosure) {
  auto p = params(2, 1.0);
  auto good = pf::build_cpmg(p, 1e-4, 0.0);
  auto steps = good.steps();
  steps[1].pulse.rotation = pf::GlobalRotation::identity();
  pf::PulseSequence bad("bad", steps);
  auto rep = pf::validate_decoupling(bad, pf::ising_target(p), PauliSum(2));
  EXPECT_FALSE(rep.frame_closure_pass);
  EXPECT_NEAR(rep.frame_closure_residual, 2.0, 1e-12);
}

TEST(Properties, AverageHamiltonianExactWhenConditionsHold) {
  for (int n = 2; n <= 4; ++n) {
    const double j0 = 2 * kPi * 300.0;
    auto p = params(n, j0, 0.3 * j0, 0.1 * j0, -0.2 * j0);
    pf::TargetParams no_field = params(n, j0);
    std::vector<pf::PulseSequence> seqs = {pf::build_cpmg(p, 150e-6, 0.0), pf::build_xy(p, 150e-6, 0.0),
                                           pf::build_xy2(no_field.couplings, 150e-6, 0.0)};
    for (const auto& seq : seqs) {
      Eigen::MatrixXcd pulses = Eigen::MatrixXcd::Identity(1 << n, 1 << n);
      for (const auto& st : seq.steps())
        pulses = pf::global_rotation_matrix(st.pulse.rotation, n) * pulses;
      Eigen::MatrixXcd predicted = pulses * expm(pf::average_hamiltonian(seq), seq.cycle_time());
      EXPECT_LT(phase_free_distance(cycle_unitary(seq), predicted), 1e-10) << seq.name() << " N=" << n;
    }
  }
}

TEST(Properties, HeisenbergTrotterScaling) {
  const auto j = pf::power_law_couplings(3, 1.0, 1.5);
  auto deviation = [&](double t1, int cycles) {
    auto seq = pf::build_heisenberg(j, t1, 0.0);
    Eigen::MatrixXcd u = cycle_unitary(seq);
    Eigen::MatrixXcd total = Eigen::MatrixXcd::Identity(8, 8);
    for (int k = 0; k < cycles; ++k) total = u * total;
    Eigen::MatrixXcd ideal = expm(pf::average_hamiltonian(seq), seq.cycle_time() * cycles);
    return phase_free_distance(total, ideal);
  };
  for (double jt : {0.1, 0.05}) {
    const double coarse = deviation(jt, 8);
    const double fine = deviation(jt / 2, 16);
    EXPECT_GE(coarse / fine, 1.8) << "J0 t1 = " << jt;
  }
}

TEST(Properties, CyclicRelabelingInvariance) {
  const auto j = pf::power_law_couplings(3, 1.0, 1.5);
  pf::TargetParams p;
  p.couplings = j;
  std::vector<pf::PulseSequence> seqs = {pf::build_cpmg(p, 1e-4, 2e-6), pf::build_xy(p, 1e-4, 2e-6),
                                         pf::build_heisenberg(j, 1e-4, 2e-6),
                                         pf::build_hs_modified(j, 1e-4, 2e-6)};
  for (const auto& seq : seqs) {
    const PauliSum ref = pf::average_hamiltonian(seq);
    for (std::size_t k = 1; k < seq.steps().size(); ++k)
      EXPECT_LT(pf::max_coefficient_distance(pf::average_hamiltonian(rotate_start(seq, k)), ref), 1e-14)
          << seq.name() << " shift " << k;
  }
}

TEST(Magnus, ConstantNoiseHasNoFirstOrder) {
  auto seq = pf::build_cpmg(params(2, 100.0), 1e-4, 5e-6);
  auto m = pf::magnus_error(seq, [](double) { return 37.0; });
  EXPECT_LT(m.first_order.max_abs_coefficient(), 1e-12);
  EXPECT_NEAR(m.mean_a, 37.0, 1e-12);
  EXPECT_NEAR(m.fluctuation_a, 0.0, 1e-12);
}

TEST(Magnus, FieldOnlyTargetHasNoSecondOrder) {
  pf::TargetParams p;
  p.couplings = Eigen::MatrixXd::Zero(2, 2);
  p.bz = 10.0;
  pf::CpmgOptions o;
  o.flip_fields = false;
  auto seq = pf::build_cpmg(p, 1e-4, 5e-6, o);
  auto m = pf::magnus_error(seq, [](double t) { return 1e5 * t; });
  EXPECT_TRUE(m.second_order.empty());
}

TEST(Magnus, RejectsNonCpmgShape) {
  auto seq = pf::build_xy(params(2, 1.0), 1e-4, 0.0);
  EXPECT_THROW(pf::magnus_error(seq, [](double) { return 0.0; }), pf::UnsupportedShapeError);
}

namespace {

// Time-ordered product over the CPMG cycle with noise eps(t) sum_j Z_j, midpoint rule.
Eigen::MatrixXcd time_ordered_cpmg(const pf::PulseSequence& seq, const std::function<double(double)>& eps,
                                   int steps_per_segment) {
  const int n = seq.spin_count();
  const Eigen::MatrixXcd s = pf::to_dense_matrix(pf::uniform_field(n, pf::Pauli::Z));
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(1 << n, 1 << n);
  double t = 0.0;
  for (const auto& st : seq.steps()) {
    const Eigen::MatrixXcd h = pf::to_dense_matrix(st.segment.hamiltonian);
    const double dt = st.segment.duration / steps_per_segment;
    for (int k = 0; k < steps_per_segment; ++k) {
      const double tm = t + (k + 0.5) * dt;
      u = (Complex(0, -dt) * (h + eps(tm) * s)).exp() * u;
    }
    t += st.segment.duration;
    u = pf::global_rotation_matrix(st.pulse.rotation, n) * u;
    t += st.pulse.duration;
  }
  return u;
}

// Cycle operator in the toggling frame: the lab propagator with the pulse product removed.
Eigen::MatrixXcd toggled_cycle(const pf::PulseSequence& seq, const std::function<double(double)>& eps) {
  const int n = seq.spin_count();
  Eigen::MatrixXcd pulses = Eigen::MatrixXcd::Identity(1 << n, 1 << n);
  for (const auto& st : seq.steps()) pulses = pf::global_rotation_matrix(st.pulse.rotation, n) * pulses;
  return pulses.adjoint() * time_ordered_cpmg(seq, eps, 2000);
}

}  // namespace

TEST(Magnus, LinearDriftFirstOrderMatchesPropagation) {
  const double t1 = 10e-6, tpi = 3e-6;
  pf::TargetParams p;
  p.couplings = pf::power_law_couplings(2, 2 * kPi * 10.0, 1.0);
  auto seq = pf::build_cpmg(p, t1, tpi);
  const double k = 2 * kPi * 200.0 / 1e-4;
  auto eps = [&](double t) { return k * t; };
  auto m = pf::magnus_error(seq, eps);
  EXPECT_NEAR(m.first_order.coefficient("ZI").real(), -k * (t1 + tpi), 1e-9 * k * t1);

  Eigen::MatrixXcd u = toggled_cycle(seq, eps);
  Eigen::MatrixXcd generator = Complex(0, 1) * u.log() / t1;
  PauliSum numeric = pf::from_dense_matrix(generator);
  const double expected = m.first_order.coefficient("ZI").real();
  EXPECT_NEAR(numeric.coefficient("ZI").real(), expected, 1e-6 * std::abs(expected));
}

TEST(Magnus, SecondOrderMatchesPropagation) {
  const double t1 = 100e-6, tpi = 5e-6;
  pf::TargetParams p;
  p.couplings = pf::power_law_couplings(2, 2 * kPi * 200.0, 1.0);
  auto seq = pf::build_cpmg(p, t1, tpi);
  auto eps = [](double t) { return 2 * kPi * 150.0 * (1.0 + 0.5 * std::sin(2 * kPi * 3e3 * t)); };
  auto m = pf::magnus_error(seq, eps);
  Eigen::MatrixXcd u = toggled_cycle(seq, eps);
  PauliSum numeric = pf::from_dense_matrix(Complex(0, 1) * u.log() / t1);
  const PauliSum predicted = pf::ising_target(p) * Complex(2.0) + m.first_order + m.second_order;
  for (const char* key : {"XY", "YX"}) {
    const double want = predicted.coefficient(key).real();
    EXPECT_NEAR(numeric.coefficient(key).real(), want, 0.05 * std::abs(want)) << key;
  }
  EXPECT_NEAR(numeric.coefficient("ZI").real(), predicted.coefficient("ZI").real(),
              0.05 * std::abs(predicted.coefficient("ZI").real()));
}

TEST(PhaseSchedule, ZeroFieldIsZero) {
  auto seq = pf::build_cpmg(params(2, 1.0), 1e-4, 5e-6);
  auto laws = pf::rotating_frame_phase_schedule(seq, 0.0, 0.0, 3);
  for (const auto& l : laws) {
    EXPECT_EQ(l(l.start), 0.0);
    EXPECT_EQ(l(l.end), 0.0);
  }
}

TEST(PhaseSchedule, FirstLawAndContinuity) {
  auto seq = pf::build_cpmg(params(2, 1.0), 120e-6, 5e-6);
  const double bz = 2 * kPi * 250.0;
  auto laws = pf::rotating_frame_phase_schedule(seq, bz, 0.0, 4);
  ASSERT_EQ(laws.size(), 8u);
  EXPECT_DOUBLE_EQ(laws[0].slope, -2 * bz);
  EXPECT_DOUBLE_EQ(laws[0].offset, 0.0);
  const double tol = 1e-12 * std::abs(2 * bz * seq.cycle_time());
  for (std::size_t k = 0; k + 1 < laws.size(); ++k)
    EXPECT_NEAR(laws[k](laws[k].end), laws[k + 1](laws[k + 1].start), tol);
  EXPECT_NEAR(pf::phase_at(laws, 60e-6), -2 * bz * 60e-6, 1e-12);
  EXPECT_NEAR(pf::phase_at(laws, 2 * 125e-6), 0.0, tol);
}

TEST(PhaseSchedule, RequiresCpmgShape) {
  auto seq = pf::build_xy(params(2, 1.0), 1e-4, 0.0);
  EXPECT_THROW(pf::rotating_frame_phase_schedule(seq, 1.0, 0.0), pf::UnsupportedShapeError);
}
