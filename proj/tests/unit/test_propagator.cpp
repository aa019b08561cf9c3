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
#include <vector>

#include <gtest/gtest.h>

#include "pulseforge/error.hpp"
#include "pulseforge/propagator.hpp"

namespace pf = pulseforge;

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;

struct TwoIon {
  pf::ModeStructure modes;
  pf::ToneConfig tones;
  double j0 = 0.0;
  double delta = 0.0;
};

TwoIon two_ion(double ratio, double delta_hz = pf::constants::kTwoIonDetuningHz) {
  TwoIon s;
  s.modes = pf::transverse_modes({2, kTwoPi * 4.8e6, kTwoPi * 0.5e6});
  s.delta = kTwoPi * delta_hz;
  s.tones.eta = 0.08;
  s.tones.mu = s.modes.frequencies(0) + s.delta;
  s.tones.rabi_1 = s.tones.rabi_2 = s.delta / (ratio * s.tones.eta);
  s.tones.phase_1 = s.tones.phase_2 = -std::numbers::pi / 2;
  s.j0 = pf::coupling_matrix(s.modes, s.tones)(0, 1);
  return s;
}

// Instants where the centre-of-mass loop closes.
std::vector<double> strobe(double delta, double t_end) {
  std::vector<double> t;
  for (int k = 0; k * kTwoPi / delta <= t_end; ++k) t.push_back(k * kTwoPi / delta);
  return t;
}

double mean_z(const pf::SpinObservables& s) {
  double z = 0.0;
  for (double v : s.z) z += v;
  return z / static_cast<double>(s.z.size());
}

pf::PropagationResult flop(const TwoIon& s, double t_end, const std::vector<double>& times,
                           int n_max = 2, double dt = 15e-9) {
  pf::DriveProgram p;
  p.dt = dt;
  p.add_ms_window(0.0, t_end, pf::PulseShape::flat(t_end), s.tones);
  pf::SpinPhononPropagator prop(s.modes, s.tones.eta, n_max);
  auto st = prop.initial_state(pf::spin_pattern_state("dd"));
  return prop.evolve(st, p, nullptr, times);
}

}  // namespace

TEST(SpinPhononState, LayoutAndObservables) {
  auto st = pf::SpinPhononState::product(pf::spin_pattern_state("ud"), 2, 2, {1, 0});
  EXPECT_EQ(st.size(), 4u * 9u);
  EXPECT_NEAR(st.norm(), 1.0, 1e-15);
  auto obs = st.spin_observables();
  EXPECT_NEAR(obs.z[0], 1.0, 1e-15);
  EXPECT_NEAR(obs.z[1], -1.0, 1e-15);
  auto n = st.mean_phonons();
  EXPECT_NEAR(n[0], 1.0, 1e-15);
  EXPECT_NEAR(n[1], 0.0, 1e-15);
  EXPECT_EQ(st.stride(0), 3u);
}

TEST(Propagator, ZeroDurationProgramIsIdentity) {
  auto s = two_ion(4.1);
  pf::DriveProgram p;
  pf::SpinPhononPropagator prop(s.modes, 0.08, 2);
  auto st = prop.initial_state(pf::spin_pattern_state("+d"));
  const auto before = st.amplitudes();
  auto r = prop.evolve(st, p, nullptr, {0.0});
  ASSERT_EQ(r.spins.size(), 1u);
  for (std::size_t k = 0; k < before.size(); ++k) EXPECT_EQ(st.amplitudes()[k], before[k]);
  EXPECT_EQ(r.steps, 0u);
}

TEST(Propagator, CarrierPiPulseFlips) {
  auto s = two_ion(4.1);
  pf::DriveProgram p;
  p.add_carrier(0.0, 5e-6, pf::GlobalRotation::x(std::numbers::pi));
  p.duration = 5e-6;
  pf::SpinPhononPropagator prop(s.modes, 0.08, 2);
  auto st = prop.initial_state(pf::spin_pattern_state("dd"));
  auto r = prop.evolve(st, p, nullptr, {5e-6});
  EXPECT_GT(r.spins[0].z[0], 0.999);
  EXPECT_GT(r.spins[0].z[1], 0.999);
}

TEST(Propagator, TwoIonFlopFollowsIdealState) {
  auto s = two_ion(4.1);
  const double period = std::numbers::pi / s.j0;
  auto times = strobe(s.delta, period);
  auto r = flop(s, period, times);
  double worst = 0.0;
  for (std::size_t k = 0; k < times.size(); ++k)
    worst = std::max(worst, std::abs(mean_z(r.spins[k]) + std::cos(2 * s.j0 * times[k])));
  EXPECT_LT(worst, 0.05);
  EXPECT_FALSE(r.truncation_suspect);
  EXPECT_LT(r.max_norm_drift, 1e-6);
  EXPECT_FALSE(r.norm_drift_exceeded);
}

TEST(Propagator, FlopFrequencyMatchesCouplingMatrix) {
  auto s = two_ion(8.0);
  const double period = std::numbers::pi / s.j0;
  auto times = strobe(s.delta, period);
  auto r = flop(s, period, times);
  auto cost = [&](double f) {
    double c = 0.0;
    for (std::size_t k = 0; k < times.size(); ++k) {
      const double d = mean_z(r.spins[k]) + std::cos(kTwoPi * f * times[k]);
      c += d * d;
    }
    return c;
  };
  const double f0 = s.j0 / std::numbers::pi;
  double best = f0, best_cost = cost(f0);
  for (double f = 0.8 * f0; f <= 1.2 * f0; f += 1e-4 * f0)
    if (cost(f) < best_cost) best_cost = cost(f), best = f;
  EXPECT_NEAR(best / f0, 1.0, 0.03);
}

TEST(Propagator, StepHalvingConverges) {
  auto s = two_ion(4.1);
  std::vector<double> times;
  for (int k = 1; k <= 20; ++k) times.push_back(k * 20e-6);
  auto a = flop(s, 400e-6, times, 2, 15e-9);
  auto b = flop(s, 400e-6, times, 2, 7.5e-9);
  for (std::size_t k = 0; k < times.size(); ++k)
    for (int j = 0; j < 2; ++j) EXPECT_NEAR(a.spins[k].z[j], b.spins[k].z[j], 1e-4);
}

TEST(Propagator, PhononCutoffConverges) {
  auto s = two_ion(4.1);
  auto times = strobe(s.delta, 1e-3);
  auto a = flop(s, 1e-3, times, 2);
  auto b = flop(s, 1e-3, times, 3);
  auto c = flop(s, 1e-3, times, 4);
  double d23 = 0.0, d34 = 0.0;
  for (std::size_t k = 0; k < times.size(); ++k)
    for (int j = 0; j < 2; ++j) {
      d23 = std::max(d23, std::abs(a.spins[k].z[j] - b.spins[k].z[j]));
      d34 = std::max(d34, std::abs(b.spins[k].z[j] - c.spins[k].z[j]));
    }
  EXPECT_LT(d34, 1e-3);
  EXPECT_LT(d34, 0.2 * d23);
}

TEST(Propagator, CommonPhaseOffsetLeavesPopulationsUnchanged) {
  auto s = two_ion(4.1);
  std::vector<double> times{100e-6, 300e-6};
  auto a = flop(s, 300e-6, times);
  auto shifted = s;
  shifted.tones.phase_1 += 0.7;
  shifted.tones.phase_2 += 0.7;
  auto b = flop(shifted, 300e-6, times);
  for (std::size_t k = 0; k < times.size(); ++k)
    for (int j = 0; j < 2; ++j) EXPECT_NEAR(a.spins[k].z[j], b.spins[k].z[j], 1e-9);
}

TEST(Propagator, RotatingFrameScheduleRealisesField) {
  // Flat segments spanning whole loops of both modes, weak drive.
  auto modes = pf::transverse_modes({2, kTwoPi * 4.8e6, kTwoPi * 0.5e6});
  const double split = modes.frequencies(0) - modes.frequencies(1);
  const double t1 = 3 * kTwoPi / split;
  auto s = two_ion(10.0, 12.0 / t1);
  const double bz = kTwoPi * 50.0;
  const int cycles = 20;
  pf::TargetParams plain{pf::coupling_matrix(s.modes, s.tones), 0.0, 0.0, 0.0};
  auto seq = pf::build_cpmg(plain, t1, 0.0);
  pf::ProgramOptions po;
  po.cycles = cycles;
  po.frame_bz = bz;
  auto program = pf::program_from_sequence(seq, s.tones, po);
  std::vector<double> times;
  for (int c = 1; c <= cycles; ++c) times.push_back(c * seq.cycle_time());
  pf::SpinPhononPropagator prop(s.modes, s.tones.eta, 2);
  auto st = prop.initial_state(pf::spin_pattern_state("dd"));
  auto full = prop.evolve(st, program, nullptr, times);

  pf::TargetParams with_field = plain;
  with_field.bz = bz;
  auto ref = pf::evolve_spin_only(pf::spin_pattern_state("dd"), pf::build_cpmg(with_field, t1, 0.0), nullptr, times);
  auto free = pf::evolve_spin_only(pf::spin_pattern_state("dd"), seq, nullptr, times);
  double worst = 0.0, moved = 0.0;
  for (std::size_t k = 0; k < times.size(); ++k)
    for (int j = 0; j < 2; ++j) {
      worst = std::max(worst, std::abs(full.spins[k].z[j] - ref.spins[k].z[j]));
      moved = std::max(moved, std::abs(ref.spins[k].z[j] - free.spins[k].z[j]));
    }
  EXPECT_LT(worst, 0.05);
  EXPECT_GT(moved, 0.1);
}

TEST(Propagator, RejectsUnsupportedSegments) {
  auto s = two_ion(4.1);
  pf::TargetParams t{pf::coupling_matrix(s.modes, s.tones), 0.0, 0.0, 1e3};
  auto seq = pf::build_cpmg(t, 120e-6, 5e-6);
  EXPECT_THROW(pf::program_from_sequence(seq, s.tones, {}), pf::UnsupportedShapeError);
}

TEST(Propagator, DropsFarModes) {
  auto s = two_ion(4.1);
  pf::PropagatorOptions o;
  o.mode_drop_factor = 1.5;
  pf::SpinPhononPropagator prop(s.modes, 0.08, 2, o);
  auto dropped = prop.drop_far_modes(s.tones);
  ASSERT_EQ(dropped.size(), 1u);
  EXPECT_EQ(dropped[0], 1);
  EXPECT_EQ(prop.active_modes().size(), 1u);
}

TEST(SpinOnly, ZeroHamiltonianKeepsState) {
  auto psi = pf::spin_pattern_state("+d");
  auto r = pf::evolve_spin_only(psi, pf::PauliSum(2), {0.0, 1e-3});
  EXPECT_NEAR(r.spins[1].x[0], 1.0, 1e-12);
  EXPECT_NEAR(r.spins[1].z[1], -1.0, 1e-12);
}

TEST(SpinOnly, HeisenbergSequenceTracksAverageHamiltonian) {
  Eigen::MatrixXd j = pf::power_law_couplings(4, 1.0, 2.05);
  const double t1 = 0.05;
  auto seq = pf::build_heisenberg(j, t1, 0.0);
  auto avg = pf::average_hamiltonian(seq);
  std::vector<double> times;
  const double jbar = 1.0;
  for (double t = 0.0; t <= 3.0 / jbar + 1e-9; t += seq.cycle_time() * 4) times.push_back(t);
  auto psi = pf::spin_pattern_state("udud");
  auto a = pf::evolve_spin_only(psi, avg, times);
  auto b = pf::evolve_spin_only(psi, seq, nullptr, times);
  for (std::size_t k = 0; k < times.size(); ++k)
    for (int s = 0; s < 4; ++s) EXPECT_NEAR(a.spins[k].z[s], b.spins[k].z[s], 0.05);
}

TEST(SpinOnly, CpmgSuppressesStaticStarkError) {
  Eigen::MatrixXd j = pf::power_law_couplings(2, 1.0, 1.0);
  pf::TargetParams t{j, 0.0, 0.0, 0.0};
  auto seq = pf::build_cpmg(t, 0.02, 0.0);
  const double eps = 0.3;
  pf::SpinNoise noise{[eps](double) { return eps; }, pf::uniform_field(2, pf::Pauli::Z)};
  std::vector<double> times;
  for (int c = 0; c <= 100; ++c) times.push_back(c * seq.cycle_time());
  auto psi = pf::spin_pattern_state("dd");
  auto ideal = pf::evolve_spin_only(psi, seq, nullptr, times);
  auto dd = pf::evolve_spin_only(psi, seq, &noise, times);
  auto plain = pf::evolve_spin_only(psi, seq.without_pulses(), &noise, times);
  double err_dd = 0.0, err_plain = 0.0;
  for (std::size_t k = 0; k < times.size(); ++k)
    for (int s = 0; s < 2; ++s) {
      err_dd = std::max(err_dd, std::abs(dd.spins[k].z[s] - ideal.spins[k].z[s]));
      err_plain = std::max(err_plain, std::abs(plain.spins[k].z[s] - ideal.spins[k].z[s]));
    }
  EXPECT_GT(err_plain, 10.0 * err_dd);
}
