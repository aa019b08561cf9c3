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
#include <string>

#include <gtest/gtest.h>

#include "pulseforge/error.hpp"
#include "pulseforge/sequence_io.hpp"

namespace pf = pulseforge;

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;

const char* kCpmgText = R"(# two-spin CPMG written out by hand
name hand_cpmg
segment t_us=120 : 400*XX + 50*ZI + 50*IZ
pulse phase_deg=-90 angle_deg=180 t_us=5
segment t_us=120 : 400*XX - 50*ZI - 50*IZ
pulse phase_deg=-90 angle_deg=180 t_us=5
target : 400*XX + 50*ZI + 50*IZ
)";

std::string parse_error(const std::string& text) {
  try {
    pf::parse_sequence(text);
  } catch (const pf::ParseError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(SequenceFile, ParsesSegmentsPulsesAndUnits) {
  const auto f = pf::parse_sequence(kCpmgText);
  const auto& seq = f.sequence;
  EXPECT_EQ(seq.name(), "hand_cpmg");
  ASSERT_EQ(seq.steps().size(), 2u);
  EXPECT_DOUBLE_EQ(seq.steps()[0].segment.duration, 120e-6);
  EXPECT_DOUBLE_EQ(seq.steps()[0].pulse.duration, 5e-6);
  EXPECT_NEAR(seq.steps()[0].pulse.rotation.angle, std::numbers::pi, 1e-15);
  EXPECT_NEAR(seq.steps()[0].segment.hamiltonian.coefficient("XX").real(), kTwoPi * 400, 1e-9);
  EXPECT_NEAR(seq.steps()[1].segment.hamiltonian.coefficient("ZI").real(), -kTwoPi * 50, 1e-9);
  ASSERT_TRUE(f.target);
  const auto report = pf::validate_decoupling(seq, *f.target, pf::uniform_field(2, pf::Pauli::Z));
  EXPECT_TRUE(report.pass()) << report.to_string();
}

TEST(SequenceFile, BuilderLineMatchesDirectBuild) {
  const auto f = pf::parse_sequence("builder xy n=3 j0_hz=400 p=1.5 t1_us=120 t_pi_us=5 bz_hz=30\n");
  pf::BuilderSpec b;
  b.name = "xy";
  b.spins = 3;
  b.j0_hz = 400;
  b.p = 1.5;
  b.t1 = 120e-6;
  b.t_pi = 5e-6;
  b.bz_hz = 30;
  const auto direct = pf::build_named(b);
  ASSERT_EQ(f.sequence.steps().size(), direct.steps().size());
  for (std::size_t k = 0; k < direct.steps().size(); ++k) {
    EXPECT_EQ(f.sequence.steps()[k].segment.hamiltonian, direct.steps()[k].segment.hamiltonian);
    EXPECT_EQ(f.sequence.steps()[k].pulse.rotation.axis_phase, direct.steps()[k].pulse.rotation.axis_phase);
  }
  ASSERT_TRUE(f.target);
  EXPECT_EQ(*f.target, pf::builder_target(b));
}

TEST(SequenceFile, RoundTripThroughFormat) {
  pf::BuilderSpec b;
  b.name = "heisenberg";
  b.spins = 3;
  b.j0_hz = 250;
  b.p = 2.0;
  b.t_pi = 5e-6;
  const auto seq = pf::build_named(b).with_envelope(pf::PulseShape::tukey(20e-6, 0.0));
  const auto text = pf::format_sequence(seq, pf::builder_target(b));
  const auto back = pf::parse_sequence(text);
  ASSERT_EQ(back.sequence.steps().size(), seq.steps().size());
  for (std::size_t k = 0; k < seq.steps().size(); ++k) {
    const auto& a = seq.steps()[k];
    const auto& c = back.sequence.steps()[k];
    EXPECT_LT(pf::max_coefficient_distance(a.segment.hamiltonian, c.segment.hamiltonian), 1e-9);
    EXPECT_NEAR(a.segment.duration, c.segment.duration, 1e-18);
    EXPECT_NEAR(a.pulse.rotation.angle, c.pulse.rotation.angle, 1e-14);
    EXPECT_NEAR(a.pulse.rotation.axis_phase, c.pulse.rotation.axis_phase, 1e-14);
    ASSERT_TRUE(c.segment.envelope);
    EXPECT_NEAR(c.segment.envelope->ramp_time, 20e-6, 1e-18);
  }
  EXPECT_NEAR(pf::time_dilution_factor(back.sequence), pf::time_dilution_factor(seq), 1e-12);
}

TEST(SequenceFile, ErrorsCarryLineNumbers) {
  EXPECT_NE(parse_error("segment t_us=10 : XX\nsegment t_us=10 : XX\n").find("line 2"), std::string::npos);
  EXPECT_NE(parse_error("\n\npulse phase_deg=0 angle_deg=180\n").find("line 3"), std::string::npos);
  EXPECT_NE(parse_error("segment t_us=abc : XX\n").find("line 1"), std::string::npos);
  EXPECT_NE(parse_error("segment t_us=10 : XX\npulse phase_deg=0 angle_deg=180\nfrobnicate\n").find("line 3"),
            std::string::npos);
  EXPECT_NE(parse_error("segment t_us=10 : XQ\n").find("line 1"), std::string::npos);
  EXPECT_NE(parse_error("# only\nsegment t_us=10 : XX\n").find("line 2"), std::string::npos);
  EXPECT_NE(parse_error("segment t_us=10 : XX\npulse phase_deg=0 angle_deg=180 colour=red\n").find("line 2"),
            std::string::npos);
  EXPECT_NE(parse_error("segment t_us=10 : XX\npulse phase_deg=0 angle_deg=180\nsegment t_us=10 : XXX\n")
                .find("line 3"),
            std::string::npos);
  EXPECT_NE(parse_error("builder nosuch n=2\n").find("line 1"), std::string::npos);
  EXPECT_FALSE(parse_error("").empty());
}

TEST(SequenceFile, DroppedPulseBreaksClosure) {
  const auto f = pf::parse_sequence(kCpmgText);
  const auto broken = pf::drop_pulse(f.sequence, 1);
  const auto report = pf::validate_decoupling(broken, *f.target, pf::uniform_field(2, pf::Pauli::Z));
  EXPECT_FALSE(report.frame_closure_pass);
  EXPECT_NEAR(report.frame_closure_residual, 2.0, 1e-12);
}

TEST(SequenceFile, IdentityPulsesAndNoiseFlags) {
  const auto f = pf::parse_sequence(
      "segment t_us=50 noise=off : 1*ZZ\npulse identity\nsegment t_us=50 : 1*ZZ\npulse axis=z angle_deg=90\n");
  EXPECT_FALSE(f.sequence.steps()[0].segment.noise_bound);
  EXPECT_TRUE(f.sequence.steps()[1].segment.noise_bound);
  EXPECT_TRUE(f.sequence.steps()[0].pulse.rotation.is_identity());
  EXPECT_TRUE(f.sequence.steps()[1].pulse.rotation.polar);
  EXPECT_FALSE(f.target);
}

TEST(Builders, NamesAndTargets) {
  for (const auto& name : pf::builder_names()) {
    pf::BuilderSpec b;
    b.name = name;
    b.spins = 3;
    b.j0_hz = 100;
    const auto seq = pf::build_named(b);
    pf::DecouplingOptions o;
    o.strict_target = false;
    const auto r = pf::validate_decoupling(seq, pf::builder_target(b), pf::uniform_field(3, pf::Pauli::Z), o);
    EXPECT_TRUE(r.frame_closure_pass) << name;
    if (name != "hs_modified") EXPECT_TRUE(r.target_pass) << name << "\n" << r.to_string();
  }
  pf::BuilderSpec bad;
  bad.name = "xy2";
  bad.bz_hz = 1.0;
  EXPECT_THROW(pf::build_named(bad), pf::PreconditionError);
}
