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

#include <gtest/gtest.h>

#include "pulseforge/error.hpp"
#include "pulseforge/pulse_shape.hpp"

namespace pf = pulseforge;

TEST(PulseShape, TukeyProfile) {
  const auto s = pf::PulseShape::tukey(20e-6, 120e-6, 1.0);
  EXPECT_NEAR(s.alpha(), 2.0 / 6.0, 1e-15);
  EXPECT_EQ(pf::tukey_envelope(0.0, s), 0.0);
  EXPECT_NEAR(pf::tukey_envelope(10e-6, s), 0.5, 1e-12);
  EXPECT_EQ(pf::tukey_envelope(60e-6, s), 1.0);
  EXPECT_NEAR(pf::tukey_envelope(110e-6, s), 0.5, 1e-12);
  const auto s2 = pf::PulseShape::tukey(20e-6, 120e-6, 2.0);
  EXPECT_NEAR(pf::tukey_envelope(10e-6, s2), 0.25, 1e-12);
  EXPECT_NEAR(pf::field_envelope(10e-6, s2), 0.5, 1e-12);
  EXPECT_EQ(pf::tukey_envelope(5e-6, pf::PulseShape::flat(120e-6)), 1.0);
}

TEST(PulseShape, Validation) {
  EXPECT_THROW(pf::PulseShape::tukey(70e-6, 120e-6).validate(), pf::PreconditionError);
  EXPECT_THROW(pf::PulseShape::tukey(-1e-6, 120e-6).validate(), pf::PreconditionError);
  EXPECT_NO_THROW(pf::PulseShape::tukey(60e-6, 120e-6).validate());
}

TEST(Beta, QuadratureMatchesClosedForms) {
  const double t1 = 120e-6, tp = 20e-6;
  EXPECT_EQ(pf::effective_beta(pf::PulseShape::flat(t1), t1), 1.0);
  EXPECT_NEAR(pf::effective_beta(pf::PulseShape::tukey(tp, t1, 1.0), t1), 1.0 - tp / t1, 1e-12);
  EXPECT_NEAR(pf::effective_beta(pf::PulseShape::tukey(tp, t1, 2.0), t1), 1.0 - 1.25 * tp / t1, 1e-12);
  EXPECT_NEAR(pf::effective_beta(pf::PulseShape::tukey(tp, t1, 2.0), t1, pf::BetaModel::Empirical),
              0.8036666666666666, 1e-15);
  EXPECT_EQ(pf::empirical_beta(tp, t1), 1.0 - 1.178 * tp / t1);
}

TEST(Beta, RequiresPlateau) {
  EXPECT_THROW(pf::effective_beta(pf::PulseShape::tukey(20e-6, 40e-6), 40e-6), pf::PreconditionError);
}
