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
#include <random>

#include <gtest/gtest.h>
#include <unsupported/Eigen/MatrixFunctions>

#include "pulseforge/error.hpp"
#include "pulseforge/pauli.hpp"

namespace pf = pulseforge;
using pf::Complex;
using pf::PauliSum;

namespace {

Eigen::Matrix2cd single(char c) {
  Eigen::Matrix2cd m;
  const Complex i{0, 1};
  switch (c) {
    case 'X': m << 0, 1, 1, 0; break;
    case 'Y': m << 0, -i, i, 0; break;
    case 'Z': m << 1, 0, 0, -1; break;
    default: m.setIdentity(); break;
  }
  return m;
}

// Independent Kronecker-product oracle.
Eigen::MatrixXcd kron_string(const std::string& letters) {
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Identity(1, 1);
  for (char c : letters) {
    Eigen::Matrix2cd s = single(c);
    Eigen::MatrixXcd next(out.rows() * 2, out.cols() * 2);
    for (Eigen::Index r = 0; r < out.rows(); ++r)
      for (Eigen::Index k = 0; k < out.cols(); ++k) next.block(2 * r, 2 * k, 2, 2) = out(r, k) * s;
    out = next;
  }
  return out;
}

Eigen::MatrixXcd oracle_dense(const PauliSum& op) {
  const auto dim = Eigen::Index{1} << op.spin_count();
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
  for (const auto& [letters, c] : op.terms()) m += c * kron_string(letters);
  return m;
}

Eigen::MatrixXcd oracle_rotation(double phase, double angle, int n) {
  const Complex i{0, 1};
  Eigen::Matrix2cd gen = std::cos(phase) * single('X') - std::sin(phase) * single('Y');
  Eigen::Matrix2cd u = (Complex(0, -angle / 2) * gen).exp();
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Identity(1, 1);
  for (int s = 0; s < n; ++s) {
    Eigen::MatrixXcd next(out.rows() * 2, out.cols() * 2);
    for (Eigen::Index r = 0; r < out.rows(); ++r)
      for (Eigen::Index k = 0; k < out.cols(); ++k) next.block(2 * r, 2 * k, 2, 2) = out(r, k) * u;
    out = next;
  }
  (void)i;
  return out;
}

PauliSum random_sum(std::mt19937_64& rng, int n, int terms) {
  std::uniform_int_distribution<int> letter(0, 3);
  std::normal_distribution<double> g;
  PauliSum s(n);
  for (int k = 0; k < terms; ++k) {
    std::string l(n, 'I');
    for (char& c : l) c = "IXYZ"[letter(rng)];
    s.add(l, Complex(g(rng), g(rng)));
  }
  s.canonicalize();
  return s;
}

}  // namespace

TEST(PauliString, SingleSiteProducts) {
  auto p = pf::multiply(pf::PauliString(1.0, "X"), pf::PauliString(1.0, "Y"));
  EXPECT_EQ(p.letters(), "Z");
  EXPECT_EQ(p.coefficient, Complex(0, 1));
  auto q = pf::multiply(pf::PauliString(1.0, "ZI"), pf::PauliString(1.0, "XY"));
  EXPECT_EQ(q.letters(), "YY");
  EXPECT_EQ(q.coefficient, Complex(0, 1));
}

TEST(PauliString, Anticommutation) {
  EXPECT_TRUE(pf::PauliString(1.0, "XI").anticommutes_with(pf::PauliString(1.0, "ZZ")));
  EXPECT_FALSE(pf::PauliString(1.0, "XX").anticommutes_with(pf::PauliString(1.0, "ZZ")));
}

TEST(PauliSum, CommutatorTwoSpinExample) {
  PauliSum xx = PauliSum::parse("1*XX");
  PauliSum z = PauliSum::parse("1*ZI + 1*IZ");
  PauliSum c = pf::commutator(xx, z);
  PauliSum expected = PauliSum::parse("(0,-2)*YX + (0,-2)*XY");
  EXPECT_LT(pf::max_coefficient_distance(c, expected), 1e-15);
  EXPECT_TRUE(pf::commutator(PauliSum::parse("1*ZZ"), z).empty());
}

TEST(PauliSum, DimensionMismatchThrows) {
  EXPECT_THROW(PauliSum::parse("1*XX") + PauliSum::parse("1*X"), pf::DimensionError);
}

TEST(PauliSum, ParseErrors) {
  EXPECT_THROW(PauliSum::parse("1*XQ"), pf::ParseError);
  EXPECT_THROW(PauliSum::parse("1*XX + 2*X"), pf::ParseError);
  EXPECT_THROW(PauliSum::parse("abc"), pf::ParseError);
}

TEST(PauliSum, RoundTripPrintParse) {
  std::mt19937_64 rng(7);
  for (int k = 0; k < 50; ++k) {
    PauliSum s = random_sum(rng, 3, 6);
    PauliSum back = PauliSum::parse(s.to_string(), 3);
    EXPECT_EQ(s, back) << s.to_string();
  }
  EXPECT_EQ(PauliSum::parse("0", 2), PauliSum(2));
}

TEST(PauliSum, DenseMatchesKroneckerOracle) {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 20; ++k) {
    PauliSum s = random_sum(rng, 3, 5);
    EXPECT_LT((pf::to_dense_matrix(s) - oracle_dense(s)).norm(), 1e-13);
    EXPECT_LT(pf::max_coefficient_distance(pf::from_dense_matrix(oracle_dense(s)), s), 1e-13);
  }
}

TEST(PauliSum, RandomProductsMatchDense) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> nspin(1, 4);
  for (int k = 0; k < 500; ++k) {
    const int n = nspin(rng);
    PauliSum a = random_sum(rng, n, 3);
    PauliSum b = random_sum(rng, n, 3);
    Eigen::MatrixXcd da = oracle_dense(a), db = oracle_dense(b);
    ASSERT_LT((oracle_dense(a * b) - da * db).norm(), 1e-12);
    ASSERT_LT((oracle_dense(pf::commutator(a, b)) - (da * db - db * da)).norm(), 1e-12);
  }
}

TEST(Rotation, MatrixMatchesExponential) {
  for (double phase : {0.0, 0.3, -std::numbers::pi / 2, 2.0}) {
    for (double angle : {std::numbers::pi, std::numbers::pi / 2, 0.7}) {
      pf::GlobalRotation r{phase, false, angle};
      EXPECT_LT((pf::global_rotation_matrix(r, 2) - oracle_rotation(phase, angle, 2)).norm(), 1e-13);
    }
  }
}

TEST(Rotation, ConjugateExamples) {
  const double pi = std::numbers::pi;
  PauliSum x = PauliSum::parse("1*X");
  EXPECT_LT(pf::max_coefficient_distance(pf::conjugate(x, pf::GlobalRotation::y(pi)),
                                         PauliSum::parse("-1*X")),
            1e-15);
  PauliSum xx = PauliSum::parse("1*XX");
  EXPECT_EQ(pf::conjugate(xx, pf::GlobalRotation::y(pi)), xx);
  // A quarter turn about y takes XX to +ZZ in the toggling frame.
  EXPECT_EQ(pf::conjugate(xx, pf::GlobalRotation::y(pi / 2)), PauliSum::parse("1*ZZ"));
}

TEST(Rotation, ConjugateMatchesDense) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int k = 0; k < 40; ++k) {
    PauliSum s = random_sum(rng, 3, 4);
    pf::GlobalRotation r{u(rng), false, u(rng)};
    Eigen::MatrixXcd R = oracle_rotation(r.axis_phase, r.angle, 3);
    Eigen::MatrixXcd m = oracle_dense(s);
    EXPECT_LT((oracle_dense(pf::conjugate(s, r)) - R.adjoint() * m * R).norm(), 1e-12);
    EXPECT_LT((oracle_dense(pf::conjugate(s, r, true)) - R * m * R.adjoint()).norm(), 1e-12);
  }
  pf::GlobalRotation rz = pf::GlobalRotation::z(0.4);
  PauliSum s = PauliSum::parse("1*XY + 0.5*ZI");
  Eigen::MatrixXcd R = pf::global_rotation_matrix(rz, 2);
  EXPECT_LT((oracle_dense(pf::conjugate(s, rz)) - R.adjoint() * oracle_dense(s) * R).norm(), 1e-12);
}

TEST(Rotation, ComposeSameAxis) {
  const double pi = std::numbers::pi;
  auto a = pf::GlobalRotation::y(pi), b = pf::GlobalRotation::y(0.75 * pi);
  auto r = pf::compose_same_axis(a, b);
  EXPECT_LT((r.matrix() - a.matrix() * b.matrix()).norm(), 1e-14);
  EXPECT_LT((pf::compose_same_axis(a, a).matrix() + Eigen::Matrix2cd::Identity()).norm(), 1e-14);
  EXPECT_THROW(pf::compose_same_axis(pf::GlobalRotation::x(pi), pf::GlobalRotation::y(pi)),
               pf::PreconditionError);
}

TEST(Compiled, ApplyAndExpectationMatchDense) {
  std::mt19937_64 rng(3);
  PauliSum h = random_sum(rng, 4, 8);
  PauliSum herm(4);
  for (const auto& [l, c] : h.terms()) herm.add(l, c.real());
  herm.add("ZIII", 0.3);
  herm.add("IZII", -0.2);
  pf::CompiledPauliSum compiled(herm);
  std::normal_distribution<double> g;
  Eigen::VectorXcd v(16);
  for (auto& x : v) x = Complex(g(rng), g(rng));
  v.normalize();
  Eigen::VectorXcd out(16);
  compiled.apply(std::span<const Complex>(v.data(), 16), std::span<Complex>(out.data(), 16), 2.0);
  EXPECT_LT((out - 2.0 * oracle_dense(herm) * v).norm(), 1e-12);
  const double e = (v.adjoint() * oracle_dense(herm) * v)(0, 0).real();
  EXPECT_NEAR(compiled.expectation(std::span<const Complex>(v.data(), 16)), e, 1e-12);
}

TEST(Compiled, DenseCapEnforced) {
  EXPECT_THROW(pf::to_dense_matrix(PauliSum::identity(15)), pf::DimensionError);
}
