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

#include <array>
#include <complex>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace pulseforge {

using Complex = std::complex<double>;

/** Single-site Pauli operator. */
enum class Pauli : std::uint8_t { I = 0, X = 1, Y = 2, Z = 3 };

char pauli_char(Pauli p);
Pauli pauli_from_char(char c);

/** Default cap on the spin count for dense 2^N matrices. */
inline constexpr int kDenseSpinCap = 14;

/** Relative threshold below which coefficients are dropped. */
inline constexpr double kCanonicalTolerance = 1e-12;

/**
 * A coefficient times a tensor product of single-site Paulis.
 *
 * Site 0 is the leftmost letter in text form and the most significant
 * factor of the Kronecker product.
 */
struct PauliString {
  Complex coefficient{1.0, 0.0};
  std::vector<Pauli> ops;

  PauliString() = default;
  PauliString(Complex c, std::vector<Pauli> o) : coefficient(c), ops(std::move(o)) {}
  /** Builds from letters, e.g. PauliString(0.5, "XXI"). */
  PauliString(Complex c, std::string_view letters);

  int spin_count() const { return static_cast<int>(ops.size()); }
  std::string letters() const;
  /** True when the two strings anticommute (odd number of clashing sites). */
  bool anticommutes_with(const PauliString& other) const;
};

/** Product a*b with the phase from the single-site table. */
PauliString multiply(const PauliString& a, const PauliString& b);

/**
 * Linear combination of Pauli strings in canonical form: one entry per
 * letter pattern, negligible coefficients removed.
 */
class PauliSum {
 public:
  explicit PauliSum(int spin_count = 1);
  PauliSum(const PauliString& s);  // NOLINT(google-explicit-constructor)

  /** Single-site operator p on `site`. */
  static PauliSum site(int spin_count, int site, Pauli p, Complex coefficient = 1.0);
  static PauliSum identity(int spin_count, Complex coefficient = 1.0);

  int spin_count() const { return spin_count_; }
  const std::map<std::string, Complex>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }

  /** Coefficient of a letter pattern (0 when absent). */
  Complex coefficient(std::string_view letters) const;
  double max_abs_coefficient() const;

  void add(const PauliString& s);
  void add(std::string_view letters, Complex c);

  PauliSum& operator+=(const PauliSum& o);
  PauliSum& operator-=(const PauliSum& o);
  PauliSum& operator*=(Complex s);

  /** Removes coefficients below kCanonicalTolerance times the largest one. */
  void canonicalize();
  /** All coefficients real (to tolerance, relative to the largest). */
  bool is_hermitian(double tol = kCanonicalTolerance) const;

  std::vector<PauliString> strings() const;

  /** Text form, e.g. "0.5*XXI + -0.25*ZII". Complex coefficients print as (re,im). */
  std::string to_string() const;
  /** Inverse of to_string(). spin_count is required only for "0". */
  static PauliSum parse(std::string_view text, int spin_count = 0);

  friend bool operator==(const PauliSum& a, const PauliSum& b) = default;

 private:
  void check_dims(const PauliSum& o) const;
  int spin_count_;
  std::map<std::string, Complex> terms_;
};

PauliSum operator+(PauliSum a, const PauliSum& b);
PauliSum operator-(PauliSum a, const PauliSum& b);
PauliSum operator*(PauliSum a, Complex s);
PauliSum operator*(Complex s, PauliSum a);
PauliSum operator*(const PauliSum& a, const PauliSum& b);

/** ab - ba, canonical; exactly empty when a and b commute. */
PauliSum commutator(const PauliSum& a, const PauliSum& b);

/** Largest absolute coefficient of a - b. */
double max_coefficient_distance(const PauliSum& a, const PauliSum& b);

/**
 * Rotation exp(-i angle n.sigma/2) applied identically to every spin.
 *
 * The in-plane axis is n = (cos phase, -sin phase, 0), the convention of the
 * carrier Hamiltonian (Omega/2)(cos phi X - sin phi Y). With `polar` set the
 * axis is +z and `axis_phase` is ignored.
 */
struct GlobalRotation {
  double axis_phase = 0.0;
  bool polar = false;
  double angle = 0.0;

  static GlobalRotation x(double angle) { return {0.0, false, angle}; }
  static GlobalRotation y(double angle);
  static GlobalRotation z(double angle) { return {0.0, true, angle}; }
  static GlobalRotation identity() { return {0.0, false, 0.0}; }

  std::array<double, 3> axis() const;
  GlobalRotation inverse() const { return {axis_phase, polar, -angle}; }
  bool same_axis(const GlobalRotation& o) const;
  bool is_identity() const;
  /** Single-spin 2x2 unitary. */
  Eigen::Matrix2cd matrix() const;
};

/** Composition of two rotations about the same axis: angles add modulo 4 pi. */
GlobalRotation compose_same_axis(const GlobalRotation& a, const GlobalRotation& b);

/**
 * Exact conjugation of `op` by a global rotation R.
 *
 * Default returns R^dagger op R, the toggling-frame form of a single pulse;
 * with `inverse_frame` set returns R op R^dagger.
 */
PauliSum conjugate(const PauliSum& op, const GlobalRotation& r, bool inverse_frame = false);

/** Dense 2^N matrix, |up>_z first on each site. */
Eigen::MatrixXcd to_dense_matrix(const PauliSum& op, int cap = kDenseSpinCap);

/** Trace-orthogonal decomposition of a dense operator (N <= 8). */
PauliSum from_dense_matrix(const Eigen::MatrixXcd& m);

/** 2^N-dimensional N-fold tensor power of a single-spin unitary. */
Eigen::MatrixXcd global_rotation_matrix(const GlobalRotation& r, int spin_count,
                                        int cap = kDenseSpinCap);

/**
 * Matrix-free form of a PauliSum for repeated application to state vectors.
 * Each term is stored as a flip mask, a sign mask and a prefactor.
 */
class CompiledPauliSum {
 public:
  CompiledPauliSum() = default;
  explicit CompiledPauliSum(const PauliSum& op, int cap = 24);

  int spin_count() const { return spin_count_; }
  std::size_t dimension() const { return std::size_t{1} << spin_count_; }
  bool empty() const { return groups_.empty(); }
  /** out = scale * H * in (out is overwritten). */
  void apply(std::span<const Complex> in, std::span<Complex> out, double scale = 1.0) const;
  /** out += scale * H * in. */
  void apply_add(std::span<const Complex> in, std::span<Complex> out, double scale = 1.0) const;
  /** Real part of <state|H|state>. */
  double expectation(std::span<const Complex> state) const;

 private:
  struct Term {
    std::uint64_t flip;
    std::uint64_t sign;
    Complex factor;
  };
  // Terms sharing a flip mask; `diagonal` caches their summed sign pattern.
  struct Group {
    std::uint64_t flip = 0;
    std::vector<Term> terms;
    std::vector<Complex> diagonal;
  };
  int spin_count_ = 0;
  std::vector<Group> groups_;
};

}  // namespace pulseforge
