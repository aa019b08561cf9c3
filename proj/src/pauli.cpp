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

#include "pulseforge/pauli.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>

#include "pulseforge/error.hpp"

namespace pulseforge {

namespace {

constexpr Complex kI{0.0, 1.0};

// Single-site product table: result letter and phase of a*b.
struct SiteProduct {
  Pauli p;
  Complex phase;
};

SiteProduct site_product(Pauli a, Pauli b) {
  if (a == Pauli::I) return {b, 1.0};
  if (b == Pauli::I) return {a, 1.0};
  if (a == b) return {Pauli::I, 1.0};
  const int ia = static_cast<int>(a);
  const int ib = static_cast<int>(b);
  // X=1, Y=2, Z=3: cyclic order gives +i, anticyclic -i.
  const int ic = 6 - ia - ib;
  const bool cyclic = (ib - ia + 3) % 3 == 1;
  return {static_cast<Pauli>(ic), cyclic ? kI : -kI};
}

// cos and sin, exact when the angle is an integer multiple of pi/2.
std::pair<double, double> exact_cos_sin(double angle) {
  const double q = angle / (std::numbers::pi / 2.0);
  const double k = std::round(q);
  if (std::abs(q - k) < 1e-12) {
    const long m = ((static_cast<long>(k) % 4) + 4) % 4;
    static constexpr double c[4] = {1.0, 0.0, -1.0, 0.0};
    static constexpr double s[4] = {0.0, 1.0, 0.0, -1.0};
    return {c[m], s[m]};
  }
  return {std::cos(angle), std::sin(angle)};
}

// SO(3) matrix of a rotation by `angle` about unit axis n (Rodrigues).
std::array<std::array<double, 3>, 3> rotation_matrix(const std::array<double, 3>& n,
                                                     double angle) {
  const auto [c, s] = exact_cos_sin(angle);
  const double t = 1.0 - c;
  std::array<std::array<double, 3>, 3> m{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m[i][j] = (i == j ? c : 0.0) + t * n[i] * n[j];
  m[0][1] -= s * n[2];
  m[0][2] += s * n[1];
  m[1][0] += s * n[2];
  m[1][2] -= s * n[0];
  m[2][0] -= s * n[1];
  m[2][1] += s * n[0];
  return m;
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::uint64_t bit_of(int spin_count, int site) {
  return std::uint64_t{1} << (spin_count - 1 - site);
}

}  // namespace

char pauli_char(Pauli p) { return "IXYZ"[static_cast<int>(p)]; }

Pauli pauli_from_char(char c) {
  switch (c) {
    case 'I':
      return Pauli::I;
    case 'X':
      return Pauli::X;
    case 'Y':
      return Pauli::Y;
    case 'Z':
      return Pauli::Z;
    default:
      throw ParseError(std::string("invalid Pauli letter '") + c + "'");
  }
}

PauliString::PauliString(Complex c, std::string_view letters) : coefficient(c) {
  ops.reserve(letters.size());
  for (char ch : letters) ops.push_back(pauli_from_char(ch));
}

std::string PauliString::letters() const {
  std::string s;
  s.reserve(ops.size());
  for (Pauli p : ops) s.push_back(pauli_char(p));
  return s;
}

bool PauliString::anticommutes_with(const PauliString& other) const {
  if (ops.size() != other.ops.size()) throw DimensionError("Pauli strings differ in spin count");
  int clashes = 0;
  for (std::size_t i = 0; i < ops.size(); ++i)
    if (ops[i] != Pauli::I && other.ops[i] != Pauli::I && ops[i] != other.ops[i]) ++clashes;
  return clashes % 2 == 1;
}

PauliString multiply(const PauliString& a, const PauliString& b) {
  if (a.ops.size() != b.ops.size())
    throw DimensionError("cannot multiply Pauli strings on " + std::to_string(a.ops.size()) +
                         " and " + std::to_string(b.ops.size()) + " spins");
  PauliString out;
  out.coefficient = a.coefficient * b.coefficient;
  out.ops.resize(a.ops.size());
  for (std::size_t i = 0; i < a.ops.size(); ++i) {
    const auto sp = site_product(a.ops[i], b.ops[i]);
    out.ops[i] = sp.p;
    out.coefficient *= sp.phase;
  }
  return out;
}

// ---------------------------------------------------------------------------
// PauliSum

PauliSum::PauliSum(int spin_count) : spin_count_(spin_count) {
  if (spin_count < 1) throw DimensionError("spin count must be >= 1");
}

PauliSum::PauliSum(const PauliString& s) : PauliSum(s.spin_count()) {
  add(s);
  canonicalize();
}

PauliSum PauliSum::site(int spin_count, int site, Pauli p, Complex coefficient) {
  if (site < 0 || site >= spin_count) throw DimensionError("site index out of range");
  std::string letters(spin_count, 'I');
  letters[site] = pauli_char(p);
  PauliSum s(spin_count);
  s.add(letters, coefficient);
  s.canonicalize();
  return s;
}

PauliSum PauliSum::identity(int spin_count, Complex coefficient) {
  PauliSum s(spin_count);
  s.add(std::string(spin_count, 'I'), coefficient);
  s.canonicalize();
  return s;
}

Complex PauliSum::coefficient(std::string_view letters) const {
  auto it = terms_.find(std::string(letters));
  return it == terms_.end() ? Complex{} : it->second;
}

double PauliSum::max_abs_coefficient() const {
  double m = 0.0;
  for (const auto& [k, c] : terms_) m = std::max(m, std::abs(c));
  return m;
}

void PauliSum::add(const PauliString& s) {
  if (s.spin_count() != spin_count_)
    throw DimensionError("term on " + std::to_string(s.spin_count()) + " spins added to sum on " +
                         std::to_string(spin_count_));
  terms_[s.letters()] += s.coefficient;
}

void PauliSum::add(std::string_view letters, Complex c) { add(PauliString(c, letters)); }

void PauliSum::check_dims(const PauliSum& o) const {
  if (o.spin_count_ != spin_count_)
    throw DimensionError("Pauli sums on " + std::to_string(spin_count_) + " and " +
                         std::to_string(o.spin_count_) + " spins");
}

PauliSum& PauliSum::operator+=(const PauliSum& o) {
  check_dims(o);
  for (const auto& [k, c] : o.terms_) terms_[k] += c;
  canonicalize();
  return *this;
}

PauliSum& PauliSum::operator-=(const PauliSum& o) {
  check_dims(o);
  for (const auto& [k, c] : o.terms_) terms_[k] -= c;
  canonicalize();
  return *this;
}

PauliSum& PauliSum::operator*=(Complex s) {
  for (auto& [k, c] : terms_) c *= s;
  canonicalize();
  return *this;
}

void PauliSum::canonicalize() {
  const double cut = kCanonicalTolerance * max_abs_coefficient();
  for (auto it = terms_.begin(); it != terms_.end();) {
    Complex& c = it->second;
    if (std::abs(c.real()) <= cut) c.real(0.0);
    if (std::abs(c.imag()) <= cut) c.imag(0.0);
    if (c == Complex{}) {
      it = terms_.erase(it);
    } else {
      ++it;
    }
  }
}

bool PauliSum::is_hermitian(double tol) const {
  const double cut = tol * max_abs_coefficient();
  return std::all_of(terms_.begin(), terms_.end(),
                     [cut](const auto& kv) { return std::abs(kv.second.imag()) <= cut; });
}

std::vector<PauliString> PauliSum::strings() const {
  std::vector<PauliString> out;
  out.reserve(terms_.size());
  for (const auto& [k, c] : terms_) out.emplace_back(c, k);
  return out;
}

std::string PauliSum::to_string() const {
  if (terms_.empty()) return "0";
  std::string out;
  for (const auto& [k, c] : terms_) {
    if (!out.empty()) out += " + ";
    if (c.imag() == 0.0) {
      out += format_double(c.real());
    } else {
      out += "(" + format_double(c.real()) + "," + format_double(c.imag()) + ")";
    }
    out += "*" + k;
  }
  return out;
}

namespace {

class TermParser {
 public:
  explicit TermParser(std::string_view text) : text_(text) {}

  PauliSum parse(int spin_count) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == '0' && rest_is_blank(pos_ + 1)) {
      if (spin_count < 1) throw ParseError("spin count needed to parse the zero operator");
      return PauliSum(spin_count);
    }
    std::vector<PauliString> terms;
    double sign = 1.0;
    while (true) {
      skip_ws();
      PauliString t = term();
      t.coefficient *= sign;
      terms.push_back(std::move(t));
      skip_ws();
      if (pos_ >= text_.size()) break;
      if (text_[pos_] == '+') {
        sign = 1.0;
      } else if (text_[pos_] == '-') {
        sign = -1.0;
      } else {
        fail("expected '+' between terms");
      }
      ++pos_;
    }
    const int n = spin_count > 0 ? spin_count : terms.front().spin_count();
    PauliSum s(n);
    for (const auto& t : terms) {
      if (t.spin_count() != n) fail("terms have inconsistent spin counts");
      s.add(t);
    }
    s.canonicalize();
    return s;
  }

 private:
  PauliString term() {
    Complex coeff{1.0, 0.0};
    if (pos_ < text_.size() && !is_letter(text_[pos_])) {
      if (text_[pos_] == '(') {
        ++pos_;
        const double re = number();
        skip_ws();
        expect(',');
        const double im = number();
        skip_ws();
        expect(')');
        coeff = {re, im};
      } else {
        coeff = number();
      }
      skip_ws();
      expect('*');
      skip_ws();
    }
    std::string letters;
    while (pos_ < text_.size() && is_letter(text_[pos_])) letters.push_back(text_[pos_++]);
    if (letters.empty()) fail("expected Pauli letters");
    return PauliString(coeff, letters);
  }

  double number() {
    skip_ws();
    const char* begin = text_.data() + pos_;
    const char* end = text_.data() + text_.size();
    double v = 0.0;
    if (begin != end && *begin == '+') ++begin;
    auto res = std::from_chars(begin, end, v);
    if (res.ec != std::errc()) fail("expected a number");
    pos_ = static_cast<std::size_t>(res.ptr - text_.data());
    return v;
  }

  static bool is_letter(char c) { return c == 'I' || c == 'X' || c == 'Y' || c == 'Z'; }

  bool rest_is_blank(std::size_t from) const {
    for (std::size_t i = from; i < text_.size(); ++i)
      if (!std::isspace(static_cast<unsigned char>(text_[i]))) return false;
    return true;
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  void expect(char c) {
    if (pos_ >= text_.size() || text_[pos_] != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(what + " at column " + std::to_string(pos_ + 1) + " in \"" +
                     std::string(text_) + "\"");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

PauliSum PauliSum::parse(std::string_view text, int spin_count) {
  return TermParser(text).parse(spin_count);
}

PauliSum operator+(PauliSum a, const PauliSum& b) { return a += b; }
PauliSum operator-(PauliSum a, const PauliSum& b) { return a -= b; }
PauliSum operator*(PauliSum a, Complex s) { return a *= s; }
PauliSum operator*(Complex s, PauliSum a) { return a *= s; }

PauliSum operator*(const PauliSum& a, const PauliSum& b) {
  if (a.spin_count() != b.spin_count()) throw DimensionError("Pauli sums differ in spin count");
  PauliSum out(a.spin_count());
  const auto sa = a.strings();
  const auto sb = b.strings();
  for (const auto& x : sa)
    for (const auto& y : sb) out.add(multiply(x, y));
  out.canonicalize();
  return out;
}

PauliSum commutator(const PauliSum& a, const PauliSum& b) {
  if (a.spin_count() != b.spin_count()) throw DimensionError("Pauli sums differ in spin count");
  PauliSum out(a.spin_count());
  const auto sa = a.strings();
  const auto sb = b.strings();
  for (const auto& x : sa) {
    for (const auto& y : sb) {
      if (!x.anticommutes_with(y)) continue;
      PauliString p = multiply(x, y);
      p.coefficient *= 2.0;
      out.add(p);
    }
  }
  out.canonicalize();
  return out;
}

double max_coefficient_distance(const PauliSum& a, const PauliSum& b) {
  if (a.spin_count() != b.spin_count()) throw DimensionError("Pauli sums differ in spin count");
  double d = 0.0;
  for (const auto& [k, c] : a.terms()) d = std::max(d, std::abs(c - b.coefficient(k)));
  for (const auto& [k, c] : b.terms())
    if (a.terms().find(k) == a.terms().end()) d = std::max(d, std::abs(c));
  return d;
}

// ---------------------------------------------------------------------------
// Rotations

GlobalRotation GlobalRotation::y(double angle) {
  return {-std::numbers::pi / 2.0, false, angle};
}

std::array<double, 3> GlobalRotation::axis() const {
  if (polar) return {0.0, 0.0, 1.0};
  const auto [c, s] = exact_cos_sin(axis_phase);
  return {c, -s, 0.0};
}

bool GlobalRotation::same_axis(const GlobalRotation& o) const {
  const auto a = axis();
  const auto b = o.axis();
  return std::abs(a[0] - b[0]) < 1e-12 && std::abs(a[1] - b[1]) < 1e-12 &&
         std::abs(a[2] - b[2]) < 1e-12;
}

bool GlobalRotation::is_identity() const {
  const double m = std::fmod(std::abs(angle), 4.0 * std::numbers::pi);
  return m < 1e-12 || 4.0 * std::numbers::pi - m < 1e-12;
}

Eigen::Matrix2cd GlobalRotation::matrix() const {
  const auto n = axis();
  const auto [c, s] = exact_cos_sin(angle / 2.0);
  Eigen::Matrix2cd m;
  // exp(-i a n.sigma/2) = cos(a/2) I - i sin(a/2) n.sigma
  m(0, 0) = Complex(c, -s * n[2]);
  m(1, 1) = Complex(c, s * n[2]);
  m(0, 1) = -kI * s * Complex(n[0], -n[1]);
  m(1, 0) = -kI * s * Complex(n[0], n[1]);
  return m;
}

GlobalRotation compose_same_axis(const GlobalRotation& a, const GlobalRotation& b) {
  if (!a.same_axis(b)) throw PreconditionError("rotations do not share an axis");
  GlobalRotation out = a;
  out.angle = std::fmod(a.angle + b.angle, 4.0 * std::numbers::pi);
  return out;
}

PauliSum conjugate(const PauliSum& op, const GlobalRotation& r, bool inverse_frame) {
  // R^dagger sigma_k R = sum_l M_lk sigma_l with M the SO(3) rotation by -angle;
  // R sigma_k R^dagger uses +angle.
  const auto m = rotation_matrix(r.axis(), inverse_frame ? r.angle : -r.angle);
  std::array<std::vector<std::pair<Pauli, double>>, 4> image;
  image[0] = {{Pauli::I, 1.0}};
  for (int k = 0; k < 3; ++k)
    for (int l = 0; l < 3; ++l)
      if (m[l][k] != 0.0) image[k + 1].emplace_back(static_cast<Pauli>(l + 1), m[l][k]);

  PauliSum out(op.spin_count());
  for (const auto& [letters, coeff] : op.terms()) {
    // Cartesian expansion over per-site images.
    std::vector<std::pair<std::string, Complex>> partial{{std::string(), coeff}};
    for (char ch : letters) {
      const auto& img = image[static_cast<int>(pauli_from_char(ch))];
      std::vector<std::pair<std::string, Complex>> next;
      next.reserve(partial.size() * img.size());
      for (const auto& [s, c] : partial)
        for (const auto& [p, w] : img) next.emplace_back(s + pauli_char(p), c * w);
      partial = std::move(next);
    }
    for (const auto& [s, c] : partial) out.add(s, c);
  }
  out.canonicalize();
  return out;
}

Eigen::MatrixXcd to_dense_matrix(const PauliSum& op, int cap) {
  const int n = op.spin_count();
  if (n > cap)
    throw DimensionError("dense matrix requested for " + std::to_string(n) +
                         " spins, cap is " + std::to_string(cap));
  CompiledPauliSum compiled(op, cap);
  const std::size_t dim = std::size_t{1} << n;
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
  std::vector<Complex> col(dim), out(dim);
  for (std::size_t c = 0; c < dim; ++c) {
    std::fill(col.begin(), col.end(), Complex{});
    col[c] = 1.0;
    compiled.apply(col, out);
    for (std::size_t r = 0; r < dim; ++r) m(r, c) = out[r];
  }
  return m;
}

PauliSum from_dense_matrix(const Eigen::MatrixXcd& m) {
  const auto dim = static_cast<std::size_t>(m.rows());
  if (m.cols() != m.rows() || dim < 2 || !std::has_single_bit(dim))
    throw DimensionError("matrix is not 2^N square");
  const int n = std::countr_zero(dim);
  if (n > 8) throw DimensionError("Pauli decomposition capped at 8 spins");
  PauliSum out(n);
  std::size_t total = std::size_t{1} << (2 * n);
  std::string letters(n, 'I');
  for (std::size_t code = 0; code < total; ++code) {
    std::uint64_t flip = 0, sign = 0;
    int ny = 0;
    for (int s = 0; s < n; ++s) {
      const int p = static_cast<int>((code >> (2 * (n - 1 - s))) & 3u);
      letters[s] = "IXYZ"[p];
      const std::uint64_t b = bit_of(n, s);
      if (p == 1 || p == 2) flip |= b;
      if (p == 2 || p == 3) sign |= b;
      if (p == 2) ++ny;
    }
    Complex phase0 = std::pow(kI, ny);
    Complex tr{};
    for (std::size_t col = 0; col < dim; ++col) {
      // P|col> = phase(col) |col ^ flip>, so Tr(P M) = sum_col phase(col) M(col, col ^ flip)
      const double sgn = (std::popcount(col & sign) & 1) ? -1.0 : 1.0;
      tr += phase0 * sgn * m(static_cast<Eigen::Index>(col),
                             static_cast<Eigen::Index>(col ^ flip));
    }
    out.add(letters, tr / static_cast<double>(dim));
  }
  out.canonicalize();
  return out;
}

Eigen::MatrixXcd global_rotation_matrix(const GlobalRotation& r, int spin_count, int cap) {
  if (spin_count > cap) throw DimensionError("global rotation matrix exceeds dense cap");
  const Eigen::Matrix2cd u = r.matrix();
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Identity(1, 1);
  for (int s = 0; s < spin_count; ++s) {
    Eigen::MatrixXcd next(out.rows() * 2, out.cols() * 2);
    for (Eigen::Index i = 0; i < out.rows(); ++i)
      for (Eigen::Index j = 0; j < out.cols(); ++j) next.block(2 * i, 2 * j, 2, 2) = out(i, j) * u;
    out = std::move(next);
  }
  return out;
}

// ---------------------------------------------------------------------------
// CompiledPauliSum

CompiledPauliSum::CompiledPauliSum(const PauliSum& op, int cap) : spin_count_(op.spin_count()) {
  if (spin_count_ > cap) throw DimensionError("operator exceeds the state-vector cap");
  std::map<std::uint64_t, Group> groups;
  for (const auto& [letters, coeff] : op.terms()) {
    Term t{0, 0, coeff};
    int ny = 0;
    for (int s = 0; s < spin_count_; ++s) {
      const std::uint64_t b = bit_of(spin_count_, s);
      switch (letters[s]) {
        case 'X':
          t.flip |= b;
          break;
        case 'Y':
          t.flip |= b;
          t.sign |= b;
          ++ny;
          break;
        case 'Z':
          t.sign |= b;
          break;
        default:
          break;
      }
    }
    t.factor *= std::pow(kI, ny);
    Group& g = groups[t.flip];
    g.flip = t.flip;
    g.terms.push_back(t);
  }
  const std::size_t dim = dimension();
  std::size_t budget = std::size_t{1} << 25;
  for (auto& [flip, g] : groups) {
    if (g.terms.size() > 1 && dim <= budget) {
      budget -= dim;
      g.diagonal.assign(dim, Complex{});
      for (const Term& t : g.terms)
        for (std::size_t c = 0; c < dim; ++c)
          g.diagonal[c] += (std::popcount(c & t.sign) & 1) ? -t.factor : t.factor;
    }
    groups_.push_back(std::move(g));
  }
}

void CompiledPauliSum::apply(std::span<const Complex> in, std::span<Complex> out,
                             double scale) const {
  std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(dimension()), Complex{});
  apply_add(in, out, scale);
}

void CompiledPauliSum::apply_add(std::span<const Complex> in, std::span<Complex> out,
                                 double scale) const {
  const std::size_t dim = dimension();
  for (const Group& g : groups_) {
    if (!g.diagonal.empty()) {
      for (std::size_t c = 0; c < dim; ++c) out[c ^ g.flip] += scale * g.diagonal[c] * in[c];
      continue;
    }
    for (const Term& t : g.terms) {
      const Complex f = t.factor * scale;
      const Complex nf = -f;
      for (std::size_t c = 0; c < dim; ++c)
        out[c ^ t.flip] += ((std::popcount(c & t.sign) & 1) ? nf : f) * in[c];
    }
  }
}

double CompiledPauliSum::expectation(std::span<const Complex> state) const {
  const std::size_t dim = dimension();
  Complex acc{};
  for (const Group& g : groups_) {
    for (const Term& t : g.terms) {
      Complex partial{};
      for (std::size_t c = 0; c < dim; ++c) {
        const double sgn = (std::popcount(c & t.sign) & 1) ? -1.0 : 1.0;
        partial += std::conj(state[c ^ t.flip]) * sgn * state[c];
      }
      acc += t.factor * partial;
    }
  }
  return acc.real();
}

}  // namespace pulseforge
