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

#include "pulseforge/sequence.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "pulseforge/error.hpp"

namespace pulseforge {

namespace {

constexpr double kPi = std::numbers::pi;

void require_couplings(const Eigen::MatrixXd& j) {
  if (j.rows() != j.cols() || j.rows() < 1) throw DimensionError("coupling matrix must be square");
  if ((j - j.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, j.cwiseAbs().maxCoeff()))
    throw PreconditionError("coupling matrix must be symmetric");
  for (Eigen::Index k = 0; k < j.rows(); ++k)
    if (j(k, k) != 0.0) throw PreconditionError("coupling matrix must have a zero diagonal");
}

Segment make_segment(PauliSum h, double t) {
  Segment s;
  s.hamiltonian = std::move(h);
  s.duration = t;
  return s;
}

bool is_pi_about_same_line(const GlobalRotation& a, const GlobalRotation& b) {
  if (a.polar || b.polar) return false;
  auto is_pi = [](double angle) {
    return std::abs(std::abs(std::remainder(angle, 2 * kPi)) - kPi) < 1e-12;
  };
  if (!is_pi(a.angle) || !is_pi(b.angle)) return false;
  return std::abs(std::sin(a.axis_phase - b.axis_phase)) < 1e-12;
}

// Two steps, equal segment lengths, equal pi pulses about one in-plane line.
void require_cpmg_shape(const PulseSequence& seq) {
  const auto& st = seq.steps();
  if (st.size() != 2) throw UnsupportedShapeError("sequence is not a two-segment CPMG cycle");
  if (std::abs(st[0].segment.duration - st[1].segment.duration) >
      1e-12 * st[0].segment.duration)
    throw UnsupportedShapeError("CPMG segments must have equal durations");
  if (std::abs(st[0].pulse.duration - st[1].pulse.duration) > 1e-15)
    throw UnsupportedShapeError("CPMG pulses must have equal durations");
  if (!is_pi_about_same_line(st[0].pulse.rotation, st[1].pulse.rotation))
    throw UnsupportedShapeError("CPMG pulses must be pi rotations about one in-plane axis");
}

}  // namespace

// ---------------------------------------------------------------------------
// PulseSequence

PulseSequence::PulseSequence(std::string name, std::vector<SequenceStep> steps)
    : name_(std::move(name)), steps_(std::move(steps)) {
  validate();
}

void PulseSequence::validate() const {
  if (steps_.empty()) throw PreconditionError("a sequence needs at least one segment");
  const int n = steps_.front().segment.hamiltonian.spin_count();
  for (const auto& s : steps_) {
    if (!(s.segment.duration > 0.0)) throw PreconditionError("segment duration must be > 0");
    if (!(s.pulse.duration >= 0.0)) throw PreconditionError("pulse duration must be >= 0");
    if (s.segment.hamiltonian.spin_count() != n)
      throw DimensionError("segments act on different spin counts");
    if (!s.segment.hamiltonian.is_hermitian())
      throw PreconditionError("segment Hamiltonian is not Hermitian");
    if (s.segment.envelope) s.segment.envelope->validate();
  }
}

int PulseSequence::spin_count() const { return steps_.front().segment.hamiltonian.spin_count(); }

double PulseSequence::cycle_time() const {
  double t = 0.0;
  for (const auto& s : steps_) t += s.segment.duration + s.pulse.duration;
  return t;
}

PulseSequence PulseSequence::without_pulses() const {
  PulseSequence out = *this;
  out.name_ = name_ + "_plain";
  for (auto& s : out.steps_) s.pulse.rotation = GlobalRotation::identity();
  out.symmetries_.clear();
  return out;
}

PulseSequence PulseSequence::with_envelope(const PulseShape& shape) const {
  PulseSequence out = *this;
  for (auto& s : out.steps_) {
    PulseShape e = shape;
    e.duration = s.segment.duration;
    e.validate();
    s.segment.envelope = e;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Frames and averages

Eigen::Matrix2cd pulse_product(const PulseSequence& seq, std::size_t k) {
  Eigen::Matrix2cd m = Eigen::Matrix2cd::Identity();
  for (std::size_t i = 0; i < k && i < seq.steps().size(); ++i)
    m = seq.steps()[i].pulse.rotation.matrix() * m;
  return m;
}

namespace {

PauliSum toggle(PauliSum op, const PulseSequence& seq, std::size_t n) {
  for (std::size_t k = n; k-- > 0;) {
    const auto& r = seq.steps()[k].pulse.rotation;
    if (!r.is_identity()) op = conjugate(op, r);
  }
  return op;
}

}  // namespace

std::vector<PauliSum> toggling_frame(const PulseSequence& seq,
                                     const std::optional<PauliSum>& noise) {
  std::vector<PauliSum> out;
  out.reserve(seq.steps().size());
  for (std::size_t n = 0; n < seq.steps().size(); ++n) {
    const Segment& s = seq.steps()[n].segment;
    PauliSum h = s.hamiltonian;
    if (noise && s.noise_bound) h += *noise;
    out.push_back(toggle(std::move(h), seq, n));
  }
  return out;
}

std::vector<PauliSum> toggled_noise(const PulseSequence& seq, const PauliSum& noise) {
  std::vector<PauliSum> out;
  for (std::size_t n = 0; n < seq.steps().size(); ++n) {
    if (seq.steps()[n].segment.noise_bound)
      out.push_back(toggle(noise, seq, n));
    else
      out.emplace_back(noise.spin_count());
  }
  return out;
}

double effective_duration(const Segment& seg, BetaModel model) {
  if (!seg.envelope) return seg.duration;
  return effective_beta(*seg.envelope, seg.duration, model) * seg.duration;
}

double time_dilution_factor(const PulseSequence& seq, BetaModel model) {
  double acc = 0.0;
  for (const auto& s : seq.steps()) acc += effective_duration(s.segment, model);
  return acc / seq.cycle_time();
}

PauliSum average_hamiltonian(const PulseSequence& seq, const std::optional<PauliSum>& noise,
                             BetaModel model) {
  const auto toggled = toggling_frame(seq, noise);
  PauliSum acc(seq.spin_count());
  const double total = seq.cycle_time();
  for (std::size_t n = 0; n < toggled.size(); ++n)
    acc += toggled[n] * Complex(effective_duration(seq.steps()[n].segment, model) / total);
  acc.canonicalize();
  return acc;
}

// ---------------------------------------------------------------------------
// Validation

double frame_closure_residual(const Eigen::Matrix2cd& product, int spin_count) {
  Complex first = std::abs(product(0, 0)) > 1e-12 ? product(0, 0) : product(0, 1);
  if (std::abs(first) == 0.0) return 2.0;
  const Complex phase = first / std::abs(first);
  Eigen::ComplexEigenSolver<Eigen::Matrix2cd> es(product);
  const Complex l1 = es.eigenvalues()(0) / phase;
  const Complex l2 = es.eigenvalues()(1) / phase;
  double worst = 0.0;
  for (int a = 0; a <= spin_count; ++a)
    worst = std::max(worst, std::abs(std::pow(l1, a) * std::pow(l2, spin_count - a) - 1.0));
  return worst;
}

DecouplingReport validate_decoupling(const PulseSequence& seq, const PauliSum& target,
                                     const PauliSum& noise, const DecouplingOptions& opts) {
  if (!target.is_hermitian() || !noise.is_hermitian())
    throw PreconditionError("target and noise must be Hermitian");
  if (target.spin_count() != seq.spin_count() || noise.spin_count() != seq.spin_count())
    throw DimensionError("target or noise acts on a different spin count");
  DecouplingReport rep;
  rep.strict_target = opts.strict_target;
  const int n = seq.spin_count();

  const Eigen::Matrix2cd product = pulse_product(seq, seq.steps().size());
  rep.frame_closure_residual = frame_closure_residual(product, n);
  for (const auto& sym : seq.closure_symmetries()) {
    const double r = frame_closure_residual(sym.matrix().adjoint() * product, n);
    const bool invariant = max_coefficient_distance(conjugate(target, sym), target) <= opts.tolerance;
    if (invariant && r < rep.frame_closure_residual) {
      rep.frame_closure_residual = r;
      rep.closure_symmetry = sym;
    }
  }
  rep.frame_closure_pass = rep.frame_closure_residual <= opts.tolerance;

  const auto toggled = toggling_frame(seq);
  for (const auto& h : toggled) rep.segment_target_residuals.push_back(max_coefficient_distance(h, target));
  const double scale = time_dilution_factor(seq);
  PauliSum avg = average_hamiltonian(seq);
  rep.average_target_residual = max_coefficient_distance(avg * Complex(1.0 / scale), target);
  if (opts.strict_target) {
    rep.target_pass = std::all_of(rep.segment_target_residuals.begin(),
                                  rep.segment_target_residuals.end(),
                                  [&](double r) { return r <= opts.tolerance; });
  } else {
    rep.target_pass = rep.average_target_residual <= opts.tolerance;
  }

  const double noise_scale = noise.max_abs_coefficient();
  if (noise_scale > 0.0) {
    const auto tn = toggled_noise(seq, noise);
    PauliSum acc(n);
    for (std::size_t k = 0; k < tn.size(); ++k)
      acc += tn[k] * Complex(effective_duration(seq.steps()[k].segment));
    acc.canonicalize();
    rep.noise_residual = acc.max_abs_coefficient() / (seq.cycle_time() * noise_scale);
  }
  rep.noise_pass = rep.noise_residual <= opts.tolerance;
  return rep;
}

std::string DecouplingReport::to_string() const {
  std::ostringstream os;
  auto verdict = [](bool ok) { return ok ? "PASS" : "FAIL"; };
  os << "frame closure:      " << verdict(frame_closure_pass) << "  residual "
     << frame_closure_residual;
  if (closure_symmetry)
    os << "  (up to rotation by " << closure_symmetry->angle << " rad about "
       << (closure_symmetry->polar ? "z" : "an in-plane axis") << ")";
  os << "\n";
  os << "target match:       " << verdict(target_pass) << "  ("
     << (strict_target ? "per segment" : "cycle average") << ")";
  if (strict_target) {
    os << "  residuals";
    for (double r : segment_target_residuals) os << ' ' << r;
  } else {
    os << "  residual " << average_target_residual;
  }
  os << "\n";
  os << "noise cancellation: " << verdict(noise_pass) << "  residual " << noise_residual << "\n";
  os << "overall:            " << verdict(pass()) << "\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Targets and builders

Eigen::MatrixXd power_law_couplings(int spin_count, double j0, double p) {
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(spin_count, spin_count);
  for (int a = 0; a < spin_count; ++a)
    for (int b = 0; b < spin_count; ++b)
      if (a != b) j(a, b) = j0 / std::pow(std::abs(a - b), p);
  return j;
}

PauliSum pair_hamiltonian(const Eigen::MatrixXd& couplings, Pauli p) {
  require_couplings(couplings);
  const int n = static_cast<int>(couplings.rows());
  PauliSum out(n);
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      if (couplings(a, b) == 0.0) continue;
      std::vector<Pauli> ops(n, Pauli::I);
      ops[a] = ops[b] = p;
      out.add(PauliString(couplings(a, b), std::move(ops)));
    }
  }
  out.canonicalize();
  return out;
}

PauliSum uniform_field(int spin_count, Pauli p) {
  PauliSum out(spin_count);
  for (int s = 0; s < spin_count; ++s) out += PauliSum::site(spin_count, s, p);
  return out;
}

PauliSum ising_target(const TargetParams& params) {
  const int n = params.spin_count();
  PauliSum h = pair_hamiltonian(params.couplings, Pauli::X);
  if (params.bx != 0.0) h += uniform_field(n, Pauli::X) * Complex(params.bx);
  if (params.by != 0.0) h += uniform_field(n, Pauli::Y) * Complex(params.by);
  if (params.bz != 0.0) h += uniform_field(n, Pauli::Z) * Complex(params.bz);
  h.canonicalize();
  return h;
}

PauliSum heisenberg_target(const Eigen::MatrixXd& couplings) {
  PauliSum h = pair_hamiltonian(couplings, Pauli::X) + pair_hamiltonian(couplings, Pauli::Y) +
               pair_hamiltonian(couplings, Pauli::Z);
  h *= Complex(1.0 / 3.0);
  return h;
}

PauliSum hs_modified_target(const Eigen::MatrixXd& couplings) {
  PauliSum h = pair_hamiltonian(couplings, Pauli::X) * Complex(2.0) +
               pair_hamiltonian(couplings, Pauli::Y);
  h *= Complex(1.0 / 3.0);
  return h;
}

PulseSequence build_cpmg(const TargetParams& target, double t1, double t_pi,
                         const CpmgOptions& opts) {
  TargetParams second = target;
  if (opts.flip_fields) {
    second.bx = -target.bx;
    second.bz = -target.bz;
  }
  const double first_angle = opts.negative_axis ? -kPi : kPi;
  const double second_angle = opts.alternate_sign ? -first_angle : first_angle;
  std::vector<SequenceStep> steps;
  steps.push_back({make_segment(ising_target(target), t1), {GlobalRotation::y(first_angle), t_pi}});
  steps.push_back({make_segment(ising_target(second), t1), {GlobalRotation::y(second_angle), t_pi}});
  return PulseSequence("cpmg", std::move(steps));
}

PulseSequence build_xy(const TargetParams& target, double t1, double t_pi) {
  static constexpr int kSigns[4][3] = {{1, 1, 1}, {1, -1, -1}, {-1, -1, 1}, {-1, 1, -1}};
  std::vector<SequenceStep> steps;
  for (int k = 0; k < 4; ++k) {
    TargetParams p = target;
    p.bx *= kSigns[k][0];
    p.by *= kSigns[k][1];
    p.bz *= kSigns[k][2];
    const GlobalRotation r = (k % 2 == 0) ? GlobalRotation::x(kPi) : GlobalRotation::y(kPi);
    steps.push_back({make_segment(ising_target(p), t1), {r, t_pi}});
  }
  return PulseSequence("xy", std::move(steps));
}

PulseSequence build_xy2(const Eigen::MatrixXd& couplings, double t1, double t_pi) {
  const PauliSum hxx = pair_hamiltonian(couplings, Pauli::X);
  std::vector<SequenceStep> steps;
  steps.push_back({make_segment(hxx, t1), {GlobalRotation::x(kPi), t_pi}});
  steps.push_back({make_segment(hxx, t1), {GlobalRotation::y(-kPi), t_pi}});
  PulseSequence seq("xy2", std::move(steps));
  seq.add_closure_symmetry(GlobalRotation::z(kPi));
  return seq;
}

namespace {

PulseSequence heisenberg_like(const Eigen::MatrixXd& couplings, double t1, double t_pi,
                              bool keep_quarter_turns, std::string name) {
  const PauliSum hxx = pair_hamiltonian(couplings, Pauli::X);
  const PauliSum hyy = pair_hamiltonian(couplings, Pauli::Y);
  const Pulse quarter_in = keep_quarter_turns ? Pulse{GlobalRotation::y(kPi / 2), t_pi}
                                              : Pulse{GlobalRotation::identity(), 0.0};
  const Pulse quarter_out = keep_quarter_turns ? Pulse{GlobalRotation::y(-kPi / 2), t_pi}
                                               : Pulse{GlobalRotation::identity(), 0.0};
  std::vector<SequenceStep> steps;
  steps.push_back({make_segment(hxx, t1), {GlobalRotation::y(-kPi), t_pi}});
  steps.push_back({make_segment(hyy, t1), quarter_in});
  steps.push_back({make_segment(hxx, t1 / 2), {GlobalRotation::y(kPi), t_pi}});
  steps.push_back({make_segment(hxx, t1 / 2), quarter_out});
  return PulseSequence(std::move(name), std::move(steps));
}

}  // namespace

PulseSequence build_heisenberg(const Eigen::MatrixXd& couplings, double t1, double t_pi) {
  return heisenberg_like(couplings, t1, t_pi, true, "heisenberg");
}

PulseSequence build_hs_modified(const Eigen::MatrixXd& couplings, double t1, double t_pi) {
  return heisenberg_like(couplings, t1, t_pi, false, "hs_modified");
}

// ---------------------------------------------------------------------------
// Magnus terms

MagnusTerms magnus_error(const PulseSequence& seq, const std::function<double(double)>& epsilon,
                         double start) {
  require_cpmg_shape(seq);
  const double t1 = seq.steps()[0].segment.duration;
  const double tpi = seq.steps()[0].pulse.duration;
  // Composite Simpson; t1^2 * fluctuation = integral of (2 tau - t1) eps over the segment
  // after integrating the cumulative term by parts.
  constexpr int kIntervals = 4096;
  auto moments = [&](double a, double& mean, double& fluct) {
    const double h = t1 / kIntervals;
    double s0 = 0.0, s1 = 0.0;
    for (int i = 0; i <= kIntervals; ++i) {
      const double w = (i == 0 || i == kIntervals) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      const double tau = i * h;
      const double e = epsilon(a + tau);
      s0 += w * e;
      s1 += w * (2.0 * tau - t1) * e;
    }
    mean = s0 * h / 3.0 / t1;
    fluct = s1 * h / 3.0 / (t1 * t1);
  };
  MagnusTerms out;
  moments(start, out.mean_a, out.fluctuation_a);
  moments(start + t1 + tpi, out.mean_c, out.fluctuation_c);

  const int n = seq.spin_count();
  const PauliSum s = uniform_field(n, Pauli::Z);
  PauliSum ht = seq.steps()[0].segment.hamiltonian;
  out.first_order = s * Complex(out.mean_a - out.mean_c);
  out.first_order.canonicalize();
  const double c2 = out.mean_a + out.mean_c + out.fluctuation_c - out.fluctuation_a;
  out.second_order = commutator(ht, s) * Complex(0.0, -t1 * c2 / 2.0);
  out.second_order.canonicalize();
  return out;
}

MagnusTerms magnus_error(const PulseSequence& seq, const SampledTrace& epsilon, double start) {
  return magnus_error(seq, [&](double t) { return epsilon.at(t); }, start);
}

// ---------------------------------------------------------------------------
// Rotating-frame schedule

std::vector<PhaseLaw> rotating_frame_phase_schedule(const PulseSequence& seq, double bz,
                                                    double t0, int cycles) {
  require_cpmg_shape(seq);
  if (cycles < 1) throw PreconditionError("need at least one cycle");
  const double s = seq.steps()[0].segment.duration + seq.steps()[0].pulse.duration;
  std::vector<PhaseLaw> laws;
  for (int n = 1; n <= cycles; ++n) {
    const double a = t0 + 2.0 * (n - 1) * s;
    const double b = t0 + (2.0 * n - 1) * s;
    const double c = t0 + 2.0 * n * s;
    laws.push_back({a, b, -2.0 * bz, 2.0 * bz * a});
    laws.push_back({b, c, 2.0 * bz, -2.0 * bz * c});
  }
  const double scale = std::max(std::abs(2.0 * bz * seq.cycle_time()), 1e-300);
  for (std::size_t k = 0; k + 1 < laws.size(); ++k) {
    const double left = laws[k](laws[k].end);
    const double right = laws[k + 1](laws[k + 1].start);
    if (std::abs(left - right) > 1e-12 * scale)
      throw PreconditionError("phase schedule is discontinuous at t=" +
                              std::to_string(laws[k].end));
  }
  return laws;
}

double phase_at(const std::vector<PhaseLaw>& laws, double t) {
  auto it = std::upper_bound(laws.begin(), laws.end(), t,
                             [](double v, const PhaseLaw& l) { return v < l.start; });
  if (it == laws.begin()) return 0.0;
  --it;
  if (t > it->end) return 0.0;
  return (*it)(t);
}

}  // namespace pulseforge
