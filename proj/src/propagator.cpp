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

#include "pulseforge/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

#include "pulseforge/error.hpp"
#include "pulseforge/log.hpp"

namespace pulseforge {

using Complex = std::complex<double>;

namespace {

constexpr double kPi = std::numbers::pi;

std::size_t ipow(std::size_t base, int exp) {
  std::size_t r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

double sinc(double x) { return std::abs(x) < 1e-8 ? 1.0 - x * x / 6.0 : std::sin(x) / x; }

}  // namespace

// ---------------------------------------------------------------------------
// SpinPhononState

SpinPhononState::SpinPhononState(int spin_count, int mode_count, int n_max)
    : spins_(spin_count), modes_(mode_count), n_max_(n_max) {
  if (spin_count < 1 || mode_count < 0 || n_max < 0) throw PreconditionError("invalid register sizes");
  phonon_dim_ = ipow(static_cast<std::size_t>(n_max) + 1, mode_count);
  amp_.assign((std::size_t{1} << spin_count) * phonon_dim_, Complex{});
}

SpinPhononState SpinPhononState::product(const Eigen::VectorXcd& spins, int mode_count, int n_max,
                                         const std::vector<int>& fock) {
  const auto dim = static_cast<std::size_t>(spins.size());
  if (dim < 2 || (dim & (dim - 1)) != 0) throw DimensionError("spin state length is not 2^N");
  int n = 0;
  while ((std::size_t{1} << n) < dim) ++n;
  SpinPhononState st(n, mode_count, n_max);
  std::size_t m = 0;
  for (int k = 0; k < mode_count; ++k) {
    const int occ = k < static_cast<int>(fock.size()) ? fock[k] : 0;
    if (occ < 0 || occ > n_max) throw PreconditionError("initial Fock state exceeds the cutoff");
    m += static_cast<std::size_t>(occ) * st.stride(k);
  }
  for (std::size_t s = 0; s < dim; ++s) st.amp_[s * st.phonon_dim_ + m] = spins(static_cast<Eigen::Index>(s));
  return st;
}

std::size_t SpinPhononState::stride(int mode) const {
  return ipow(static_cast<std::size_t>(n_max_) + 1, modes_ - 1 - mode);
}

int SpinPhononState::occupation(std::size_t m, int mode) const {
  return static_cast<int>((m / stride(mode)) % (static_cast<std::size_t>(n_max_) + 1));
}

double SpinPhononState::norm() const {
  double acc = 0.0;
  for (const auto& a : amp_) acc += std::norm(a);
  return std::sqrt(acc);
}

SpinObservables SpinPhononState::spin_observables() const {
  return measure_spins(amp_.data(), spins_, phonon_dim_);
}

std::vector<double> SpinPhononState::mean_phonons() const {
  std::vector<double> out(modes_, 0.0);
  for (std::size_t s = 0; s < spin_dim(); ++s)
    for (std::size_t m = 0; m < phonon_dim_; ++m) {
      const double p = std::norm(amp_[s * phonon_dim_ + m]);
      if (p == 0.0) continue;
      for (int k = 0; k < modes_; ++k) out[k] += p * occupation(m, k);
    }
  return out;
}

std::vector<double> SpinPhononState::top_level_population() const {
  std::vector<double> out(modes_, 0.0);
  for (std::size_t s = 0; s < spin_dim(); ++s)
    for (std::size_t m = 0; m < phonon_dim_; ++m) {
      const double p = std::norm(amp_[s * phonon_dim_ + m]);
      for (int k = 0; k < modes_; ++k)
        if (occupation(m, k) == n_max_) out[k] += p;
    }
  return out;
}

std::vector<double> SpinPhononState::spin_populations() const {
  std::vector<double> out(spin_dim(), 0.0);
  for (std::size_t s = 0; s < spin_dim(); ++s)
    for (std::size_t m = 0; m < phonon_dim_; ++m) out[s] += std::norm(amp_[s * phonon_dim_ + m]);
  return out;
}

// ---------------------------------------------------------------------------
// DriveProgram

void DriveProgram::add_ms_window(double start, double stop, const PulseShape& shape,
                                 const ToneConfig& t) {
  ToneWindow w;
  w.start = start;
  w.stop = stop;
  w.shape = shape;
  w.shape.duration = stop - start;
  w.tones.push_back({t.rabi_1, t.mu, t.phase_1, 0, true});
  w.tones.push_back({t.rabi_2, -t.mu, t.phase_2, 1, true});
  windows.push_back(std::move(w));
  duration = std::max(duration, stop);
}

void DriveProgram::add_carrier(double start, double length, const GlobalRotation& rotation) {
  if (rotation.polar) throw UnsupportedShapeError("a carrier cannot drive a z rotation");
  if (!(length > 0.0)) throw PreconditionError("carrier length must be > 0");
  ToneWindow w;
  w.start = start;
  w.stop = start + length;
  w.shape = PulseShape::flat(length);
  double phase = rotation.axis_phase;
  if (rotation.angle < 0.0) phase += kPi;
  w.tones.push_back({std::abs(rotation.angle) / length, 0.0, phase, -1, false});
  windows.push_back(std::move(w));
  duration = std::max(duration, start + length);
}

void DriveProgram::validate() const {
  if (!(dt > 0.0)) throw PreconditionError("integrator step must be > 0");
  for (const auto& w : windows) {
    if (!(w.stop >= w.start) || w.start < 0.0) throw PreconditionError("tone window has negative length");
    w.shape.validate();
  }
  std::vector<double> instants;
  for (const auto& r : rotations) instants.push_back(r.time);
  std::sort(instants.begin(), instants.end());
  for (std::size_t k = 1; k < instants.size(); ++k)
    if (instants[k] == instants[k - 1]) throw PreconditionError("two rotations share one instant");
  for (std::size_t k = 0; k + 1 < phase_laws.size(); ++k) {
    const double gap = std::abs(phase_laws[k](phase_laws[k].end) - phase_laws[k + 1](phase_laws[k + 1].start));
    if (gap > 1e-9) throw PreconditionError("phase laws are discontinuous");
  }
}

DriveProgram program_from_sequence(const PulseSequence& seq, const ToneConfig& tones,
                                   const ProgramOptions& options) {
  DriveProgram p;
  const int n = seq.spin_count();
  // Spin phase per segment from its coupling axis.
  std::vector<double> spin_phase;
  for (const auto& st : seq.steps()) {
    char axis = 0;
    for (const auto& [letters, c] : st.segment.hamiltonian.terms()) {
      int count = 0;
      char a = 0;
      for (char l : letters)
        if (l != 'I') {
          ++count;
          if (a && a != l) a = '?';
          else a = l;
        }
      if (count != 2 || (a != 'X' && a != 'Y') || (axis && axis != a))
        throw UnsupportedShapeError("full spin-phonon engine needs pure XX or YY segments");
      axis = a;
    }
    if (!axis) throw UnsupportedShapeError("segment without couplings");
    spin_phase.push_back(axis == 'X' ? 0.0 : -kPi / 2);
  }
  (void)n;
  double t = options.t0;
  for (int c = 0; c < options.cycles; ++c) {
    for (std::size_t k = 0; k < seq.steps().size(); ++k) {
      const auto& st = seq.steps()[k];
      ToneConfig tk = tones;
      tk.phase_1 = tk.phase_2 = spin_phase[k] - kPi / 2;
      const PulseShape shape = st.segment.envelope ? *st.segment.envelope : PulseShape::flat(st.segment.duration);
      p.add_ms_window(t, t + st.segment.duration, shape, tk);
      t += st.segment.duration;
      if (!st.pulse.rotation.is_identity()) {
        if (options.shaped_rotations && st.pulse.duration > 0.0)
          p.add_carrier(t, st.pulse.duration, st.pulse.rotation);
        else
          p.rotations.push_back({t, st.pulse.rotation});
      }
      t += st.pulse.duration;
    }
  }
  p.duration = t;
  if (options.frame_bz != 0.0)
    p.phase_laws = rotating_frame_phase_schedule(seq, options.frame_bz, options.t0, options.cycles);
  p.validate();
  return p;
}

// ---------------------------------------------------------------------------
// SpinPhononPropagator

SpinPhononPropagator::SpinPhononPropagator(ModeStructure modes, double eta, int n_max,
                                           PropagatorOptions options)
    : modes_(std::move(modes)), eta_(eta), n_max_(n_max), opts_(options) {
  if (n_max < 1) throw PreconditionError("phonon cutoff must be >= 1");
  for (int k = 0; k < modes_.mode_count(); ++k) active_.push_back(k);
}

void SpinPhononPropagator::select_modes(const std::vector<int>& modes) {
  for (int k : modes)
    if (k < 0 || k >= modes_.mode_count()) throw PreconditionError("mode index out of range");
  active_ = modes;
  std::sort(active_.begin(), active_.end());
  dropped_.clear();
  for (int k = 0; k < modes_.mode_count(); ++k)
    if (!std::binary_search(active_.begin(), active_.end(), k)) dropped_.push_back(k);
}

std::vector<int> SpinPhononPropagator::drop_far_modes(const ToneConfig& tones) {
  if (opts_.mode_drop_factor <= 0.0) return {};
  const double limit = opts_.mode_drop_factor * eta_ * std::max(tones.rabi_1, tones.rabi_2);
  std::vector<int> keep;
  for (int k = 0; k < modes_.mode_count(); ++k)
    if (std::abs(std::abs(tones.mu) - modes_.frequencies(k)) <= limit) keep.push_back(k);
  if (keep.empty()) keep.push_back(0);
  select_modes(keep);
  return dropped_;
}

SpinPhononState SpinPhononPropagator::initial_state(const Eigen::VectorXcd& spins,
                                                    const std::vector<int>& fock) const {
  return SpinPhononState::product(spins, static_cast<int>(active_.size()), n_max_, fock);
}

namespace {

struct Ladder {
  std::size_t from;
  std::size_t to;
  double amp;
};

class HamiltonianAssembly {
 public:
  HamiltonianAssembly(const ModeStructure& modes, const std::vector<int>& active, double eta,
                      int spins, const SpinPhononState& layout)
      : eta_(eta), spins_(spins), pdim_(layout.phonon_dim()) {
    const auto m = active.size();
    freq_.resize(m);
    b_.assign(static_cast<std::size_t>(spins), std::vector<double>(m));
    lower_.resize(m);
    for (std::size_t k = 0; k < m; ++k) {
      freq_[k] = modes.frequencies(active[k]);
      for (int j = 0; j < spins; ++j) b_[j][k] = modes.amplitudes(active[k], j);
      const std::size_t stride = layout.stride(static_cast<int>(k));
      for (std::size_t p = 0; p < pdim_; ++p) {
        const int n = layout.occupation(p, static_cast<int>(k));
        if (n > 0) lower_[k].push_back({p, p - stride, std::sqrt(static_cast<double>(n))});
      }
    }
    a_.assign(static_cast<std::size_t>(spins), std::vector<Complex>(m));
    ad_.assign(static_cast<std::size_t>(spins), std::vector<Complex>(m));
    alpha_.resize(m);
    beta_.resize(m);
  }

  void reset() {
    c_ = 0.0;
    std::fill(alpha_.begin(), alpha_.end(), Complex{});
    std::fill(beta_.begin(), beta_.end(), Complex{});
  }

  // Adds a tone of amplitude Omega/2 and phase theta(t) = -lambda t + const at the step midpoint.
  void add_tone(double half_rabi, double theta_mid, double lambda, double t_mid, double h, bool average) {
    auto weight = [&](double freq) { return average ? sinc(0.5 * freq * h) : 1.0; };
    c_ += half_rabi * std::polar(1.0, theta_mid) * weight(lambda);
    for (std::size_t k = 0; k < freq_.size(); ++k) {
      const double w = freq_[k];
      alpha_[k] += Complex(0.0, half_rabi * eta_) * std::polar(1.0, theta_mid - w * t_mid) * weight(lambda + w);
      beta_[k] += Complex(0.0, half_rabi * eta_) * std::polar(1.0, theta_mid + w * t_mid) * weight(lambda - w);
    }
  }

  void finalize() {
    for (int j = 0; j < spins_; ++j)
      for (std::size_t k = 0; k < freq_.size(); ++k) {
        a_[j][k] = b_[j][k] * alpha_[k];
        ad_[j][k] = b_[j][k] * beta_[k];
      }
  }

  // out = H in.
  void apply(const Complex* in, Complex* out) const {
    const std::size_t sdim = std::size_t{1} << spins_;
    std::fill(out, out + sdim * pdim_, Complex{});
    for (std::size_t s = 0; s < sdim; ++s) {
      for (int j = 0; j < spins_; ++j) {
        const std::size_t bit = std::size_t{1} << (spins_ - 1 - j);
        if (!(s & bit)) continue;
        const std::size_t up = s ^ bit;
        // sigma+_j X_j: down block s -> up block; and the adjoint back.
        const Complex* vin_down = in + s * pdim_;
        const Complex* vin_up = in + up * pdim_;
        Complex* vout_up = out + up * pdim_;
        Complex* vout_down = out + s * pdim_;
        const Complex cc = std::conj(c_);
        for (std::size_t p = 0; p < pdim_; ++p) {
          vout_up[p] += c_ * vin_down[p];
          vout_down[p] += cc * vin_up[p];
        }
        for (std::size_t k = 0; k < freq_.size(); ++k) {
          const Complex ak = a_[j][k], adk = ad_[j][k];
          const Complex akc = std::conj(ak), adkc = std::conj(adk);
          for (const Ladder& l : lower_[k]) {
            // a: |n> -> sqrt(n)|n-1>, a+: |n-1> -> sqrt(n)|n>
            vout_up[l.to] += ak * l.amp * vin_down[l.from];
            vout_up[l.from] += adk * l.amp * vin_down[l.to];
            // Adjoint: conj(ak) a+ + conj(adk) a
            vout_down[l.from] += akc * l.amp * vin_up[l.to];
            vout_down[l.to] += adkc * l.amp * vin_up[l.from];
          }
        }
      }
    }
  }

 private:
  double eta_;
  int spins_;
  std::size_t pdim_;
  std::vector<double> freq_;
  std::vector<std::vector<double>> b_;
  std::vector<std::vector<Ladder>> lower_;
  Complex c_{};
  std::vector<Complex> alpha_, beta_;
  std::vector<std::vector<Complex>> a_, ad_;
};

Eigen::MatrixXcd displacement(Complex alpha, int n_max) {
  const int d = n_max + 1;
  Eigen::MatrixXcd gen = Eigen::MatrixXcd::Zero(d, d);
  for (int n = 1; n < d; ++n) {
    const double s = std::sqrt(static_cast<double>(n));
    gen(n, n - 1) += alpha * s;
    gen(n - 1, n) -= std::conj(alpha) * s;
  }
  return gen.exp();
}

void apply_mode_operator(SpinPhononState& st, int mode, const Eigen::MatrixXcd& u) {
  const std::size_t stride = st.stride(mode);
  const std::size_t d = static_cast<std::size_t>(st.n_max()) + 1;
  const std::size_t block = stride * d;
  std::vector<Complex> tmp(d);
  Complex* a = st.data();
  for (std::size_t base = 0; base < st.size(); base += block) {
    for (std::size_t off = 0; off < stride; ++off) {
      for (std::size_t n = 0; n < d; ++n) tmp[n] = a[base + off + n * stride];
      for (std::size_t n = 0; n < d; ++n) {
        Complex acc{};
        for (std::size_t q = 0; q < d; ++q) acc += u(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(q)) * tmp[q];
        a[base + off + n * stride] = acc;
      }
    }
  }
}

}  // namespace

PropagationResult SpinPhononPropagator::evolve(SpinPhononState& state, const DriveProgram& program,
                                               const NoiseRealization* noise,
                                               const std::vector<double>& sample_times) const {
  program.validate();
  if (state.mode_count() != static_cast<int>(active_.size()) || state.n_max() != n_max_)
    throw DimensionError("state register does not match the propagator's modes");
  const int spins = state.spin_count();
  if (modes_.ion_count() != spins) throw DimensionError("state spin count differs from the ion count");

  PropagationResult res;
  res.dropped_modes = dropped_;
  HamiltonianAssembly ham(modes_, active_, eta_, spins, state);
  KrylovPropagator krylov(state.size(), opts_.krylov);

  // Heating kicks on dropped modes have nowhere to act.
  std::vector<std::pair<double, const HeatingKick*>> kicks;
  std::vector<int> kick_mode;
  if (noise) {
    for (const auto& k : noise->kicks) {
      if (k.time > program.duration + 1e-12) continue;
      auto it = std::find(active_.begin(), active_.end(), k.mode);
      if (it == active_.end()) throw PreconditionError("heating target mode is not in the register");
      kicks.emplace_back(k.time, &k);
    }
  }

  // Event times.
  std::vector<double> events = {0.0, program.duration};
  for (const auto& w : program.windows) {
    events.push_back(w.start);
    events.push_back(w.stop);
  }
  for (const auto& r : program.rotations) events.push_back(r.time);
  for (const auto& k : kicks) events.push_back(k.first);
  for (double t : sample_times) {
    if (t < 0.0 || t > program.duration + 1e-12) throw PreconditionError("sample time outside the program");
    events.push_back(t);
  }
  for (const auto& l : program.phase_laws) {
    events.push_back(l.start);
    events.push_back(l.end);
  }
  std::sort(events.begin(), events.end());
  std::vector<double> ev;
  for (double t : events)
    if (t <= program.duration + 1e-12 && (ev.empty() || t - ev.back() > 1e-13)) ev.push_back(t);

  auto same = [](double a, double b) { return std::abs(a - b) <= 1e-13; };
  std::vector<double> samples = sample_times;
  std::sort(samples.begin(), samples.end());
  std::size_t next_sample = 0, next_kick = 0;
  std::vector<TimedRotation> rots = program.rotations;
  std::sort(rots.begin(), rots.end(), [](const auto& a, const auto& b) { return a.time < b.time; });
  std::size_t next_rot = 0;
  std::sort(kicks.begin(), kicks.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

  const double offset = noise ? noise->detuning_offset : 0.0;
  auto record = [&](double t) {
    const double nrm = state.norm();
    if (!std::isfinite(nrm)) throw ConvergenceError("state norm is not finite");
    res.max_norm_drift = std::max(res.max_norm_drift, std::abs(nrm - 1.0));
    res.times.push_back(t);
    res.spins.push_back(state.spin_observables());
    std::vector<double> nbar(modes_.mode_count(), 0.0);
    const auto local = state.mean_phonons();
    for (std::size_t k = 0; k < active_.size(); ++k) nbar[active_[k]] = local[k];
    res.mean_phonons.push_back(std::move(nbar));
    res.spin_populations.push_back(state.spin_populations());
    for (double p : state.top_level_population()) res.max_top_level_population = std::max(res.max_top_level_population, p);
  };

  const Matvec mv = [&](const Complex* in, Complex* out) { ham.apply(in, out); };

  for (std::size_t e = 0; e < ev.size(); ++e) {
    const double t = ev[e];
    while (next_kick < kicks.size() && kicks[next_kick].first <= t + 1e-13) {
      const HeatingKick& k = *kicks[next_kick].second;
      const auto local = static_cast<int>(std::find(active_.begin(), active_.end(), k.mode) - active_.begin());
      apply_mode_operator(state, local, displacement(k.alpha(), n_max_));
      ++next_kick;
    }
    while (next_rot < rots.size() && rots[next_rot].time <= t + 1e-13) {
      GlobalRotation r = rots[next_rot].rotation;
      if (!r.polar) r.axis_phase -= phase_at(program.phase_laws, t);
      apply_global_unitary(state.data(), spins, state.phonon_dim(), r.matrix());
      ++next_rot;
    }
    while (next_sample < samples.size() && (samples[next_sample] <= t + 1e-13 || same(samples[next_sample], t))) {
      record(samples[next_sample]);
      ++next_sample;
    }
    if (e + 1 == ev.size()) break;
    const double a = t, b = ev[e + 1];
    const double mid = 0.5 * (a + b);
    std::vector<const ToneWindow*> live;
    for (const auto& w : program.windows)
      if (w.start <= mid && mid <= w.stop) live.push_back(&w);
    if (live.empty()) continue;
    // Phase law active over this interval (laws are event boundaries).
    double law_slope = 0.0;
    for (const auto& l : program.phase_laws)
      if (l.start <= mid && mid <= l.end) law_slope = l.slope;
    const auto nsteps = std::max<long>(1, static_cast<long>(std::ceil((b - a) / program.dt - 1e-9)));
    const double h = (b - a) / static_cast<double>(nsteps);
    for (long s = 0; s < nsteps; ++s) {
      const double tm = a + (static_cast<double>(s) + 0.5) * h;
      ham.reset();
      const double frame = phase_at(program.phase_laws, tm);
      for (const ToneWindow* w : live) {
        const double env = field_envelope(tm - w->start, w->shape);
        for (const Tone& tone : w->tones) {
          double rabi = tone.rabi * env;
          if (noise && tone.stark_channel >= 0 && !noise->stark[tone.stark_channel].empty())
            rabi *= 1.0 + noise->stark[tone.stark_channel].at(tm);
          double mu = tone.detuning;
          if (tone.detuning_noise && mu != 0.0) mu += (mu > 0.0 ? offset : -offset);
          const double lambda = mu + law_slope;
          const double theta = -mu * tm + tone.phase - frame;
          ham.add_tone(0.5 * rabi, theta, lambda, tm, h, opts_.step_average);
        }
      }
      ham.finalize();
      const KrylovStats ks = krylov.step(mv, h, state.data());
      res.max_krylov_dimension = std::max(res.max_krylov_dimension, ks.dimension);
      ++res.steps;
    }
  }
  const double final_norm = state.norm();
  res.max_norm_drift = std::max(res.max_norm_drift, std::abs(final_norm - 1.0));
  res.norm_drift_exceeded = res.max_norm_drift > opts_.norm_drift_threshold;
  res.truncation_suspect = res.max_top_level_population > opts_.truncation_threshold;
  if (res.truncation_suspect) {
    std::ostringstream os;
    os << "TRUNCATION_SUSPECT: top phonon level population " << res.max_top_level_population;
    warn(os.str());
  }
  if (res.norm_drift_exceeded) warn("norm drift " + std::to_string(res.max_norm_drift) + " exceeds threshold");
  return res;
}

}  // namespace pulseforge
