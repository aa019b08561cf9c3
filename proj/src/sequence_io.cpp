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


#include "pulseforge/sequence_io.hpp"

#include <charconv>
#include <cmath>
#include <iomanip>
#include <map>
#include <numbers>
#include <sstream>

#include "pulseforge/constants.hpp"
#include "pulseforge/error.hpp"
#include "pulseforge/io.hpp"

namespace pulseforge {

using constants::kTwoPi;

Eigen::MatrixXd BuilderSpec::coupling_matrix() const {
  if (couplings) return *couplings;
  if (spins < 2) throw PreconditionError("builders need at least two spins");
  return power_law_couplings(spins, kTwoPi * j0_hz, p);
}

const std::vector<std::string>& builder_names() {
  static const std::vector<std::string> names{"cpmg", "xy", "xy2", "heisenberg", "hs_modified"};
  return names;
}

namespace {

TargetParams ising_params(const BuilderSpec& s) {
  return {s.coupling_matrix(), kTwoPi * s.bx_hz, kTwoPi * s.by_hz, kTwoPi * s.bz_hz};
}

bool has_fields(const BuilderSpec& s) { return s.bx_hz != 0.0 || s.by_hz != 0.0 || s.bz_hz != 0.0; }

}  // namespace

PulseSequence build_named(const BuilderSpec& s) {
  if (s.name == "cpmg") return build_cpmg(ising_params(s), s.t1, s.t_pi);
  if (s.name == "xy") return build_xy(ising_params(s), s.t1, s.t_pi);
  if (has_fields(s)) throw PreconditionError("builder " + s.name + " takes no fields");
  if (s.name == "xy2") return build_xy2(s.coupling_matrix(), s.t1, s.t_pi);
  if (s.name == "heisenberg") return build_heisenberg(s.coupling_matrix(), s.t1, s.t_pi);
  if (s.name == "hs_modified") return build_hs_modified(s.coupling_matrix(), s.t1, s.t_pi);
  throw PreconditionError("unknown builder '" + s.name + "'");
}

PauliSum builder_target(const BuilderSpec& s) {
  if (s.name == "cpmg" || s.name == "xy") return ising_target(ising_params(s));
  if (s.name == "xy2") return pair_hamiltonian(s.coupling_matrix(), Pauli::X);
  if (s.name == "heisenberg") return heisenberg_target(s.coupling_matrix());
  if (s.name == "hs_modified") return hs_modified_target(s.coupling_matrix());
  throw PreconditionError("unknown builder '" + s.name + "'");
}

PulseSequence drop_pulse(const PulseSequence& seq, std::size_t index) {
  if (index >= seq.steps().size()) throw PreconditionError("pulse index out of range");
  auto steps = seq.steps();
  steps[index].pulse.rotation = GlobalRotation::identity();
  PulseSequence out(seq.name() + "_dropped", steps);
  for (const auto& r : seq.closure_symmetries()) out.add_closure_symmetry(r);
  return out;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

class LineError {
 public:
  explicit LineError(int line) : line_(line) {}
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError("line " + std::to_string(line_) + ": " + msg);
  }

 private:
  int line_;
};

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_words(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

double to_number(const std::string& text, const LineError& where) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) where.fail("'" + text + "' is not a number");
  return v;
}

// key=value words after the keyword.
std::map<std::string, std::string> key_values(const std::vector<std::string>& words, std::size_t first,
                                              const LineError& where) {
  std::map<std::string, std::string> kv;
  for (std::size_t k = first; k < words.size(); ++k) {
    const auto eq = words[k].find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == words[k].size())
      where.fail("expected key=value, got '" + words[k] + "'");
    if (!kv.emplace(words[k].substr(0, eq), words[k].substr(eq + 1)).second)
      where.fail("duplicate key '" + words[k].substr(0, eq) + "'");
  }
  return kv;
}

class Keys {
 public:
  Keys(std::map<std::string, std::string> kv, const LineError& where) : kv_(std::move(kv)), where_(where) {}

  std::optional<double> number(const std::string& key) {
    auto it = kv_.find(key);
    if (it == kv_.end()) return std::nullopt;
    const double v = to_number(it->second, where_);
    kv_.erase(it);
    return v;
  }
  double number(const std::string& key, double fallback) { return number(key).value_or(fallback); }
  double required(const std::string& key) {
    auto v = number(key);
    if (!v) where_.fail("missing " + key);
    return *v;
  }
  std::optional<std::string> text(const std::string& key) {
    auto it = kv_.find(key);
    if (it == kv_.end()) return std::nullopt;
    std::string v = it->second;
    kv_.erase(it);
    return v;
  }
  void finish() const {
    if (!kv_.empty()) where_.fail("unknown key '" + kv_.begin()->first + "'");
  }

 private:
  std::map<std::string, std::string> kv_;
  LineError where_;
};

GlobalRotation parse_rotation(Keys& keys, const LineError& where) {
  const auto axis = keys.text("axis");
  const double angle = keys.required("angle_deg") * kDeg;
  if (axis) {
    if (*axis != "z") where.fail("only axis=z may be named; use phase_deg for equatorial axes");
    if (keys.number("phase_deg")) where.fail("axis=z and phase_deg are exclusive");
    return GlobalRotation::z(angle);
  }
  return {keys.required("phase_deg") * kDeg, false, angle};
}

PauliSum parse_hz(std::string_view text, int spins, const LineError& where) {
  try {
    PauliSum h = PauliSum::parse(trim(text), spins);
    h *= kTwoPi;
    return h;
  } catch (const Error& e) {
    where.fail(e.what());
  }
}

}  // namespace

SequenceFile parse_sequence(std::string_view text) {
  SequenceFile out;
  std::string name = "sequence";
  std::vector<SequenceStep> steps;
  std::vector<GlobalRotation> symmetries;
  std::optional<PulseShape> envelope;
  std::optional<Segment> open;
  int open_line = 0;
  int spins = 0;
  int line_no = 0;

  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const LineError where(line_no);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    // Split off a Pauli expression after ':'.
    std::string_view expr;
    const auto colon = line.find(':');
    if (colon != std::string_view::npos) {
      expr = trim(line.substr(colon + 1));
      line = trim(line.substr(0, colon));
    }
    const auto words = split_words(line);
    const std::string& kw = words[0];
    auto require_no_expr = [&] {
      if (colon != std::string_view::npos) where.fail("'" + kw + "' takes no ':' expression");
    };

    if (kw == "name") {
      require_no_expr();
      if (words.size() != 2) where.fail("expected 'name <label>'");
      name = words[1];
    } else if (kw == "builder") {
      require_no_expr();
      if (words.size() < 2) where.fail("expected 'builder <name> key=value ...'");
      if (out.builder || !steps.empty() || open) where.fail("a builder cannot be combined with other segments");
      BuilderSpec b;
      b.name = words[1];
      Keys keys(key_values(words, 2, where), where);
      b.spins = static_cast<int>(keys.number("n", 2));
      b.j0_hz = keys.number("j0_hz", 1.0);
      b.p = keys.number("p", 1.0);
      b.t1 = keys.number("t1_us", 120.0) * 1e-6;
      b.t_pi = keys.number("t_pi_us", 0.0) * 1e-6;
      b.bx_hz = keys.number("bx_hz", 0.0);
      b.by_hz = keys.number("by_hz", 0.0);
      b.bz_hz = keys.number("bz_hz", 0.0);
      keys.finish();
      try {
        const PulseSequence seq = build_named(b);
        steps = seq.steps();
        symmetries = seq.closure_symmetries();
        if (name == "sequence") name = seq.name();
        out.target = builder_target(b);
      } catch (const ParseError&) {
        throw;
      } catch (const Error& e) {
        where.fail(e.what());
      }
      spins = b.spins;
      out.builder = b;
    } else if (kw == "segment") {
      if (out.builder) where.fail("a builder cannot be combined with other segments");
      if (open) where.fail("segment follows the segment on line " + std::to_string(open_line) + " without a pulse");
      if (expr.empty()) where.fail("segment needs ': <Hamiltonian in Hz>'");
      Keys keys(key_values(words, 1, where), where);
      Segment seg;
      seg.duration = keys.required("t_us") * 1e-6;
      if (seg.duration < 0.0) where.fail("negative duration");
      if (const auto noise = keys.text("noise")) {
        if (*noise != "on" && *noise != "off") where.fail("noise must be on or off");
        seg.noise_bound = *noise == "on";
      }
      keys.finish();
      seg.hamiltonian = parse_hz(expr, spins, where);
      if (spins == 0) spins = seg.hamiltonian.spin_count();
      if (seg.hamiltonian.spin_count() != spins) where.fail("spin count differs from earlier lines");
      open = seg;
      open_line = line_no;
    } else if (kw == "pulse") {
      require_no_expr();
      if (out.builder) where.fail("a builder cannot be combined with other pulses");
      if (!open) where.fail("pulse without a preceding segment");
      Pulse pulse;
      if (words.size() == 2 && words[1] == "identity") {
        pulse.rotation = GlobalRotation::identity();
      } else {
        Keys keys(key_values(words, 1, where), where);
        pulse.duration = keys.number("t_us", 0.0) * 1e-6;
        pulse.rotation = parse_rotation(keys, where);
        keys.finish();
      }
      if (pulse.duration < 0.0) where.fail("negative duration");
      steps.push_back({*open, pulse});
      open.reset();
    } else if (kw == "envelope") {
      require_no_expr();
      Keys keys(key_values(words, 1, where), where);
      const double ramp = keys.required("ramp_us") * 1e-6;
      const double exponent = keys.number("exponent", 2.0);
      keys.finish();
      envelope = PulseShape::tukey(ramp, 0.0, exponent);
    } else if (kw == "symmetry") {
      require_no_expr();
      Keys keys(key_values(words, 1, where), where);
      symmetries.push_back(parse_rotation(keys, where));
      keys.finish();
    } else if (kw == "target") {
      if (words.size() != 1 || expr.empty()) where.fail("expected 'target : <Hamiltonian in Hz>'");
      out.target = parse_hz(expr, spins, where);
      if (spins == 0) spins = out.target->spin_count();
    } else {
      where.fail("unknown keyword '" + kw + "'");
    }
  }
  if (open) LineError(open_line).fail("segment has no closing pulse");
  if (steps.empty()) throw ParseError("line " + std::to_string(line_no) + ": no segments");
  if (out.target && out.target->spin_count() != spins) throw ParseError("target spin count differs from the segments");

  try {
    out.sequence = PulseSequence(name, steps);
    for (const auto& r : symmetries) out.sequence.add_closure_symmetry(r);
    if (envelope) out.sequence = out.sequence.with_envelope(*envelope);
  } catch (const Error& e) {
    throw ParseError(std::string("invalid sequence: ") + e.what());
  }
  return out;
}

SequenceFile load_sequence(const std::string& path) {
  try {
    return parse_sequence(read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Formatting

namespace {

std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::string hz_text(const PauliSum& h) {
  PauliSum scaled = h;
  scaled *= 1.0 / kTwoPi;
  return scaled.to_string();
}

std::string rotation_text(const GlobalRotation& r) {
  std::string out = r.polar ? "axis=z" : "phase_deg=" + num(r.axis_phase / kDeg);
  return out + " angle_deg=" + num(r.angle / kDeg);
}

}  // namespace

std::string format_sequence(const PulseSequence& seq, const std::optional<PauliSum>& target) {
  std::ostringstream os;
  os << "name " << seq.name() << "\n";
  std::optional<PulseShape> env;
  for (const auto& st : seq.steps()) {
    if (st.segment.envelope) env = st.segment.envelope;
    os << "segment t_us=" << num(st.segment.duration * 1e6);
    if (!st.segment.noise_bound) os << " noise=off";
    os << " : " << hz_text(st.segment.hamiltonian) << "\n";
    os << "pulse " << rotation_text(st.pulse.rotation) << " t_us=" << num(st.pulse.duration * 1e6) << "\n";
  }
  if (env && env->kind == ShapeKind::Tukey)
    os << "envelope ramp_us=" << num(env->ramp_time * 1e6) << " exponent=" << num(env->intensity_exponent) << "\n";
  for (const auto& r : seq.closure_symmetries()) os << "symmetry " << rotation_text(r) << "\n";
  if (target) os << "target : " << hz_text(*target) << "\n";
  return os.str();
}

}  // namespace pulseforge
