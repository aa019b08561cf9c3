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

#include "pulseforge/ion_chain.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "pulseforge/error.hpp"
#include "pulseforge/io.hpp"
#include "pulseforge/log.hpp"

namespace pulseforge {

void TrapConfig::validate() const {
  if (ion_count < 1) throw PreconditionError("ion count must be >= 1");
  if (!(omega_z > 0.0) || !(omega_xy > omega_z))
    throw PreconditionError("trap frequencies must satisfy omega_xy > omega_z > 0");
}

void ToneConfig::validate() const {
  if (!(eta > 0.0)) throw PreconditionError("Lamb-Dicke parameter must be > 0");
  if (eta > 0.2) warn("Lamb-Dicke parameter " + std::to_string(eta) + " exceeds 0.2");
  if (rabi_1 < 0.0 || rabi_2 < 0.0) throw PreconditionError("Rabi rates must be >= 0");
}

double ToneConfig::spin_phase() const { return 0.5 * (phase_1 + phase_2 + std::numbers::pi); }

double ToneConfig::detuning_hz(const ModeStructure& modes) const {
  return (mu - modes.frequencies(0)) / (2.0 * std::numbers::pi);
}

namespace {

// Energy gradient and Hessian of sum u^2/2 + sum_{i<j} 1/|u_i - u_j|.
void gradient_hessian(const Eigen::VectorXd& u, Eigen::VectorXd& g, Eigen::MatrixXd& h) {
  const auto n = u.size();
  g = u;
  h = Eigen::MatrixXd::Identity(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const double d = u(i) - u(j);
      const double ad = std::abs(d);
      g(i) -= d / (ad * ad * ad);
      const double c = 2.0 / (ad * ad * ad);
      h(i, i) += c;
      h(i, j) -= c;
    }
  }
}

}  // namespace

Eigen::VectorXd equilibrium_positions(int ion_count, int max_iterations) {
  if (ion_count < 1) throw PreconditionError("ion count must be >= 1");
  const int n = ion_count;
  Eigen::VectorXd u(n);
  if (n == 1) {
    u(0) = 0.0;
    return u;
  }
  // Start from an evenly spaced chain with the large-N central spacing.
  const double spacing = 2.0 * std::pow(static_cast<double>(n), -0.56);
  for (int i = 0; i < n; ++i) u(i) = (i - 0.5 * (n - 1)) * spacing;
  Eigen::VectorXd g;
  Eigen::MatrixXd h;
  for (int it = 0; it < max_iterations; ++it) {
    gradient_hessian(u, g, h);
    if (g.norm() < 1e-13) {
      // Enforce the mirror symmetry of the exact solution.
      for (int i = 0; i < n / 2; ++i) {
        const double a = 0.5 * (u(n - 1 - i) - u(i));
        u(i) = -a;
        u(n - 1 - i) = a;
      }
      if (n % 2) u(n / 2) = 0.0;
      return u;
    }
    Eigen::VectorXd step = h.ldlt().solve(-g);
    double scale = 1.0;
    // Keep the ordering intact; the Hessian is positive definite along ordered chains.
    for (;;) {
      Eigen::VectorXd trial = u + scale * step;
      bool ordered = true;
      for (int i = 0; i + 1 < n; ++i) ordered = ordered && trial(i + 1) > trial(i);
      if (ordered) {
        u = trial;
        break;
      }
      scale *= 0.5;
      if (scale < 1e-12) throw ConvergenceError("equilibrium search lost chain ordering");
    }
  }
  throw ConvergenceError("equilibrium positions did not converge");
}

ModeStructure transverse_modes(const TrapConfig& cfg) {
  cfg.validate();
  const int n = cfg.ion_count;
  const Eigen::VectorXd u = equilibrium_positions(n);
  const double ratio2 = (cfg.omega_xy / cfg.omega_z) * (cfg.omega_xy / cfg.omega_z);
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    k(i, i) = ratio2;
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const double c = 1.0 / std::pow(std::abs(u(i) - u(j)), 3);
      k(i, i) -= c;
      k(i, j) = c;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k);
  if (es.info() != Eigen::Success) throw ConvergenceError("mode eigensolver failed");
  ModeStructure m;
  m.frequencies.resize(n);
  m.amplitudes.resize(n, n);
  for (int nu = 0; nu < n; ++nu) {
    const int src = n - 1 - nu;  // eigenvalues ascend
    const double lambda = es.eigenvalues()(src);
    if (!(lambda > 0.0))
      throw PreconditionError("transverse mode frequency is imaginary: zigzag instability");
    m.frequencies(nu) = cfg.omega_z * std::sqrt(lambda);
    Eigen::VectorXd b = es.eigenvectors().col(src);
    for (int j = 0; j < n; ++j) {
      if (std::abs(b(j)) > 1e-8) {
        if (b(j) < 0.0) b = -b;
        break;
      }
    }
    m.amplitudes.row(nu) = b.transpose();
  }
  return m;
}

Eigen::MatrixXd coupling_matrix(const ModeStructure& modes, const ToneConfig& tones,
                                double guard_band) {
  tones.validate();
  const int n = modes.ion_count();
  for (int nu = 0; nu < modes.mode_count(); ++nu) {
    if (std::abs(std::abs(tones.mu) - modes.frequencies(nu)) <= guard_band) {
      std::ostringstream os;
      os << "drive detuning within the guard band of mode " << nu << " ("
         << (std::abs(tones.mu) - modes.frequencies(nu)) / (2 * std::numbers::pi) << " Hz)";
      throw PreconditionError(os.str());
    }
  }
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
  const double pref = tones.eta * tones.eta * tones.rabi_1 * tones.rabi_2;
  for (int nu = 0; nu < modes.mode_count(); ++nu) {
    const double w = modes.frequencies(nu);
    const double c = pref * w / (tones.mu * tones.mu - w * w);
    const Eigen::VectorXd b = modes.amplitudes.row(nu).transpose();
    j += c * b * b.transpose();
  }
  j.diagonal().setZero();
  return 0.5 * (j + j.transpose());
}

PowerLawFit power_law_fit(const Eigen::MatrixXd& couplings) {
  const auto n = couplings.rows();
  if (n < 2 || couplings.cols() != n) throw DimensionError("coupling matrix must be square, N >= 2");
  PowerLawFit fit;
  if (n == 2) {
    fit.j0 = std::abs(couplings(0, 1));
    fit.p = std::numeric_limits<double>::quiet_NaN();
    fit.exponent_defined = false;
    return fit;
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = a + 1; b < n; ++b) {
      const double v = std::abs(couplings(a, b));
      if (v == 0.0) {
        ++fit.excluded_pairs;
        continue;
      }
      const double x = std::log(static_cast<double>(b - a));
      const double y = std::log(v);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++m;
    }
  }
  if (fit.excluded_pairs > 0)
    warn(std::to_string(fit.excluded_pairs) + " zero couplings excluded from the power-law fit");
  const double denom = m * sxx - sx * sx;
  if (m < 2 || denom <= 0.0) throw PreconditionError("power-law fit needs two distinct distances");
  const double slope = (m * sxy - sx * sy) / denom;
  const double intercept = (sy - slope * sx) / m;
  fit.p = -slope;
  fit.j0 = std::exp(intercept);
  return fit;
}

double solve_detuning_for_exponent(const ModeStructure& modes, double eta, double target_p,
                                   double lo, double hi) {
  if (modes.ion_count() < 3) throw PreconditionError("exponent is undefined for fewer than 3 ions");
  ToneConfig t;
  t.eta = eta;
  t.rabi_1 = t.rabi_2 = 1.0;
  auto p_at = [&](double delta) {
    t.mu = modes.frequencies(0) + delta;
    return power_law_fit(coupling_matrix(modes, t)).p;
  };
  double plo = p_at(lo) - target_p;
  double phi = p_at(hi) - target_p;
  if (plo * phi > 0.0) throw ConvergenceError("target exponent not bracketed by the detuning range");
  for (int it = 0; it < 200 && hi - lo > 1e-9 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double pm = p_at(mid) - target_p;
    if ((pm < 0.0) == (plo < 0.0)) {
      lo = mid;
      plo = pm;
    } else {
      hi = mid;
    }
  }
  return modes.frequencies(0) + 0.5 * (lo + hi);
}

double solve_rabi_for_j0(const ModeStructure& modes, ToneConfig tones, double target_j0) {
  if (!(target_j0 > 0.0)) throw PreconditionError("target J0 must be > 0");
  tones.rabi_1 = tones.rabi_2 = 1.0;
  const Eigen::MatrixXd j = coupling_matrix(modes, tones);
  const double unit = modes.ion_count() == 2 ? std::abs(j(0, 1)) : power_law_fit(j).j0;
  return std::sqrt(target_j0 / unit);
}

void write_coupling_csv(const std::string& path, const Eigen::MatrixXd& couplings) {
  std::ostringstream os;
  os.precision(17);
  os << "row,col,value_rad_per_s\n";
  for (Eigen::Index a = 0; a < couplings.rows(); ++a)
    for (Eigen::Index b = 0; b < couplings.cols(); ++b) os << a << ',' << b << ',' << couplings(a, b) << '\n';
  write_file_atomic(path, os.str());
}

}  // namespace pulseforge
