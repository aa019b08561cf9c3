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

#include "pulseforge/krylov.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "pulseforge/error.hpp"

namespace pulseforge {

using Complex = std::complex<double>;

KrylovPropagator::KrylovPropagator(std::size_t dimension, KrylovOptions options)
    : dim_(dimension), opts_(options) {
  if (opts_.initial_dimension < 1 || opts_.max_dimension < opts_.initial_dimension)
    throw PreconditionError("invalid Krylov dimensions");
}

KrylovStats KrylovPropagator::step(const Matvec& h, double dt, Complex* state) {
  KrylovStats stats;
  for (int budget = opts_.initial_dimension;; budget = std::min(2 * budget, opts_.max_dimension)) {
    if (try_step(h, dt, state, budget, stats)) return stats;
    if (budget == opts_.max_dimension) break;
  }
  // Split the step when even the largest subspace cannot resolve it.
  if (std::abs(dt) < 1e-15) throw ConvergenceError("Krylov step did not converge");
  KrylovStats a = step(h, 0.5 * dt, state);
  KrylovStats b = step(h, 0.5 * dt, state);
  return {std::max(a.dimension, b.dimension), a.error_estimate + b.error_estimate,
          a.substeps + b.substeps};
}

bool KrylovPropagator::try_step(const Matvec& h, double dt, Complex* state, int budget,
                                KrylovStats& stats) {
  const auto m_max = static_cast<std::size_t>(budget);
  if (basis_.size() < m_max + 1) basis_.resize(m_max + 1, std::vector<Complex>(dim_));
  alpha_.assign(m_max, 0.0);
  beta_.assign(m_max, 0.0);

  double norm0 = 0.0;
  for (std::size_t i = 0; i < dim_; ++i) norm0 += std::norm(state[i]);
  norm0 = std::sqrt(norm0);
  if (!std::isfinite(norm0)) throw ConvergenceError("state contains NaN or Inf");
  if (norm0 == 0.0 || dt == 0.0) {
    stats.dimension = 0;
    return true;
  }
  for (std::size_t i = 0; i < dim_; ++i) basis_[0][i] = state[i] / norm0;

  std::size_t m = 0;
  double taylor = 1.0;  // dt^k prod(beta) / k!, the leading error of a k-dimensional subspace
  bool converged = false;
  double hnorm = 0.0;
  for (std::size_t k = 0; k < m_max; ++k) {
    std::vector<Complex>& w = basis_[k + 1];
    h(basis_[k].data(), w.data());
    Complex a{};
    for (std::size_t i = 0; i < dim_; ++i) a += std::conj(basis_[k][i]) * w[i];
    alpha_[k] = a.real();
    // Full reorthogonalisation; subspaces are small.
    for (std::size_t j = 0; j <= k; ++j) {
      Complex c{};
      for (std::size_t i = 0; i < dim_; ++i) c += std::conj(basis_[j][i]) * w[i];
      for (std::size_t i = 0; i < dim_; ++i) w[i] -= c * basis_[j][i];
    }
    double b = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) b += std::norm(w[i]);
    b = std::sqrt(b);
    beta_[k] = b;
    hnorm = std::max(hnorm, std::abs(alpha_[k]) + b);
    m = k + 1;
    taylor *= std::abs(dt) * b / static_cast<double>(k + 1);
    if (b <= 1e-14 * std::max(hnorm, 1e-300)) {  // invariant subspace: exact
      converged = true;
      break;
    }
    if (taylor < opts_.tolerance) {
      converged = true;
      break;
    }
    for (std::size_t i = 0; i < dim_; ++i) w[i] /= b;
  }

  Eigen::VectorXd diag(static_cast<Eigen::Index>(m)), sub(static_cast<Eigen::Index>(m > 1 ? m - 1 : 1));
  for (std::size_t k = 0; k < m; ++k) diag(static_cast<Eigen::Index>(k)) = alpha_[k];
  for (std::size_t k = 0; k + 1 < m; ++k) sub(static_cast<Eigen::Index>(k)) = beta_[k];
  Eigen::VectorXcd y(static_cast<Eigen::Index>(m));
  if (m == 1) {
    y(0) = std::exp(Complex(0.0, -dt * alpha_[0]));
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub.head(static_cast<Eigen::Index>(m - 1)));
    const Eigen::MatrixXd& q = es.eigenvectors();
    Eigen::VectorXcd phase(static_cast<Eigen::Index>(m));
    for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(m); ++k)
      phase(k) = std::exp(Complex(0.0, -dt * es.eigenvalues()(k))) * q(0, k);
    y = q.cast<Complex>() * phase;
  }
  // A posteriori estimate: residual weight on the next basis vector.
  const double post = beta_[m - 1] * std::abs(y(static_cast<Eigen::Index>(m - 1))) * std::abs(dt);
  stats.error_estimate = converged ? std::min(post, taylor) : post;
  stats.dimension = static_cast<int>(m);
  if (!converged && post > opts_.tolerance) return false;

  for (std::size_t i = 0; i < dim_; ++i) {
    Complex acc{};
    for (std::size_t k = 0; k < m; ++k) acc += basis_[k][i] * y(static_cast<Eigen::Index>(k));
    state[i] = norm0 * acc;
  }
  return true;
}

}  // namespace pulseforge
