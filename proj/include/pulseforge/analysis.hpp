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

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "pulseforge/pulse_shape.hpp"
#include "pulseforge/sequence.hpp"
#include "pulseforge/spin_state.hpp"

namespace pulseforge {

/** Per-site expectation values over time with ensemble standard errors. */
struct ObservableSeries {
  std::vector<double> times;
  /** values[k][j]: sample k, site j. */
  std::vector<std::vector<double>> values;
  std::vector<std::vector<double>> stderrs;
  int realizations = 1;
  char basis = 'z';

  std::size_t sites() const { return values.empty() ? 0 : values.front().size(); }
  /** Site-averaged value per sample. */
  std::vector<double> mean() const;
  /** Standard error of the site average (sites treated as fully correlated). */
  std::vector<double> mean_stderr() const;
  /** Throws on ragged data, non-increasing times or values outside 1 + 3 stderr. */
  void validate() const;

  /** Builds a series from per-sample observables in the given basis. */
  static ObservableSeries from_observables(const std::vector<double>& times,
                                           const std::vector<SpinObservables>& obs, char basis = 'z');
};

/** Time series of one scalar quantity. */
struct ScalarSeries {
  std::vector<double> times;
  std::vector<double> values;
  std::vector<double> stderrs;
};

enum class FitKind { DampedCosine, Exponential };

struct FitResult {
  FitKind kind = FitKind::DampedCosine;
  double amplitude = 0.0;
  double frequency = 0.0;  ///< Hz, damped cosine only
  double tau = 0.0;        ///< s; infinity when unbounded
  double amplitude_err = 0.0;
  double frequency_err = 0.0;
  double tau_err = 0.0;
  /** Covariance of (A, f, 1/tau) or (I0, 1/tau). */
  Eigen::MatrixXd covariance;
  double residual_norm = 0.0;
  /** Fitted tau exceeds 50 times the data span ("no measurable decay"). */
  bool unbounded_tau = false;
  int starts = 0;

  double f_tau() const { return frequency * tau; }
};

struct FitOptions {
  /** Weight residuals by 1/stderr instead of uniformly. */
  bool weighted = false;
  double unbounded_factor = 50.0;
  /**
   * Expected oscillation frequency (Hz). When positive it seeds additional
   * starts and sets the period used by the sampling check, so that strongly
   * dephased series without a clear spectral line can still be fitted.
   */
  double frequency_hint = 0.0;
};

/** Fits g(t) = A (1 - exp(-t/tau) cos(2 pi f t)) - 1. */
FitResult fit_damped_cosine(const ScalarSeries& series, const FitOptions& options = {});
/** Fits I(t) = I0 exp(-t/tau). */
FitResult fit_exponential_decay(const ScalarSeries& series, const FitOptions& options = {});

/**
 * I(t) = sum_j z_j(t)(1 + p_j) / sum_j (1 + p_j) - sum_j z_j(t)(1 - p_j) / sum_j (1 - p_j)
 * for an initial pattern p in [-1, 1]^N.
 */
ScalarSeries generalized_imbalance(const ObservableSeries& series, const std::vector<double>& pattern);

/** Mean of |J_{j,j+1}| over the first segment's two-body terms. */
double nearest_neighbour_coupling(const PulseSequence& seq);

/** J0bar = beta J0 t1 / (t1 + t_pi) for a two-segment CPMG/XY form. */
double average_hamiltonian_scale(const PulseSequence& seq, double j0,
                                 BetaModel model = BetaModel::Quadrature);
double average_hamiltonian_scale(const PulseSequence& seq, BetaModel model = BetaModel::Quadrature);

/** Rows time_s,observable,site,value,stderr; site "mean" holds the site average. */
std::string series_csv(const std::vector<std::pair<std::string, ObservableSeries>>& series,
                       const std::vector<std::pair<std::string, ScalarSeries>>& scalars = {});
/** Extra row of fits.csv. */
struct FitRow {
  std::string param;
  double value = 0.0;
  double error = 0.0;
};

/** Rows param,value,stderr with parameters prefixed by the fit label; `extra` rows follow. */
std::string fits_csv(const std::vector<std::pair<std::string, FitResult>>& fits,
                     const std::vector<FitRow>& extra = {});

}  // namespace pulseforge
