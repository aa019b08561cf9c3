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


#include "pulseforge/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>

#include <unsupported/Eigen/NonLinearOptimization>

#include "pulseforge/error.hpp"

namespace pulseforge {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Residual model in rescaled time s = t / span.
struct Model {
  virtual ~Model() = default;
  virtual int params() const = 0;
  virtual double value(const Eigen::VectorXd& p, double s) const = 0;
  virtual void gradient(const Eigen::VectorXd& p, double s, double* g) const = 0;
};

struct DampedCosine final : Model {
  int params() const override { return 3; }
  double value(const Eigen::VectorXd& p, double s) const override {
    return p(0) * (1.0 - std::exp(-p(2) * s) * std::cos(kTwoPi * p(1) * s)) - 1.0;
  }
  void gradient(const Eigen::VectorXd& p, double s, double* g) const override {
    const double e = std::exp(-p(2) * s);
    const double c = std::cos(kTwoPi * p(1) * s), sn = std::sin(kTwoPi * p(1) * s);
    g[0] = 1.0 - e * c;
    g[1] = p(0) * e * sn * kTwoPi * s;
    g[2] = p(0) * s * e * c;
  }
};

struct Exponential final : Model {
  int params() const override { return 2; }
  double value(const Eigen::VectorXd& p, double s) const override { return p(0) * std::exp(-p(1) * s); }
  void gradient(const Eigen::VectorXd& p, double s, double* g) const override {
    const double e = std::exp(-p(1) * s);
    g[0] = e;
    g[1] = -p(0) * s * e;
  }
};

struct Functor {
  using Scalar = double;
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };

  const Model* model;
  const std::vector<double>* s;
  const std::vector<double>* y;
  const std::vector<double>* w;

  int inputs() const { return model->params(); }
  int values() const { return static_cast<int>(s->size()); }
  int operator()(const Eigen::VectorXd& p, Eigen::VectorXd& f) const {
    for (int k = 0; k < values(); ++k) f(k) = (model->value(p, (*s)[k]) - (*y)[k]) * (*w)[k];
    return 0;
  }
  int df(const Eigen::VectorXd& p, Eigen::MatrixXd& j) const {
    std::vector<double> g(static_cast<std::size_t>(inputs()));
    for (int k = 0; k < values(); ++k) {
      model->gradient(p, (*s)[k], g.data());
      for (int q = 0; q < inputs(); ++q) j(k, q) = g[static_cast<std::size_t>(q)] * (*w)[k];
    }
    return 0;
  }
};

struct Solution {
  Eigen::VectorXd p;
  double rss = kInf;
  Eigen::MatrixXd cov;
};

Solution solve(const Functor& fn, const std::vector<Eigen::VectorXd>& starts, bool absolute_sigma,
               const std::function<bool(const Eigen::VectorXd&)>& admissible = {}) {
  Solution best;
  for (const auto& x0 : starts) {
    Eigen::VectorXd x = x0;
    Functor f = fn;
    Eigen::LevenbergMarquardt<Functor> lm(f);
    lm.parameters.ftol = 1e-15;
    lm.parameters.xtol = 1e-15;
    lm.parameters.maxfev = 4000;
    const auto status = lm.minimize(x);
    if (status == Eigen::LevenbergMarquardtSpace::ImproperInputParameters) continue;
    Eigen::VectorXd r(fn.values());
    fn(x, r);
    const double rss = r.squaredNorm();
    if (!std::isfinite(rss) || !x.allFinite()) continue;
    if (admissible && !admissible(x)) continue;
    if (rss < best.rss) {
      best.p = x;
      best.rss = rss;
    }
  }
  if (!std::isfinite(best.rss)) throw ConvergenceError("least-squares fit did not converge");
  Eigen::MatrixXd jac(fn.values(), fn.inputs());
  fn.df(best.p, jac);
  const Eigen::MatrixXd jtj = jac.transpose() * jac;
  const int dof = fn.values() - fn.inputs();
  const double s2 = absolute_sigma ? 1.0 : (dof > 0 ? best.rss / dof : 0.0);
  best.cov = jtj.completeOrthogonalDecomposition().pseudoInverse() * s2;
  return best;
}

void check_series(const ScalarSeries& s, std::size_t min_samples) {
  if (s.times.size() != s.values.size()) throw DimensionError("series times and values differ in length");
  if (s.times.size() < min_samples)
    throw PreconditionError("fit needs at least " + std::to_string(min_samples) + " samples");
  for (std::size_t k = 1; k < s.times.size(); ++k)
    if (!(s.times[k] > s.times[k - 1])) throw PreconditionError("series times must increase strictly");
}

std::vector<double> weights(const ScalarSeries& s, bool weighted) {
  std::vector<double> w(s.values.size(), 1.0);
  if (!weighted) return w;
  if (s.stderrs.size() != s.values.size()) throw DimensionError("weighted fit needs a stderr per sample");
  for (std::size_t k = 0; k < w.size(); ++k) {
    if (!(s.stderrs[k] > 0.0)) throw PreconditionError("weighted fit needs positive stderrs");
    w[k] = 1.0 / s.stderrs[k];
  }
  return w;
}

double nyquist(const std::vector<double>& s) {
  double min_gap = kInf;
  for (std::size_t k = 1; k < s.size(); ++k) min_gap = std::min(min_gap, s[k] - s[k - 1]);
  return 0.5 / min_gap;
}

// Dominant frequency (cycles per unit s) of y - mean on a fine grid.
double spectral_peak(const std::vector<double>& s, const std::vector<double>& y) {
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
  const double f_max = nyquist(s);
  auto power = [&](double f) {
    double re = 0.0, im = 0.0;
    for (std::size_t k = 0; k < s.size(); ++k) {
      re += (y[k] - mean) * std::cos(kTwoPi * f * s[k]);
      im += (y[k] - mean) * std::sin(kTwoPi * f * s[k]);
    }
    return re * re + im * im;
  };
  double best_f = 0.0, best_p = -1.0;
  for (double f = 0.5; f <= f_max; f += 0.25)
    if (const double p = power(f); p > best_p) best_p = p, best_f = f;
  const double lo = std::max(0.25, best_f - 0.5);
  for (double f = lo; f <= best_f + 0.5; f += 0.005)
    if (const double p = power(f); p > best_p) best_p = p, best_f = f;
  return best_f;
}

// Slope of log |envelope| from per-period maxima of |r|.
double envelope_rate(const std::vector<double>& s, const std::vector<double>& r, double f) {
  const double period = 1.0 / f;
  std::vector<std::pair<double, double>> peaks;
  std::size_t k = 0;
  while (k < s.size()) {
    const double start = s[k];
    double best = 0.0, at = start;
    while (k < s.size() && s[k] < start + period) {
      if (std::abs(r[k]) > best) best = std::abs(r[k]), at = s[k];
      ++k;
    }
    if (best > 1e-12) peaks.emplace_back(at, std::log(best));
  }
  if (peaks.size() < 2) return 0.0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (auto [x, v] : peaks) sx += x, sy += v, sxx += x * x, sxy += x * v;
  const double n = static_cast<double>(peaks.size());
  const double den = n * sxx - sx * sx;
  if (den <= 0.0) return 0.0;
  return std::max(0.0, -(n * sxy - sx * sy) / den);
}

std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

// ---------------------------------------------------------------------------
// ObservableSeries

std::vector<double> ObservableSeries::mean() const {
  std::vector<double> out;
  out.reserve(values.size());
  for (const auto& row : values) {
    double m = 0.0;
    for (double v : row) m += v;
    out.push_back(row.empty() ? 0.0 : m / static_cast<double>(row.size()));
  }
  return out;
}

std::vector<double> ObservableSeries::mean_stderr() const {
  std::vector<double> out(values.size(), 0.0);
  if (stderrs.size() != values.size()) return out;
  for (std::size_t k = 0; k < stderrs.size(); ++k) {
    double m = 0.0;
    for (double v : stderrs[k]) m += v;
    out[k] = stderrs[k].empty() ? 0.0 : m / static_cast<double>(stderrs[k].size());
  }
  return out;
}

void ObservableSeries::validate() const {
  if (values.size() != times.size()) throw DimensionError("series has one row per sample time");
  if (!stderrs.empty() && stderrs.size() != values.size()) throw DimensionError("stderr rows do not match values");
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (values[k].size() != sites()) throw DimensionError("ragged series");
    if (k > 0 && !(times[k] > times[k - 1])) throw PreconditionError("series times must increase strictly");
    for (std::size_t j = 0; j < values[k].size(); ++j) {
      const double se = stderrs.empty() ? 0.0 : stderrs[k][j];
      if (std::abs(values[k][j]) > 1.0 + 3.0 * se + 1e-9)
        throw PreconditionError("expectation value outside [-1, 1] beyond its error");
    }
  }
}

ObservableSeries ObservableSeries::from_observables(const std::vector<double>& times,
                                                    const std::vector<SpinObservables>& obs, char basis) {
  if (times.size() != obs.size()) throw DimensionError("one observable set per sample time");
  ObservableSeries s;
  s.times = times;
  s.basis = basis;
  for (const auto& o : obs) {
    const auto& v = basis == 'x' ? o.x : basis == 'y' ? o.y : o.z;
    s.values.push_back(v);
    s.stderrs.emplace_back(v.size(), 0.0);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Fits

FitResult fit_damped_cosine(const ScalarSeries& series, const FitOptions& options) {
  check_series(series, 8);
  const double span = series.times.back();
  if (!(span > 0.0)) throw PreconditionError("series has zero span");
  std::vector<double> s(series.times.size());
  for (std::size_t k = 0; k < s.size(); ++k) s[k] = series.times[k] / span;
  const auto& y = series.values;

  const double peak = spectral_peak(s, y);
  const double hint = options.frequency_hint * span;
  std::vector<double> seeds;
  if (hint > 0.0) {
    if (hint < 1.5) throw PreconditionError("fewer than 1.5 expected oscillation periods in the series");
    seeds.push_back(hint);
    if (peak >= 1.5 && std::abs(peak - hint) > 0.05 * hint) seeds.push_back(peak);
  } else {
    if (peak < 1.5) throw PreconditionError("fewer than 1.5 oscillation periods in the series");
    seeds.push_back(peak);
  }
  // Late-time mean approaches A - 1.
  const double a0 = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size()) + 1.0;
  std::vector<double> r(y.size());
  for (std::size_t k = 0; k < y.size(); ++k) r[k] = a0 != 0.0 ? 1.0 - (y[k] + 1.0) / a0 : 0.0;

  std::vector<Eigen::VectorXd> starts;
  for (double f0 : seeds) {
    const double g0 = envelope_rate(s, r, f0);
    for (double g : {g0, 3.0 * g0, g0 / 3.0, 0.0, 1.0})
      for (double df : {0.0, -0.01, 0.01}) {
        Eigen::VectorXd x(3);
        x << a0, f0 * (1.0 + df), g;
        starts.push_back(x);
      }
  }

  DampedCosine model;
  const auto w = weights(series, options.weighted);
  const Functor fn{&model, &s, &y, &w};
  const double f_max = nyquist(s);
  const Solution sol = solve(fn, starts, options.weighted,
                             [f_max](const Eigen::VectorXd& x) { return std::abs(x(1)) <= f_max; });

  FitResult out;
  out.kind = FitKind::DampedCosine;
  out.starts = static_cast<int>(starts.size());
  out.amplitude = sol.p(0);
  out.frequency = std::abs(sol.p(1)) / span;
  const double rate = sol.p(2) / span;
  Eigen::MatrixXd scale = Eigen::MatrixXd::Identity(3, 3);
  scale(1, 1) = scale(2, 2) = 1.0 / span;
  out.covariance = scale * sol.cov * scale;
  out.amplitude_err = std::sqrt(std::max(0.0, out.covariance(0, 0)));
  out.frequency_err = std::sqrt(std::max(0.0, out.covariance(1, 1)));
  out.residual_norm = std::sqrt(sol.rss);
  if (rate * span * options.unbounded_factor <= 1.0) {
    out.unbounded_tau = true;
    out.tau = kInf;
    out.tau_err = kInf;
  } else {
    out.tau = 1.0 / rate;
    out.tau_err = std::sqrt(std::max(0.0, out.covariance(2, 2))) / (rate * rate);
  }
  return out;
}

FitResult fit_exponential_decay(const ScalarSeries& series, const FitOptions& options) {
  check_series(series, 5);
  const double span = series.times.back();
  if (!(span > 0.0)) throw PreconditionError("series has zero span");
  std::vector<double> s(series.times.size());
  for (std::size_t k = 0; k < s.size(); ++k) s[k] = series.times[k] / span;
  const auto& y = series.values;

  // Log-linear initial guess over positive samples.
  double sx = 0, sy = 0, sxx = 0, sxy = 0, n = 0;
  for (std::size_t k = 0; k < y.size(); ++k)
    if (y[k] > 0.0) {
      const double ly = std::log(y[k]);
      sx += s[k], sy += ly, sxx += s[k] * s[k], sxy += s[k] * ly, n += 1;
    }
  double i0 = y.front(), g0 = 1.0;
  if (n >= 2 && n * sxx - sx * sx > 0.0) {
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    g0 = std::max(0.0, -slope);
    i0 = std::exp((sy - slope * sx) / n);
  }
  std::vector<Eigen::VectorXd> starts;
  for (double g : {g0, 0.0, 1.0, 3.0 * g0 + 0.1}) {
    Eigen::VectorXd x(2);
    x << i0, g;
    starts.push_back(x);
  }
  Exponential model;
  const auto w = weights(series, options.weighted);
  const Functor fn{&model, &s, &y, &w};
  const Solution sol = solve(fn, starts, options.weighted);

  FitResult out;
  out.kind = FitKind::Exponential;
  out.starts = static_cast<int>(starts.size());
  out.amplitude = sol.p(0);
  const double rate = sol.p(1) / span;
  Eigen::MatrixXd scale = Eigen::MatrixXd::Identity(2, 2);
  scale(1, 1) = 1.0 / span;
  out.covariance = scale * sol.cov * scale;
  out.amplitude_err = std::sqrt(std::max(0.0, out.covariance(0, 0)));
  out.residual_norm = std::sqrt(sol.rss);
  if (rate * span * options.unbounded_factor <= 1.0) {
    out.unbounded_tau = true;
    out.tau = kInf;
    out.tau_err = kInf;
  } else {
    out.tau = 1.0 / rate;
    out.tau_err = std::sqrt(std::max(0.0, out.covariance(1, 1))) / (rate * rate);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Imbalance and scales

ScalarSeries generalized_imbalance(const ObservableSeries& series, const std::vector<double>& pattern) {
  const std::size_t n = pattern.size();
  if (n == 0) throw PreconditionError("empty initial pattern");
  double up = 0.0, down = 0.0;
  for (double p : pattern) {
    if (p < -1.0 || p > 1.0) throw PreconditionError("pattern entries must lie in [-1, 1]");
    up += 1.0 + p;
    down += 1.0 - p;
  }
  if (up <= 0.0 || down <= 0.0) throw PreconditionError("pattern is fully polarised; imbalance undefined");
  std::vector<double> w(n);
  for (std::size_t j = 0; j < n; ++j) w[j] = (1.0 + pattern[j]) / up - (1.0 - pattern[j]) / down;

  ScalarSeries out;
  out.times = series.times;
  for (std::size_t k = 0; k < series.values.size(); ++k) {
    const auto& row = series.values[k];
    if (row.size() != n) throw DimensionError("pattern length does not match the series site count");
    double v = 0.0, var = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      v += w[j] * row[j];
      if (!series.stderrs.empty()) var += w[j] * w[j] * series.stderrs[k][j] * series.stderrs[k][j];
    }
    out.values.push_back(v);
    out.stderrs.push_back(std::sqrt(var));
  }
  return out;
}

double nearest_neighbour_coupling(const PulseSequence& seq) {
  if (seq.steps().empty()) throw PreconditionError("empty sequence");
  const int n = seq.spin_count();
  if (n < 2) throw PreconditionError("need at least two spins");
  std::vector<double> pair(static_cast<std::size_t>(n - 1), 0.0);
  for (const auto& [letters, c] : seq.steps()[0].segment.hamiltonian.terms()) {
    std::vector<int> sites;
    for (int j = 0; j < n; ++j)
      if (letters[static_cast<std::size_t>(j)] != 'I') sites.push_back(j);
    if (sites.size() == 2 && sites[1] == sites[0] + 1) pair[static_cast<std::size_t>(sites[0])] += std::abs(c);
  }
  double m = 0.0;
  for (double v : pair) m += v;
  return m / static_cast<double>(pair.size());
}

double average_hamiltonian_scale(const PulseSequence& seq, double j0, BetaModel model) {
  const auto& steps = seq.steps();
  if (steps.empty()) throw PreconditionError("empty sequence");
  const double t1 = steps[0].segment.duration;
  const double tpi = steps[0].pulse.duration;
  for (const auto& st : steps)
    if (std::abs(st.segment.duration - t1) > 1e-12 * t1 || std::abs(st.pulse.duration - tpi) > 1e-12 * std::max(t1, tpi))
      throw PreconditionError("average_hamiltonian_scale needs equal segments and pulse times");
  double beta = 1.0;
  if (const auto& env = steps[0].segment.envelope; env && env->kind == ShapeKind::Tukey)
    beta = effective_beta(*env, t1, model);
  return beta * j0 * t1 / (t1 + tpi);
}

double average_hamiltonian_scale(const PulseSequence& seq, BetaModel model) {
  return average_hamiltonian_scale(seq, nearest_neighbour_coupling(seq), model);
}

// ---------------------------------------------------------------------------
// CSV

std::string series_csv(const std::vector<std::pair<std::string, ObservableSeries>>& series,
                       const std::vector<std::pair<std::string, ScalarSeries>>& scalars) {
  std::string out = "time_s,observable,site,value,stderr\n";
  for (const auto& [name, s] : series) {
    const auto mean = s.mean();
    const auto mean_se = s.mean_stderr();
    for (std::size_t k = 0; k < s.times.size(); ++k) {
      for (std::size_t j = 0; j < s.values[k].size(); ++j) {
        const double se = s.stderrs.empty() ? 0.0 : s.stderrs[k][j];
        out += fmt(s.times[k]) + "," + name + "," + std::to_string(j) + "," + fmt(s.values[k][j]) + "," + fmt(se) + "\n";
      }
      out += fmt(s.times[k]) + "," + name + ",mean," + fmt(mean[k]) + "," + fmt(mean_se[k]) + "\n";
    }
  }
  for (const auto& [name, s] : scalars)
    for (std::size_t k = 0; k < s.times.size(); ++k) {
      const double se = k < s.stderrs.size() ? s.stderrs[k] : 0.0;
      out += fmt(s.times[k]) + "," + name + ",all," + fmt(s.values[k]) + "," + fmt(se) + "\n";
    }
  return out;
}

std::string fits_csv(const std::vector<std::pair<std::string, FitResult>>& fits,
                     const std::vector<FitRow>& extra) {
  std::string out = "param,value,stderr\n";
  auto row = [&](const std::string& p, double v, double e) { out += p + "," + fmt(v) + "," + fmt(e) + "\n"; };
  for (const auto& [label, f] : fits) {
    const std::string pre = label.empty() ? "" : label + ".";
    row(pre + "amplitude", f.amplitude, f.amplitude_err);
    if (f.kind == FitKind::DampedCosine) {
      row(pre + "f_hz", f.frequency, f.frequency_err);
      row(pre + "tau_s", f.tau, f.tau_err);
      const double ft = f.f_tau();
      const double ft_err = f.unbounded_tau ? kInf
                                            : std::hypot(f.frequency_err * f.tau, f.frequency * f.tau_err);
      row(pre + "f_tau", ft, ft_err);
    } else {
      row(pre + "tau_s", f.tau, f.tau_err);
    }
    row(pre + "residual_norm", f.residual_norm, 0.0);
    row(pre + "unbounded_tau", f.unbounded_tau ? 1.0 : 0.0, 0.0);
  }
  for (const auto& r : extra) row(r.param, r.value, r.error);
  return out;
}

}  // namespace pulseforge
