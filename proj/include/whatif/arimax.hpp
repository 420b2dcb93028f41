// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Eigenvalues>

#include "whatif/linalg.hpp"
#include "whatif/model.hpp"
#include "whatif/optim.hpp"

namespace whatif {

namespace detail {

/// True when all roots of 1 - c1 z - ... - ck z^k lie strictly outside the
/// unit circle (equivalently, the companion matrix has spectral radius < 1).
inline bool roots_outside_unit_circle(const Eigen::VectorXd& coeffs) {
  const auto k = coeffs.size();
  if (k == 0) return true;
  if (k == 1) return std::abs(coeffs(0)) < 1.0;
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(k, k);
  companion.row(0) = coeffs.transpose();
  companion.bottomLeftCorner(k - 1, k - 1).setIdentity();
  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
  if (solver.info() != Eigen::Success) return false;
  return solver.eigenvalues().cwiseAbs().maxCoeff() < 1.0;
}

inline std::vector<double> difference(const std::vector<double>& x) {
  std::vector<double> out;
  for (std::size_t t = 1; t < x.size(); ++t) out.push_back(x[t] - x[t - 1]);
  return out;
}

/// Applies `d` differences, recording the final value of each intermediate
/// level (needed to integrate forecasts back).
inline std::vector<double> difference_n(std::vector<double> x, int d, std::vector<double>& tail) {
  tail.clear();
  for (int j = 0; j < d; ++j) {
    tail.push_back(x.back());
    x = difference(x);
  }
  return x;
}

/// Innovations of an ARMA(p, q) with intercept under zero-initialized
/// pre-sample innovations, starting at t = p.
inline std::vector<double> css_innovations(const std::vector<double>& u, double intercept,
                                           const Eigen::VectorXd& ar, const Eigen::VectorXd& ma) {
  const auto p = static_cast<std::size_t>(ar.size());
  const auto q = static_cast<std::size_t>(ma.size());
  std::vector<double> e(u.size(), 0.0);
  for (std::size_t t = p; t < u.size(); ++t) {
    double pred = intercept;
    for (std::size_t j = 0; j < p; ++j) pred += ar[static_cast<Eigen::Index>(j)] * u[t - 1 - j];
    for (std::size_t k = 0; k < q && k + 1 <= t; ++k) pred += ma[static_cast<Eigen::Index>(k)] * e[t - 1 - k];
    e[t] = u[t] - pred;
  }
  return e;
}

}  // namespace detail

/// ARIMAX(p, d, q): the target and exogenous series are differenced d times,
/// exogenous effects are removed by least squares on the differenced data,
/// and (intercept, AR, MA) minimize the conditional sum of squares of the
/// remainder. Parameter vectors with AR or MA roots on or inside the unit
/// circle are rejected during the search.
inline FittedModel fit_arimax(const TimeSeriesFrame& frame, const ModelSpec& spec,
                              const NelderMeadOptions& options = {}) {
  if (spec.kind != ModelKind::ARIMAX) throw Error(Errc::InvalidSpec, "fit_arimax needs an ARIMAX spec");
  validate_spec(spec, frame);
  const auto [p, d, q] = spec.arimax;

  std::vector<std::string> columns{spec.target};
  columns.insert(columns.end(), spec.exogenous.begin(), spec.exogenous.end());
  const auto [first_row, data] = detail::trailing_complete_block(frame, columns);
  const auto n = static_cast<std::size_t>(data.rows());
  const std::size_t needed = static_cast<std::size_t>(p + q) + spec.exogenous.size() + 5;
  if (n < static_cast<std::size_t>(d) || n - static_cast<std::size_t>(d) <= needed)
    throw Error(Errc::InsufficientData, "ARIMAX(" + std::to_string(p) + "," + std::to_string(d) + "," +
                                            std::to_string(q) + ") needs more than " +
                                            std::to_string(needed + static_cast<std::size_t>(d)) +
                                            " gap-free rows, have " + std::to_string(n));

  ArimaxParameters params;
  params.d = d;
  auto column = [&](Eigen::Index c) {
    std::vector<double> v(n);
    for (std::size_t t = 0; t < n; ++t) v[t] = data(static_cast<Eigen::Index>(t), c);
    return v;
  };
  const std::vector<double> w = detail::difference_n(column(0), d, params.target_tail);
  const std::size_t m = w.size();
  const std::size_t k = spec.exogenous.size();

  std::vector<double> u = w;
  if (k > 0) {
    Eigen::MatrixXd design(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(k + 1));
    design.col(0).setOnes();
    params.exog_tail.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
      const auto z = detail::difference_n(column(static_cast<Eigen::Index>(i + 1)), d, params.exog_tail[i]);
      for (std::size_t t = 0; t < m; ++t) design(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(i + 1)) = z[t];
    }
    const Eigen::VectorXd wv = Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(m));
    const auto fit = ols(design, wv);
    for (std::size_t i = 0; i < k; ++i) params.exog.push_back(fit.coefficients(static_cast<Eigen::Index>(i + 1), 0));
    for (std::size_t t = 0; t < m; ++t)
      for (std::size_t i = 0; i < k; ++i)
        u[t] -= params.exog[i] * design(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(i + 1));
  }

  double mean_u = 0.0;
  for (double v : u) mean_u += v;
  mean_u /= static_cast<double>(m);
  double var_u = 0.0;
  for (double v : u) var_u += (v - mean_u) * (v - mean_u);
  const double sd_u = std::sqrt(var_u / static_cast<double>(m));

  Eigen::VectorXd ar = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd ma = Eigen::VectorXd::Zero(q);
  double intercept = mean_u;

  if (p + q > 0) {
    const auto dims = 1 + p + q;
    auto unpack = [p, q](const Eigen::VectorXd& x, double& c, Eigen::VectorXd& a, Eigen::VectorXd& b) {
      c = x(0);
      a = x.segment(1, p);
      b = x.segment(1 + p, q);
    };
    auto css = [&](const Eigen::VectorXd& x) {
      double c;
      Eigen::VectorXd a, b;
      unpack(x, c, a, b);
      if (!detail::roots_outside_unit_circle(a) || !detail::roots_outside_unit_circle(-b))
        return std::numeric_limits<double>::infinity();
      const auto e = detail::css_innovations(u, c, a, b);
      double ss = 0.0;
      for (std::size_t t = static_cast<std::size_t>(p); t < e.size(); ++t) ss += e[t] * e[t];
      return std::isfinite(ss) ? ss : std::numeric_limits<double>::infinity();
    };
    Eigen::VectorXd start = Eigen::VectorXd::Zero(dims);
    start(0) = mean_u;
    Eigen::VectorXd steps = Eigen::VectorXd::Constant(dims, options.initial_step);
    steps(0) = std::max(0.1 * sd_u, 1e-3);
    const auto result = nelder_mead(css, start, steps, options);
    if (!result.converged || !std::isfinite(result.value))
      throw Error(Errc::FitDidNotConverge, "conditional sum of squares search did not converge after " +
                                               std::to_string(result.evaluations) + " evaluations");
    unpack(result.x, intercept, ar, ma);
  }

  params.intercept = intercept;
  params.ar.assign(ar.data(), ar.data() + p);
  params.ma.assign(ma.data(), ma.data() + q);

  const auto e = detail::css_innovations(u, intercept, ar, ma);
  double ssr = 0.0;
  for (std::size_t t = static_cast<std::size_t>(p); t < m; ++t) ssr += e[t] * e[t];
  const auto effective = static_cast<double>(m - static_cast<std::size_t>(p));
  const auto n_params = static_cast<double>(1 + p + q + static_cast<int>(k));
  params.recent_residuals.assign(u.end() - p, u.end());
  params.recent_innovations.assign(e.end() - q, e.end());

  FittedModel model;
  model.spec = spec;
  model.parameters = std::move(params);
  model.residual_sigma = std::sqrt(ssr / std::max(1.0, effective - n_params));
  model.fit_range = detail::make_range(frame, first_row, n);
  return model;
}

/// Standard ARIMA recursion with future innovations at zero, then d-fold
/// integration from the last observed levels.
inline Forecast forecast_arimax(const FittedModel& model, const ExogPaths& paths, std::size_t horizon) {
  detail::check_horizon(horizon);
  const auto& params = detail::params_of<ArimaxParameters>(model, ModelKind::ARIMAX);
  const auto& exog = model.spec.exogenous;
  std::vector<const std::vector<double>*> exog_paths;
  for (const auto& x : exog) exog_paths.push_back(&detail::require_path(paths, x, horizon));

  const auto p = params.ar.size();
  const auto q = params.ma.size();
  const auto d = static_cast<std::size_t>(params.d);
  std::vector<double> u_hist = params.recent_residuals;
  std::vector<double> e_hist = params.recent_innovations;
  std::vector<double> target_tail = params.target_tail;
  std::vector<std::vector<double>> exog_tail = params.exog_tail;

  Forecast out{ModelKind::ARIMAX, horizon, {}, model.fit_range.end};
  out.values.reserve(horizon);
  for (std::size_t t = 0; t < horizon; ++t) {
    double exog_effect = 0.0;
    for (std::size_t i = 0; i < exog.size(); ++i) {
      double level = (*exog_paths[i])[t];
      for (std::size_t j = 0; j < d; ++j) {
        const double diff = level - exog_tail[i][j];
        exog_tail[i][j] = level;
        level = diff;
      }
      exog_effect += params.exog[i] * level;
    }

    double u = params.intercept;
    for (std::size_t j = 0; j < p; ++j) u += params.ar[j] * u_hist[u_hist.size() - 1 - j];
    for (std::size_t k = 0; k < q; ++k) u += params.ma[k] * e_hist[e_hist.size() - 1 - k];
    if (p > 0) {
      u_hist.erase(u_hist.begin());
      u_hist.push_back(u);
    }
    if (q > 0) {
      e_hist.erase(e_hist.begin());
      e_hist.push_back(0.0);
    }

    double value = u + exog_effect;
    for (std::size_t j = d; j-- > 0;) {
      value += target_tail[j];
      target_tail[j] = value;
    }
    out.values.push_back(value);
  }
  return out;
}

}  // namespace whatif
