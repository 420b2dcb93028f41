// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "whatif/linalg.hpp"
#include "whatif/model.hpp"

namespace whatif {

/// System variable order for a VECM spec: target first, then exogenous.
inline std::vector<std::string> vecm_system(const ModelSpec& spec) {
  std::vector<std::string> vars{spec.target};
  vars.insert(vars.end(), spec.exogenous.begin(), spec.exogenous.end());
  return vars;
}

/// Rank-1 VECM by the two-step (Engle-Granger) procedure:
///   1. levels regression of the target on the other variables + intercept
///      gives beta = (1, -b) and the equilibrium error z = beta'y - a;
///   2. each equation  dy_t = c + alpha z_{t-1} + sum_j Gamma_j dy_{t-j}
///      (j = 1..k-1) is fit by least squares.
inline FittedModel fit_vecm(const TimeSeriesFrame& frame, const ModelSpec& spec) {
  if (spec.kind != ModelKind::VECM) throw Error(Errc::InvalidSpec, "fit_vecm needs a VECM spec");
  if (spec.exogenous.empty()) throw Error(Errc::InvalidSystem, "VECM needs at least two system variables");
  validate_spec(spec, frame);

  const auto vars = vecm_system(spec);
  const auto m = static_cast<Eigen::Index>(vars.size());
  const int k = spec.vecm.lag_order;
  const auto [first_row, y] = detail::trailing_complete_block(frame, vars);
  const auto n = y.rows();
  if (n <= (k + 2) * m + 5)
    throw Error(Errc::InsufficientData, "VECM with lag order " + std::to_string(k) + " on " + std::to_string(m) +
                                            " variables needs more than " + std::to_string((k + 2) * m + 5) +
                                            " gap-free rows, have " + std::to_string(n));

  // Step 1: cointegrating regression.
  Eigen::MatrixXd levels_design(n, m);
  levels_design.col(0).setOnes();
  levels_design.rightCols(m - 1) = y.rightCols(m - 1);
  const auto coint = ols(levels_design, y.col(0));
  VecmParameters params;
  params.coint_intercept = coint.coefficients(0, 0);
  params.beta = Eigen::VectorXd(m);
  params.beta(0) = 1.0;
  params.beta.tail(m - 1) = -coint.coefficients.col(0).tail(m - 1);
  const Eigen::VectorXd ect = y * params.beta - Eigen::VectorXd::Constant(n, params.coint_intercept);

  // Step 2: equation-by-equation error correction regressions (shared design).
  const Eigen::MatrixXd dy = y.bottomRows(n - 1) - y.topRows(n - 1);  // dy row r is the change into y row r+1
  const Eigen::Index rows = n - k;
  const Eigen::Index cols = 2 + m * (k - 1);
  Eigen::MatrixXd design(rows, cols);
  Eigen::MatrixXd response(rows, m);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Eigen::Index t = r + k;  // level row being explained
    design(r, 0) = 1.0;
    design(r, 1) = ect(t - 1);
    for (int j = 1; j < k; ++j) design.block(r, 2 + m * (j - 1), 1, m) = dy.row(t - 1 - j);
    response.row(r) = dy.row(t - 1);
  }
  const auto ec = ols(design, response);
  params.intercept = ec.coefficients.row(0).transpose();
  params.alpha = ec.coefficients.row(1).transpose();
  for (int j = 1; j < k; ++j)
    params.gamma.push_back(ec.coefficients.block(2 + m * (j - 1), 0, m, m).transpose());
  params.tail_levels = y.bottomRows(k);

  FittedModel model;
  model.spec = spec;
  model.residual_sigma = std::sqrt(ec.residuals.col(0).squaredNorm() / static_cast<double>(std::max<Eigen::Index>(1, rows - cols)));
  model.parameters = std::move(params);
  model.fit_range = detail::make_range(frame, first_row, static_cast<std::size_t>(n));
  return model;
}

/// Iterates the system one step at a time. After each step any variable with
/// a fixed path is overwritten by its fixed value before the next step is
/// computed. Row s holds every system variable at step s, target first.
inline Eigen::MatrixXd forecast_vecm_system(const FittedModel& model, const ExogPaths& fixed_paths,
                                            std::size_t horizon) {
  detail::check_horizon(horizon);
  const auto& params = detail::params_of<VecmParameters>(model, ModelKind::VECM);
  const auto vars = vecm_system(model.spec);
  const auto k = static_cast<Eigen::Index>(params.gamma.size()) + 1;

  std::vector<std::pair<Eigen::Index, const std::vector<double>*>> fixed;
  for (const auto& [name, path] : fixed_paths) {
    if (name == model.spec.target) throw Error(Errc::CannotFixTarget, "target '" + name + "' cannot be fixed");
    const auto it = std::find(vars.begin(), vars.end(), name);
    if (it == vars.end()) continue;  // not part of this system
    fixed.emplace_back(it - vars.begin(), &detail::require_path(fixed_paths, name, horizon));
  }

  // Rolling window of the last k levels, oldest first.
  Eigen::MatrixXd window = params.tail_levels;
  Eigen::MatrixXd out(static_cast<Eigen::Index>(horizon), window.cols());
  for (std::size_t s = 0; s < horizon; ++s) {
    const Eigen::VectorXd last = window.row(k - 1).transpose();
    const double z = params.beta.dot(last) - params.coint_intercept;
    Eigen::VectorXd change = params.intercept + params.alpha * z;
    for (Eigen::Index j = 1; j < k; ++j) {
      const Eigen::VectorXd lagged = (window.row(k - j) - window.row(k - j - 1)).transpose();
      change += params.gamma[static_cast<std::size_t>(j - 1)] * lagged;
    }
    Eigen::VectorXd next = last + change;
    for (const auto& [col, path] : fixed) next(col) = (*path)[s];
    for (Eigen::Index r = 0; r + 1 < k; ++r) window.row(r) = window.row(r + 1);
    window.row(k - 1) = next.transpose();
    out.row(static_cast<Eigen::Index>(s)) = next.transpose();
  }
  return out;
}

/// Target path of forecast_vecm_system.
inline Forecast forecast_vecm(const FittedModel& model, const ExogPaths& fixed_paths, std::size_t horizon) {
  const auto system = forecast_vecm_system(model, fixed_paths, horizon);
  Forecast out{ModelKind::VECM, horizon, {}, model.fit_range.end};
  out.values.assign(system.col(0).data(), system.col(0).data() + system.rows());
  return out;
}

}  // namespace whatif
