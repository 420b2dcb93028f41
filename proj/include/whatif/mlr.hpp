// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <vector>

#include "whatif/linalg.hpp"
#include "whatif/model.hpp"

namespace whatif {

/// Multiple linear regression of the target on an intercept and the
/// contemporaneous exogenous values. Rows with any missing cell are dropped.
inline FittedModel fit_mlr(const TimeSeriesFrame& frame, const ModelSpec& spec) {
  if (spec.kind != ModelKind::MLR) throw Error(Errc::InvalidSpec, "fit_mlr needs an MLR spec");
  validate_spec(spec, frame);

  const auto target_col = *frame.column_index(spec.target);
  std::vector<std::size_t> exog_cols;
  for (const auto& x : spec.exogenous) exog_cols.push_back(*frame.column_index(x));

  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < frame.size(); ++r) {
    const auto& row = frame.rows()[r];
    bool ok = !is_missing(row[target_col]);
    for (auto c : exog_cols) ok = ok && !is_missing(row[c]);
    if (ok) rows.push_back(r);
  }
  const auto p = static_cast<Eigen::Index>(exog_cols.size()) + 1;
  if (static_cast<Eigen::Index>(rows.size()) < p + 1)
    throw Error(Errc::InsufficientData, "MLR needs " + std::to_string(p + 1) + " complete rows, have " +
                                            std::to_string(rows.size()));

  const auto n = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd design(n, p);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = frame.rows()[rows[static_cast<std::size_t>(i)]];
    design(i, 0) = 1.0;
    for (Eigen::Index j = 1; j < p; ++j) design(i, j) = row[exog_cols[static_cast<std::size_t>(j - 1)]];
    y(i) = row[target_col];
  }
  const auto fit = ols(design, y);

  MlrParameters params;
  params.intercept = fit.coefficients(0, 0);
  for (Eigen::Index j = 1; j < p; ++j) params.coefficients.push_back(fit.coefficients(j, 0));

  const double ssr = fit.residuals.squaredNorm();
  FittedModel model;
  model.spec = spec;
  model.parameters = std::move(params);
  model.residual_sigma = std::sqrt(ssr / static_cast<double>(n - p));
  model.fit_range = {frame.index()[rows.front()], frame.index()[rows.back()], rows.size()};
  return model;
}

inline Forecast forecast_mlr(const FittedModel& model, const ExogPaths& paths, std::size_t horizon) {
  detail::check_horizon(horizon);
  const auto& params = detail::params_of<MlrParameters>(model, ModelKind::MLR);
  Forecast out{ModelKind::MLR, horizon, std::vector<double>(horizon, params.intercept), model.fit_range.end};
  for (std::size_t i = 0; i < model.spec.exogenous.size(); ++i) {
    const auto& path = detail::require_path(paths, model.spec.exogenous[i], horizon);
    for (std::size_t t = 0; t < horizon; ++t) out.values[t] += params.coefficients[i] * path[t];
  }
  return out;
}

}  // namespace whatif
