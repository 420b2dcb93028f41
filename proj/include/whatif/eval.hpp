// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "whatif/models.hpp"

namespace whatif {

struct Metrics {
  double rmse = 0.0;
  double mae = 0.0;
  std::optional<double> mape;  // percent; unset when every actual is zero
  std::size_t mape_skipped = 0;
};

/// RMSE, MAE and MAPE (percent). MAPE skips points whose actual is zero.
inline Metrics metrics(std::span<const double> actual, std::span<const double> predicted) {
  if (actual.size() != predicted.size())
    throw Error(Errc::ShapeError, "actual has " + std::to_string(actual.size()) + " points, predicted " +
                                      std::to_string(predicted.size()));
  if (actual.empty()) throw Error(Errc::EmptyInput, "no points to score");
  double se = 0.0, ae = 0.0, pe = 0.0;
  std::size_t pe_count = 0;
  Metrics m;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    const double e = predicted[i] - actual[i];
    se += e * e;
    ae += std::abs(e);
    if (actual[i] == 0.0) {
      ++m.mape_skipped;
    } else {
      pe += std::abs(e / actual[i]);
      ++pe_count;
    }
  }
  const auto n = static_cast<double>(actual.size());
  m.rmse = std::sqrt(se / n);
  m.mae = ae / n;
  if (pe_count > 0) m.mape = 100.0 * pe / static_cast<double>(pe_count);
  return m;
}

struct ModelScorecard {
  ModelKind model_kind = ModelKind::MLR;
  double rmse = 0.0;
  double mae = 0.0;
  std::optional<double> mape;
  std::size_t n_folds = 0;
  std::size_t horizon = 1;
  std::vector<double> per_fold_errors;  // RMSE of each fold's forecast
};

/// Expanding-window walk-forward evaluation. Fold j (0-based) fits on the
/// first n - n_folds - horizon + 1 + j rows and forecasts `horizon` steps
/// with the true future exogenous values; the last fold ends at the final
/// row. Metrics pool every forecast point. Folds may run concurrently; the
/// result is reduced in fold order.
inline ModelScorecard walk_forward_backtest(const ModelSpec& spec, const TimeSeriesFrame& frame, std::size_t n_folds,
                                            std::size_t horizon = 1, bool parallel = false) {
  if (n_folds < 2) throw Error(Errc::InvalidSpec, "walk-forward needs at least 2 folds");
  if (horizon == 0) throw Error(Errc::InvalidHorizon, "horizon must be >= 1");
  validate_spec(spec, frame);
  std::vector<std::string> columns{spec.target};
  columns.insert(columns.end(), spec.exogenous.begin(), spec.exogenous.end());
  for (const auto& c : columns)
    for (double v : frame.column(c))
      if (is_missing(v)) throw Error(Errc::InvalidSpec, "backtest needs gap-free data; '" + c + "' has gaps");
  const std::size_t n = frame.size();
  if (n < n_folds + horizon + 1)
    throw Error(Errc::InsufficientData, "frame of " + std::to_string(n) + " rows cannot hold " +
                                            std::to_string(n_folds) + " folds");
  const std::size_t first_train = n - n_folds - horizon + 1;

  const auto target = frame.column(spec.target);
  std::vector<std::vector<double>> exog_cols;
  for (const auto& x : spec.exogenous) exog_cols.push_back(frame.column(x));

  auto run_fold = [&](std::size_t j) {
    const std::size_t train = first_train + j;
    const auto model = fit(frame.head(train), spec);
    ExogPaths paths;
    for (std::size_t i = 0; i < spec.exogenous.size(); ++i)
      paths[spec.exogenous[i]] = {exog_cols[i].begin() + static_cast<std::ptrdiff_t>(train),
                                  exog_cols[i].begin() + static_cast<std::ptrdiff_t>(train + horizon)};
    return forecast(model, paths, horizon).values;
  };

  std::vector<std::vector<double>> predictions(n_folds);
  if (parallel) {
    std::vector<std::future<std::vector<double>>> futures;
    for (std::size_t j = 0; j < n_folds; ++j) futures.push_back(std::async(std::launch::async, run_fold, j));
    for (std::size_t j = 0; j < n_folds; ++j) predictions[j] = futures[j].get();
  } else {
    for (std::size_t j = 0; j < n_folds; ++j) predictions[j] = run_fold(j);
  }

  ModelScorecard card;
  card.model_kind = spec.kind;
  card.n_folds = n_folds;
  card.horizon = horizon;
  std::vector<double> all_actual, all_pred;
  for (std::size_t j = 0; j < n_folds; ++j) {
    const std::size_t train = first_train + j;
    const std::span<const double> actual(target.data() + train, horizon);
    card.per_fold_errors.push_back(metrics(actual, predictions[j]).rmse);
    all_actual.insert(all_actual.end(), actual.begin(), actual.end());
    all_pred.insert(all_pred.end(), predictions[j].begin(), predictions[j].end());
  }
  const auto pooled = metrics(all_actual, all_pred);
  card.rmse = pooled.rmse;
  card.mae = pooled.mae;
  card.mape = pooled.mape;
  return card;
}

enum class Metric { RMSE, MAE, MAPE };

inline std::optional<Metric> parse_metric(std::string_view s) {
  if (s == "rmse") return Metric::RMSE;
  if (s == "mae") return Metric::MAE;
  if (s == "mape") return Metric::MAPE;
  return std::nullopt;
}

inline double metric_value(const ModelScorecard& c, Metric m) {
  switch (m) {
    case Metric::RMSE: return c.rmse;
    case Metric::MAE: return c.mae;
    case Metric::MAPE: return c.mape.value_or(std::numeric_limits<double>::infinity());
  }
  return c.rmse;
}

/// Ascending by metric; ties by model kind order (MLR, ARIMAX, VECM, LSTM).
inline std::vector<ModelScorecard> rank_models(std::vector<ModelScorecard> cards, Metric metric = Metric::RMSE) {
  if (cards.empty()) throw Error(Errc::EmptyInput, "no scorecards to rank");
  for (const auto& c : cards)
    if (c.n_folds != cards.front().n_folds) throw Error(Errc::ShapeError, "scorecards differ in fold count");
  std::stable_sort(cards.begin(), cards.end(), [metric](const auto& a, const auto& b) {
    const double va = metric_value(a, metric), vb = metric_value(b, metric);
    if (va != vb) return va < vb;
    return static_cast<int>(a.model_kind) < static_cast<int>(b.model_kind);
  });
  return cards;
}

inline void to_json(nlohmann::json& j, const ModelScorecard& c) {
  j = {{"model_kind", c.model_kind},
       {"rmse", c.rmse},
       {"mae", c.mae},
       {"mape", c.mape ? nlohmann::json(*c.mape) : nlohmann::json(nullptr)},
       {"n_folds", c.n_folds},
       {"horizon", c.horizon},
       {"per_fold_errors", c.per_fold_errors}};
}

}  // namespace whatif
