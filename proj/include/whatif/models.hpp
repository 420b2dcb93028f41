// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "whatif/arimax.hpp"
#include "whatif/lstm.hpp"
#include "whatif/mlr.hpp"
#include "whatif/model.hpp"
#include "whatif/vecm.hpp"

namespace whatif {

inline FittedModel fit(const TimeSeriesFrame& frame, const ModelSpec& spec) {
  switch (spec.kind) {
    case ModelKind::MLR: return fit_mlr(frame, spec);
    case ModelKind::ARIMAX: return fit_arimax(frame, spec);
    case ModelKind::VECM: return fit_vecm(frame, spec);
    case ModelKind::LSTM: return fit_lstm(frame, spec);
  }
  throw Error(Errc::InvalidSpec, "unknown model kind");
}

/// Forecast conditional on exogenous paths. For VECM every supplied path of a
/// system variable is treated as fixed.
inline Forecast forecast(const FittedModel& model, const ExogPaths& paths, std::size_t horizon) {
  switch (model.kind()) {
    case ModelKind::MLR: return forecast_mlr(model, paths, horizon);
    case ModelKind::ARIMAX: return forecast_arimax(model, paths, horizon);
    case ModelKind::VECM: return forecast_vecm(model, paths, horizon);
    case ModelKind::LSTM: return forecast_lstm(model, paths, horizon);
  }
  throw Error(Errc::InvalidSpec, "unknown model kind");
}

// ---------------------------------------------------------------------------
// Coefficient impacts

struct ImpactSummary {
  std::string variable;
  bool available = false;
  std::optional<double> mean_impact;
  std::optional<double> std_impact;
};

/// For regression-type models (MLR, ARIMAX) the impact series of variable i
/// is coef_i * x_i over the fit range, summarized by its mean and population
/// standard deviation and sorted by |mean| descending. VECM and LSTM carry
/// no scalar per-variable coefficient, so every entry is unavailable.
inline std::vector<ImpactSummary> coefficient_impacts(const FittedModel& model, const TimeSeriesFrame& frame) {
  const auto& exog = model.spec.exogenous;
  for (const auto& x : exog)
    if (!frame.has_variable(x)) throw Error(Errc::MissingVariable, "no variable '" + x + "'");

  std::vector<ImpactSummary> out;
  const std::vector<double>* coefs = nullptr;
  if (const auto* mlr = std::get_if<MlrParameters>(&model.parameters)) coefs = &mlr->coefficients;
  if (const auto* arimax = std::get_if<ArimaxParameters>(&model.parameters)) coefs = &arimax->exog;
  if (!coefs) {
    for (const auto& x : exog) out.push_back({x, false, std::nullopt, std::nullopt});
    return out;
  }

  for (std::size_t i = 0; i < exog.size(); ++i) {
    const auto col = frame.column(exog[i]);
    std::vector<double> impact;
    for (std::size_t r = 0; r < frame.size(); ++r) {
      const auto date = frame.index()[r];
      if (model.fit_range.rows > 0 && (date < model.fit_range.start || date > model.fit_range.end)) continue;
      if (!is_missing(col[r])) impact.push_back((*coefs)[i] * col[r]);
    }
    if (impact.empty()) throw Error(Errc::EmptySeries, "no observations of '" + exog[i] + "' in fit range");
    double mean = 0.0;
    for (double v : impact) mean += v;
    mean /= static_cast<double>(impact.size());
    double ss = 0.0;
    for (double v : impact) ss += (v - mean) * (v - mean);
    out.push_back({exog[i], true, mean, std::sqrt(ss / static_cast<double>(impact.size()))});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return std::abs(*a.mean_impact) > std::abs(*b.mean_impact); });
  return out;
}

// ---------------------------------------------------------------------------
// JSON

inline constexpr int kModelFormatVersion = 1;

inline void to_json(nlohmann::json& j, ModelKind kind) { j = std::string(to_string(kind)); }

inline void from_json(const nlohmann::json& j, ModelKind& kind) {
  const auto parsed = parse_model_kind(j.get<std::string>());
  if (!parsed) throw Error(Errc::ParseError, "unknown model kind '" + j.get<std::string>() + "'");
  kind = *parsed;
}

inline void to_json(nlohmann::json& j, const ModelSpec& spec) {
  j = {{"kind", spec.kind}, {"target", spec.target}, {"exogenous", spec.exogenous}};
  switch (spec.kind) {
    case ModelKind::MLR: j["hyperparams"] = nlohmann::json::object(); break;
    case ModelKind::ARIMAX:
      j["hyperparams"] = {{"p", spec.arimax.p}, {"d", spec.arimax.d}, {"q", spec.arimax.q}};
      break;
    case ModelKind::VECM: j["hyperparams"] = {{"lag_order", spec.vecm.lag_order}, {"rank", 1}}; break;
    case ModelKind::LSTM:
      j["hyperparams"] = {{"window", spec.lstm.window},
                          {"hidden_size", spec.lstm.hidden_size},
                          {"epochs", spec.lstm.epochs},
                          {"learning_rate", spec.lstm.learning_rate},
                          {"seed", spec.lstm.seed}};
      break;
  }
}

inline void from_json(const nlohmann::json& j, ModelSpec& spec) {
  spec.kind = j.at("kind").get<ModelKind>();
  spec.target = j.at("target").get<std::string>();
  spec.exogenous = j.value("exogenous", std::vector<std::string>{});
  const auto hp = j.value("hyperparams", nlohmann::json::object());
  spec.arimax = {hp.value("p", 1), hp.value("d", 1), hp.value("q", 1)};
  spec.vecm = {hp.value("lag_order", 1)};
  spec.lstm = {hp.value("window", 4), hp.value("hidden_size", 8), hp.value("epochs", 200),
               hp.value("learning_rate", 0.05), hp.value("seed", std::uint64_t{1})};
}

namespace detail {

inline nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
  auto rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    auto row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, Eigen::Index cols_if_empty = 0) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows > 0 ? static_cast<Eigen::Index>(j[0].size()) : cols_if_empty;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (static_cast<Eigen::Index>(j[r].size()) != cols) throw Error(Errc::ParseError, "ragged matrix");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

inline nlohmann::json vector_json(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

inline Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace detail

inline nlohmann::json model_to_json(const FittedModel& model) {
  nlohmann::json params;
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, MlrParameters>) {
          params = {{"intercept", p.intercept}, {"coefficients", p.coefficients}};
        } else if constexpr (std::is_same_v<T, ArimaxParameters>) {
          params = {{"intercept", p.intercept},     {"ar", p.ar},
                    {"ma", p.ma},                   {"exog", p.exog},
                    {"d", p.d},                     {"recent_residuals", p.recent_residuals},
                    {"recent_innovations", p.recent_innovations}, {"target_tail", p.target_tail},
                    {"exog_tail", p.exog_tail}};
        } else if constexpr (std::is_same_v<T, VecmParameters>) {
          auto gamma = nlohmann::json::array();
          for (const auto& g : p.gamma) gamma.push_back(detail::matrix_json(g));
          params = {{"alpha", detail::vector_json(p.alpha)},
                    {"beta", detail::vector_json(p.beta)},
                    {"coint_intercept", p.coint_intercept},
                    {"gamma", std::move(gamma)},
                    {"intercept", detail::vector_json(p.intercept)},
                    {"tail_levels", detail::matrix_json(p.tail_levels)}};
        } else {
          params = {{"weights",
                     {{"input", detail::matrix_json(p.weights.input)},
                      {"recurrent", detail::matrix_json(p.weights.recurrent)},
                      {"bias", detail::vector_json(p.weights.bias)},
                      {"head", detail::vector_json(p.weights.head)},
                      {"head_bias", p.weights.head_bias}}},
                    {"means", p.means},
                    {"scales", p.scales},
                    {"trained", p.trained},
                    {"loss_history", p.loss_history},
                    {"tail_inputs", detail::matrix_json(p.tail_inputs)}};
        }
      },
      model.parameters);
  return {{"version", kModelFormatVersion},
          {"kind", model.kind()},
          {"spec", model.spec},
          {"parameters", std::move(params)},
          {"residual_sigma", model.residual_sigma},
          {"fit_range",
           {{"start", format_date(model.fit_range.start)},
            {"end", format_date(model.fit_range.end)},
            {"rows", model.fit_range.rows}}}};
}

inline FittedModel model_from_json(const nlohmann::json& j) {
  if (j.value("version", 0) != kModelFormatVersion)
    throw Error(Errc::ParseError, "unsupported model format version");
  FittedModel model;
  model.spec = j.at("spec").get<ModelSpec>();
  if (j.at("kind").get<ModelKind>() != model.spec.kind) throw Error(Errc::ParseError, "kind/spec mismatch");
  model.residual_sigma = j.at("residual_sigma").get<double>();
  const auto& range = j.at("fit_range");
  const auto start = parse_date(range.at("start").get<std::string>());
  const auto end = parse_date(range.at("end").get<std::string>());
  if (!start || !end) throw Error(Errc::ParseError, "bad fit_range date");
  model.fit_range = {*start, *end, range.at("rows").get<std::size_t>()};

  const auto& p = j.at("parameters");
  const auto n_exog = static_cast<Eigen::Index>(model.spec.exogenous.size());
  switch (model.spec.kind) {
    case ModelKind::MLR:
      model.parameters = MlrParameters{p.at("intercept").get<double>(), p.at("coefficients").get<std::vector<double>>()};
      break;
    case ModelKind::ARIMAX: {
      ArimaxParameters a;
      a.intercept = p.at("intercept").get<double>();
      a.ar = p.at("ar").get<std::vector<double>>();
      a.ma = p.at("ma").get<std::vector<double>>();
      a.exog = p.at("exog").get<std::vector<double>>();
      a.d = p.at("d").get<int>();
      a.recent_residuals = p.at("recent_residuals").get<std::vector<double>>();
      a.recent_innovations = p.at("recent_innovations").get<std::vector<double>>();
      a.target_tail = p.at("target_tail").get<std::vector<double>>();
      a.exog_tail = p.at("exog_tail").get<std::vector<std::vector<double>>>();
      model.parameters = std::move(a);
      break;
    }
    case ModelKind::VECM: {
      VecmParameters v;
      v.alpha = detail::vector_from_json(p.at("alpha"));
      v.beta = detail::vector_from_json(p.at("beta"));
      v.coint_intercept = p.at("coint_intercept").get<double>();
      for (const auto& g : p.at("gamma")) v.gamma.push_back(detail::matrix_from_json(g, n_exog + 1));
      v.intercept = detail::vector_from_json(p.at("intercept"));
      v.tail_levels = detail::matrix_from_json(p.at("tail_levels"), n_exog + 1);
      model.parameters = std::move(v);
      break;
    }
    case ModelKind::LSTM: {
      LstmParameters l;
      const auto& w = p.at("weights");
      l.weights.input = detail::matrix_from_json(w.at("input"), n_exog + 1);
      l.weights.recurrent = detail::matrix_from_json(w.at("recurrent"));
      l.weights.bias = detail::vector_from_json(w.at("bias"));
      l.weights.head = detail::vector_from_json(w.at("head"));
      l.weights.head_bias = w.at("head_bias").get<double>();
      l.means = p.at("means").get<std::vector<double>>();
      l.scales = p.at("scales").get<std::vector<double>>();
      l.trained = p.at("trained").get<bool>();
      l.loss_history = p.at("loss_history").get<std::vector<double>>();
      l.tail_inputs = detail::matrix_from_json(p.at("tail_inputs"), n_exog + 1);
      model.parameters = std::move(l);
      break;
    }
  }
  return model;
}

inline void to_json(nlohmann::json& j, const Forecast& f) {
  j = {{"model_kind", f.model_kind}, {"horizon", f.horizon}, {"values", f.values}, {"origin", format_date(f.origin)}};
}

inline void from_json(const nlohmann::json& j, Forecast& f) {
  f.model_kind = j.at("model_kind").get<ModelKind>();
  f.horizon = j.at("horizon").get<std::size_t>();
  f.values = j.at("values").get<std::vector<double>>();
  const auto origin = parse_date(j.at("origin").get<std::string>());
  if (!origin) throw Error(Errc::ParseError, "bad forecast origin");
  f.origin = *origin;
}

inline void to_json(nlohmann::json& j, const ImpactSummary& s) {
  j = {{"variable", s.variable},
       {"available", s.available},
       {"mean_impact", s.mean_impact ? nlohmann::json(*s.mean_impact) : nlohmann::json(nullptr)},
       {"std_impact", s.std_impact ? nlohmann::json(*s.std_impact) : nlohmann::json(nullptr)}};
}

}  // namespace whatif
