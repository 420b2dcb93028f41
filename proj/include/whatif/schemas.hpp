// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include <json.hpp>

namespace whatif::schemas {

using nlohmann::json;

namespace detail {

inline json object(json properties, json required, bool closed = true) {
  return {{"type", "object"},
          {"properties", std::move(properties)},
          {"required", std::move(required)},
          {"additionalProperties", !closed}};
}

inline json array_of(json items) { return {{"type", "array"}, {"items", std::move(items)}}; }
inline json map_of(json values) { return {{"type", "object"}, {"additionalProperties", std::move(values)}}; }

inline const json kString{{"type", "string"}};
inline const json kNumber{{"type", "number"}};
inline const json kInteger{{"type", "integer"}, {"minimum", 0}};
inline const json kBoolean{{"type", "boolean"}};
inline const json kNumberOrNull{{"type", json::array({"number", "null"})}};
inline const json kModelKind{{"type", "string"}, {"enum", {"MLR", "ARIMAX", "VECM", "LSTM"}}};

}  // namespace detail

/// Accepted request body. Every field has a default; model names are
/// matched case-insensitively after validation.
inline json scenario_request() {
  using namespace detail;
  json perturbation = object({{"step", kInteger}, {"value", kNumber}}, {"step", "value"});
  json selection = array_of(kString);
  selection["minItems"] = 1;
  return object({{"route_id", kString},
                 {"horizon", {{"type", "integer"}, {"minimum", 1}}},
                 {"forward_window", {{"type", "integer"}, {"minimum", 1}}},
                 {"perturbations", map_of(array_of(perturbation))},
                 {"model_selection", selection}},
                json::array());
}

inline json scenario() {
  using namespace detail;
  json perturbation = object({{"step", kInteger}, {"value", kNumber}}, {"step", "value"});
  json selection = array_of(kModelKind);
  selection["minItems"] = 1;
  return object({{"route_id", kString},
                 {"horizon", {{"type", "integer"}, {"minimum", 1}}},
                 {"forward_window", {{"type", "integer"}, {"minimum", 1}}},
                 {"perturbations", map_of(array_of(perturbation))},
                 {"model_selection", selection}},
                {"route_id", "horizon", "forward_window", "perturbations", "model_selection"});
}

inline json forecast() {
  using namespace detail;
  return object({{"model_kind", kModelKind}, {"horizon", kInteger}, {"values", array_of(kNumber)}, {"origin", kString}},
                {"model_kind", "horizon", "values", "origin"});
}

inline json scenario_run() {
  using namespace detail;
  return object({{"run_id", kInteger},
                 {"created_at", kString},
                 {"scenario", scenario()},
                 {"baseline", map_of(forecast())},
                 {"whatif", map_of(forecast())},
                 {"diff", map_of(array_of(kNumber))},
                 {"mean_diff_per_model", map_of(kNumber)},
                 {"overall_mean_diff", kNumber}},
                {"run_id", "created_at", "scenario", "baseline", "whatif", "diff", "mean_diff_per_model",
                 "overall_mean_diff"});
}

inline json history() { return detail::array_of(scenario_run()); }

inline json frame() {
  using namespace detail;
  return object({{"index", array_of(kString)},
                 {"variables", array_of(kString)},
                 {"values", array_of(array_of(kNumberOrNull))},
                 {"metadata", map_of(kNumber)}},
                {"index", "variables", "values"});
}

inline json routes() {
  using namespace detail;
  return array_of(object({{"route_id", kString},
                          {"target", kString},
                          {"exogenous", array_of(kString)},
                          {"variables", array_of(kString)},
                          {"start", kString},
                          {"end", kString},
                          {"rows", kInteger},
                          {"models", array_of(kModelKind)},
                          {"has_vessels", kBoolean}},
                         {"route_id", "target", "exogenous", "variables", "start", "end", "rows", "models",
                          "has_vessels"}));
}

inline json scorecard() {
  using namespace detail;
  return object({{"model_kind", kModelKind},
                 {"rmse", kNumber},
                 {"mae", kNumber},
                 {"mape", kNumberOrNull},
                 {"n_folds", kInteger},
                 {"horizon", kInteger},
                 {"per_fold_errors", array_of(kNumber)}},
                {"model_kind", "rmse", "mae", "mape", "n_folds", "horizon", "per_fold_errors"});
}

inline json models() {
  using namespace detail;
  return object({{"metric", {{"type", "string"}, {"enum", {"rmse", "mae", "mape"}}}},
                 {"scorecards", array_of(scorecard())},
                 {"ranking", array_of(kModelKind)}},
                {"metric", "scorecards", "ranking"});
}

inline json coefficients() {
  using namespace detail;
  return array_of(object({{"model_kind", kModelKind},
                          {"variable", kString},
                          {"available", kBoolean},
                          {"mean_impact", kNumberOrNull},
                          {"std_impact", kNumberOrNull}},
                         {"model_kind", "variable", "available", "mean_impact", "std_impact"}));
}

inline json vessel() {
  using namespace detail;
  return object({{"imo", kInteger},
                 {"timestamp", kString},
                 {"lat", kNumber},
                 {"lon", kNumber},
                 {"heading", kNumber},
                 {"speed_knots", kNumber},
                 {"cargo_status", {{"type", "string"}, {"enum", {"ballast", "laden"}}}}},
                {"imo", "timestamp", "lat", "lon", "heading", "speed_knots", "cargo_status"});
}

inline json vessels() {
  using namespace detail;
  return object({{"route_id", kString},
                 {"at", {{"type", json::array({"string", "null"})}}},
                 {"status", {{"type", "string"}, {"enum", {"ballast", "laden", "all"}}}},
                 {"vessels", array_of(vessel())},
                 {"supply", frame()}},
                {"route_id", "at", "status", "vessels", "supply"});
}

inline json error() {
  using namespace detail;
  return object({{"error", object({{"code", kString}, {"message", kString}, {"path", kString}}, {"code", "message"})}},
                {"error"});
}

/// Every published schema by name.
inline json all() {
  return {{"scenario_request", scenario_request()}, {"scenario", scenario()},   {"scenario_run", scenario_run()},
          {"history", history()},                   {"frame", frame()},         {"routes", routes()},
          {"models", models()},                     {"coefficients", coefficients()},
          {"vessels", vessels()},                   {"error", error()}};
}

}  // namespace whatif::schemas
