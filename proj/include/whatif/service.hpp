// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "whatif/config.hpp"
#include "whatif/eval.hpp"
#include "whatif/json_schema.hpp"
#include "whatif/models.hpp"
#include "whatif/scenario.hpp"
#include "whatif/schemas.hpp"
#include "whatif/spatial.hpp"

namespace whatif {

struct Response {
  int status = 200;
  std::string body;
};

using Query = std::multimap<std::string, std::string>;

/// A rejected request field, located by JSON pointer.
struct RequestError : std::runtime_error {
  RequestError(int status_code, std::string error_code, const std::string& message, std::string field)
      : std::runtime_error(message), status(status_code), code(std::move(error_code)), pointer(std::move(field)) {}
  int status;
  std::string code;
  std::string pointer;
};

/// Turns a what-if request body into a Scenario for one route. Missing
/// fields take their defaults; an absent model selection means every fitted
/// model.
inline Scenario scenario_from_request(const nlohmann::json& request, const std::string& route_id,
                                      const TimeSeriesFrame& frame, const ModelSet& models) {
  if (auto violation = validate_json(request, schemas::scenario_request()))
    throw RequestError(400, "SchemaViolation", violation->message, violation->path);
  if (request.contains("model_selection"))
    for (std::size_t i = 0; i < request["model_selection"].size(); ++i)
      if (!parse_model_kind(request["model_selection"][i].get<std::string>()))
        throw RequestError(400, "SchemaViolation", "unknown model " + request["model_selection"][i].dump(),
                           "/model_selection/" + std::to_string(i));
  auto scenario = request.get<Scenario>();
  if (!request.contains("model_selection")) {
    scenario.model_selection.clear();
    for (const auto& [kind, m] : models) scenario.model_selection.push_back(kind);
    if (scenario.model_selection.empty()) throw RequestError(409, "ModelNotFitted", "route has no fitted models", "");
  }
  if (scenario.route_id.empty()) scenario.route_id = route_id;
  if (scenario.route_id != route_id)
    throw RequestError(400, "InvalidScenario", "route_id does not match '" + route_id + "'", "/route_id");
  std::set<std::string> targets;
  for (auto kind : scenario.model_selection)
    if (const auto it = models.find(kind); it != models.end()) targets.insert(it->second.spec.target);
  for (const auto& [var, list] : scenario.perturbations) {
    const auto pointer = "/perturbations/" + detail::escape_pointer(var);
    if (targets.count(var))
      throw RequestError(400, "InvalidScenario", "cannot perturb target variable '" + var + "'", pointer);
    if (!frame.has_variable(var)) throw RequestError(400, "InvalidScenario", "unknown variable '" + var + "'", pointer);
    for (std::size_t i = 0; i < list.size(); ++i)
      if (list[i].step >= scenario.horizon)
        throw RequestError(400, "InvalidScenario", "step beyond horizon", pointer + "/" + std::to_string(i) + "/step");
  }
  return scenario;
}

/// State of one route, built once at startup and never mutated.
struct RouteState {
  RouteConfig config;
  TimeSeriesFrame frame;
  std::vector<VesselRecord> vessels;
  std::optional<TimeSeriesFrame> supply;
  ModelSet models;
  std::vector<ModelScorecard> scorecards;  // in model kind order
};

/// Loads the route's files, fits every configured model and runs its
/// walk-forward backtest.
inline RouteState build_route(const RouteConfig& cfg, bool parallel_backtest = false) {
  const std::string where = "route " + cfg.route_id + ": ";
  auto read = [&](const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw Error(Errc::InvalidConfig, where + "cannot read " + p.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  auto rethrow = [&](const Error& e, const std::filesystem::path& p) {
    return Error(e.code(), where + p.filename().string() + ": " + e.message(), e.row());
  };

  RouteState route{cfg, {}, {}, {}, {}, {}};
  try {
    route.frame = load_frame(read(cfg.data_path));
  } catch (const Error& e) {
    throw rethrow(e, cfg.data_path);
  }
  if (route.frame.size() == 0) throw Error(Errc::InvalidConfig, where + "data file has no rows");
  if (!route.frame.has_variable(cfg.target))
    throw Error(Errc::InvalidConfig, where + "target '" + cfg.target + "' not in data");
  if (cfg.vessels_path) {
    try {
      route.vessels = load_vessels(read(*cfg.vessels_path));
    } catch (const Error& e) {
      throw rethrow(e, *cfg.vessels_path);
    }
    if (cfg.port && !route.vessels.empty())
      route.supply = aggregate_supply(route.vessels, *cfg.port, cfg.approach_tolerance_deg);
  }
  for (const auto& spec : cfg.models) {
    try {
      route.models.emplace(spec.kind, fit(route.frame, spec));
      route.scorecards.push_back(
          walk_forward_backtest(spec, route.frame, cfg.backtest_folds, cfg.backtest_horizon, parallel_backtest));
    } catch (const Error& e) {
      throw Error(e.code(), where + std::string(to_string(spec.kind)) + ": " + e.message());
    }
  }
  std::sort(route.scorecards.begin(), route.scorecards.end(), [](const auto& a, const auto& b) {
    return static_cast<int>(a.model_kind) < static_cast<int>(b.model_kind);
  });
  return route;
}

/// The HTTP API as a pure request -> response function over immutable route
/// state and the shared history log. POST /routes/{id}/whatif is the only
/// mutating request.
class Service {
 public:
  explicit Service(const ServiceConfig& cfg, bool parallel_backtest = false)
      : history_(std::make_unique<HistoryStore>(cfg.data_dir / "history.ndjson")) {
    for (const auto& rc : cfg.routes) routes_.emplace(rc.route_id, build_route(rc, parallel_backtest));
  }

  const HistoryStore& history() const { return *history_; }
  const std::map<std::string, RouteState>& routes() const { return routes_; }

  Response handle(std::string_view method, std::string_view path, const Query& query, std::string_view body) const {
    try {
      return dispatch(method, path, query, body);
    } catch (const Error& e) {
      return error(status_for(e.code()), std::string(to_string(e.code())), e.message());
    } catch (const nlohmann::json::exception& e) {
      return error(400, "ParseError", e.what());
    }
  }

  static int status_for(Errc code) {
    switch (code) {
      case Errc::ModelNotFitted: return 409;
      case Errc::FitDidNotConverge:
      case Errc::DivergedTraining:
      case Errc::SingularDesign: return 500;
      default: return 400;
    }
  }

 private:
  static Response json_response(const nlohmann::json& j) { return {200, j.dump()}; }

  static Response error(int status, const std::string& code, const std::string& message,
                        const std::optional<std::string>& pointer = std::nullopt) {
    nlohmann::json e{{"code", code}, {"message", message}};
    if (pointer) e["path"] = *pointer;
    return {status, nlohmann::json{{"error", e}}.dump()};
  }

  static std::optional<std::string> param(const Query& q, const std::string& key) {
    const auto it = q.find(key);
    if (it == q.end()) return std::nullopt;
    return it->second;
  }

  static std::vector<std::string_view> segments(std::string_view path) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (start < path.size()) {
      if (path[start] == '/') {
        ++start;
        continue;
      }
      const auto end = path.find('/', start);
      out.push_back(path.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start));
      if (end == std::string_view::npos) break;
      start = end + 1;
    }
    return out;
  }

  Response dispatch(std::string_view method, std::string_view path, const Query& query, std::string_view body) const {
    const auto seg = segments(path);
    const bool get = method == "GET", post = method == "POST";
    if (seg.size() == 1 && seg[0] == "routes" && get) return list_routes();
    if (seg.size() == 1 && seg[0] == "vessels" && get) return list_vessels(query);
    if (seg.size() == 1 && seg[0] == "schemas" && get) return json_response(schemas::all());
    if (seg.size() == 3 && seg[0] == "routes") {
      const auto it = routes_.find(std::string(seg[1]));
      if (it == routes_.end()) return error(404, "NotFound", "unknown route '" + std::string(seg[1]) + "'");
      const auto& route = it->second;
      const auto leaf = seg[2];
      if (leaf == "series" && get) return series(route, query);
      if (leaf == "models" && get) return model_cards(route, query);
      if (leaf == "coefficients" && get) return coefficients(route);
      if (leaf == "history" && get) return json_response(run_list(route.config.route_id));
      if (leaf == "whatif" && post) return whatif(route, body);
      if (leaf == "series" || leaf == "models" || leaf == "coefficients" || leaf == "history" || leaf == "whatif")
        return error(405, "MethodNotAllowed", std::string(method) + " not allowed on " + std::string(path));
    }
    return error(404, "NotFound", "no endpoint " + std::string(method) + " " + std::string(path));
  }

  Response list_routes() const {
    auto out = nlohmann::json::array();
    for (const auto& [id, r] : routes_) {
      std::vector<ModelKind> kinds;
      for (const auto& [kind, m] : r.models) kinds.push_back(kind);
      out.push_back({{"route_id", id},
                     {"target", r.config.target},
                     {"exogenous", r.config.exogenous},
                     {"variables", r.frame.variables()},
                     {"start", format_date(r.frame.index().front())},
                     {"end", format_date(r.frame.index().back())},
                     {"rows", r.frame.size()},
                     {"models", kinds},
                     {"has_vessels", !r.vessels.empty()}});
    }
    return json_response(out);
  }

  Response series(const RouteState& route, const Query& query) const {
    const auto window = param(query, "window").value_or("all");
    if (window == "all") return json_response(nlohmann::json(route.frame));
    if (window == "near") {
      const auto n = std::min(kNearTermWeeks, route.frame.size());
      return json_response(nlohmann::json(route.frame.tail(n)));
    }
    return error(400, "InvalidWindow", "window must be 'all' or 'near'", "/window");
  }

  Response model_cards(const RouteState& route, const Query& query) const {
    const auto name = param(query, "metric").value_or("rmse");
    const auto metric = parse_metric(name);
    if (!metric) return error(400, "InvalidSpec", "metric must be rmse, mae or mape", "/metric");
    nlohmann::json out{{"metric", name}, {"scorecards", nlohmann::json::array()}, {"ranking", nlohmann::json::array()}};
    if (!route.scorecards.empty()) {
      const auto ranked = rank_models(route.scorecards, *metric);
      out["scorecards"] = ranked;
      for (const auto& c : ranked) out["ranking"].push_back(c.model_kind);
    }
    return json_response(out);
  }

  Response coefficients(const RouteState& route) const {
    auto out = nlohmann::json::array();
    for (const auto& [kind, model] : route.models)
      for (const auto& s : coefficient_impacts(model, route.frame)) {
        nlohmann::json j = s;
        j["model_kind"] = kind;
        out.push_back(std::move(j));
      }
    return json_response(out);
  }

  nlohmann::json run_list(const std::string& route_id) const {
    auto out = nlohmann::json::array();
    for (const auto& r : history_->runs(route_id)) out.push_back(run_to_json(r));
    return out;
  }

  Response whatif(const RouteState& route, std::string_view body) const {
    nlohmann::json request;
    try {
      request = body.empty() ? nlohmann::json::object() : nlohmann::json::parse(body);
    } catch (const nlohmann::json::parse_error& e) {
      return error(400, "ParseError", e.what(), "");
    }
    Scenario scenario;
    try {
      scenario = scenario_from_request(request, route.config.route_id, route.frame, route.models);
    } catch (const RequestError& e) {
      return error(e.status, e.code, e.what(), e.pointer);
    }
    return json_response(run_to_json(run_whatif(route.models, route.frame, scenario, history_.get())));
  }

  Response list_vessels(const Query& query) const {
    const auto route_id = param(query, "route");
    if (!route_id) return error(400, "InvalidSpec", "query parameter 'route' is required", "/route");
    const auto it = routes_.find(*route_id);
    if (it == routes_.end()) return error(404, "NotFound", "unknown route '" + *route_id + "'");
    const auto& route = it->second;

    BBox box;
    if (const auto text = param(query, "bbox")) {
      const auto parts = detail::split(*text);
      std::vector<double> v;
      for (auto p : parts)
        if (const auto x = parse_number(p)) v.push_back(*x);
      if (parts.size() != 4 || v.size() != 4)
        return error(400, "InvalidBBox", "bbox must be lat_min,lon_min,lat_max,lon_max", "/bbox");
      box = {v[0], v[1], v[2], v[3]};
    }
    const auto status = param(query, "status").value_or("all");
    if (status != "all" && status != "ballast" && status != "laden")
      return error(400, "InvalidSpec", "status must be ballast, laden or all", "/status");

    std::optional<Timestamp> at;
    if (const auto text = param(query, "at")) {
      at = parse_timestamp(*text);
      if (!at) return error(400, "ParseError", "bad timestamp '" + *text + "'", "/at");
    } else if (!route.vessels.empty()) {
      at = route.vessels.front().timestamp;
      for (const auto& v : route.vessels) at = std::max(*at, v.timestamp);
    }

    auto list = nlohmann::json::array();
    if (at) {
      for (const auto& v : vessels_in_view(route.vessels, box, *at))
        if (status == "all" || to_string(v.cargo_status) == status) list.push_back(v);
    } else {
      vessels_in_view({}, box, Timestamp{});  // validates the box
    }
    nlohmann::json supply = route.supply ? nlohmann::json(*route.supply)
                                         : nlohmann::json{{"index", nlohmann::json::array()},
                                                          {"variables", nlohmann::json::array()},
                                                          {"values", nlohmann::json::array()}};
    return json_response({{"route_id", *route_id},
                          {"at", at ? nlohmann::json(format_timestamp(*at)) : nlohmann::json(nullptr)},
                          {"status", status},
                          {"vessels", std::move(list)},
                          {"supply", std::move(supply)}});
  }

  std::unique_ptr<HistoryStore> history_;
  std::map<std::string, RouteState> routes_;
};

}  // namespace whatif
