// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "whatif/model.hpp"
#include "whatif/spatial.hpp"

namespace whatif {

struct RouteConfig {
  std::string route_id;
  std::string target;
  std::vector<std::string> exogenous;
  std::vector<std::string> vecm_system;  // VECM partners of the target; defaults to exogenous
  std::filesystem::path data_path;
  std::optional<std::filesystem::path> vessels_path;
  std::optional<PortRegion> port;
  double approach_tolerance_deg = kDefaultApproachToleranceDeg;
  std::vector<ModelSpec> models;
  std::size_t backtest_folds = 8;
  std::size_t backtest_horizon = 1;
};

struct ServiceConfig {
  std::filesystem::path data_dir = ".";
  std::vector<RouteConfig> routes;
};

namespace detail {

inline std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  for (auto part : split(s))
    if (!part.empty()) out.emplace_back(part);
  return out;
}

/// Splits "a, b(1,2), c" at top-level commas.
inline std::vector<std::string> split_specs(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  int depth = 0;
  for (char c : s) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == ',' && depth == 0) {
      if (!trim(cur).empty()) out.emplace_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!trim(cur).empty()) out.emplace_back(trim(cur));
  return out;
}

}  // namespace detail

/// Parses "mlr", "arimax(p,d,q)", "vecm(lag)" or
/// "lstm(window,hidden,epochs,learning_rate,seed)"; trailing arguments may
/// be omitted.
inline ModelSpec parse_model_entry(std::string_view text) {
  text = detail::trim(text);
  const auto open = text.find('(');
  const auto name = detail::trim(text.substr(0, open));
  const auto kind = parse_model_kind(name);
  if (!kind) throw Error(Errc::InvalidConfig, "unknown model '" + std::string(name) + "'");
  std::vector<double> args;
  if (open != std::string_view::npos) {
    if (text.back() != ')') throw Error(Errc::InvalidConfig, "unbalanced parentheses in '" + std::string(text) + "'");
    for (auto a : detail::split(text.substr(open + 1, text.size() - open - 2))) {
      const auto v = parse_number(a);
      if (!v) throw Error(Errc::InvalidConfig, "bad argument '" + std::string(a) + "' in '" + std::string(text) + "'");
      args.push_back(*v);
    }
  }
  auto integer = [&](std::size_t i, int fallback) {
    if (i >= args.size()) return fallback;
    if (args[i] != std::floor(args[i]) || args[i] < 0)
      throw Error(Errc::InvalidConfig, "argument " + std::to_string(i + 1) + " of '" + std::string(text) +
                                           "' must be a non-negative integer");
    return static_cast<int>(args[i]);
  };
  const std::size_t max_args[] = {0, 3, 1, 5};
  if (args.size() > max_args[static_cast<int>(*kind)])
    throw Error(Errc::InvalidConfig, "too many arguments in '" + std::string(text) + "'");
  ModelSpec spec;
  spec.kind = *kind;
  switch (*kind) {
    case ModelKind::MLR: break;
    case ModelKind::ARIMAX: spec.arimax = {integer(0, 1), integer(1, 1), integer(2, 1)}; break;
    case ModelKind::VECM: spec.vecm.lag_order = integer(0, 1); break;
    case ModelKind::LSTM:
      spec.lstm.window = integer(0, spec.lstm.window);
      spec.lstm.hidden_size = integer(1, spec.lstm.hidden_size);
      spec.lstm.epochs = integer(2, spec.lstm.epochs);
      if (args.size() > 3) spec.lstm.learning_rate = args[3];
      spec.lstm.seed = static_cast<std::uint64_t>(integer(4, static_cast<int>(spec.lstm.seed)));
      break;
  }
  return spec;
}

/// Key-value configuration:
///
///   data_dir = state
///   [route C3]
///   target = c3_rate
///   exogenous = brazil_loading, iron_ore_price
///   data = c3.csv
///   vessels = vessels.csv
///   port = qingdao 36.07 120.38 100
///   models = mlr, arimax(1,0,0), vecm(1), lstm(4,8,200,0.05,1)
///
/// Relative paths resolve against `base_dir`. '#' starts a comment.
inline ServiceConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = ".") {
  ServiceConfig cfg;
  cfg.data_dir = base_dir;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  RouteConfig* route = nullptr;
  std::set<std::string> seen_keys;

  auto fail = [&](const std::string& msg) -> Error {
    return Error(Errc::InvalidConfig, "line " + std::to_string(line_no) + ": " + msg, line_no);
  };
  auto resolve = [&](std::string_view p) {
    std::filesystem::path path{std::string(p)};
    return path.is_absolute() ? path : base_dir / path;
  };
  auto finish_route = [&] {
    if (!route) return;
    const std::string where = "route " + route->route_id + ": ";
    if (route->target.empty()) throw Error(Errc::InvalidConfig, where + "missing 'target'");
    if (route->data_path.empty()) throw Error(Errc::InvalidConfig, where + "missing 'data'");
    if (route->vecm_system.empty()) route->vecm_system = route->exogenous;
    for (auto& spec : route->models) {
      spec.target = route->target;
      spec.exogenous = spec.kind == ModelKind::VECM ? route->vecm_system : route->exogenous;
    }
  };

  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw fail("unterminated section header");
      const auto inner = detail::trim(line.substr(1, line.size() - 2));
      if (inner.substr(0, 6) != "route " || detail::trim(inner.substr(6)).empty())
        throw fail("section must be '[route <id>]'");
      finish_route();
      const std::string id(detail::trim(inner.substr(6)));
      for (const auto& r : cfg.routes)
        if (r.route_id == id) throw fail("duplicate route '" + id + "'");
      cfg.routes.push_back({});
      route = &cfg.routes.back();
      route->route_id = id;
      seen_keys.clear();
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw fail("expected 'key = value'");
    const std::string key(detail::trim(line.substr(0, eq)));
    const auto value = detail::trim(line.substr(eq + 1));
    if (!seen_keys.insert(key).second) throw fail("duplicate key '" + key + "'");

    if (!route) {
      if (key == "data_dir")
        cfg.data_dir = resolve(value);
      else
        throw fail("unknown top-level key '" + key + "'");
      continue;
    }
    try {
      if (key == "target") {
        route->target = std::string(value);
      } else if (key == "exogenous") {
        route->exogenous = detail::split_list(value);
      } else if (key == "vecm_system") {
        route->vecm_system = detail::split_list(value);
      } else if (key == "data") {
        route->data_path = resolve(value);
      } else if (key == "vessels") {
        route->vessels_path = resolve(value);
      } else if (key == "port") {
        std::istringstream fields{std::string(value)};
        PortRegion port;
        if (!(fields >> port.name >> port.center.lat >> port.center.lon >> port.radius_km) || !(fields >> std::ws).eof())
          throw fail("port must be '<name> <lat> <lon> <radius_km>'");
        check_coordinate(port.center);
        if (!(port.radius_km > 0)) throw fail("port radius must be positive");
        route->port = port;
      } else if (key == "approach_tolerance") {
        const auto v = parse_number(value);
        if (!v || *v <= 0 || *v > 180) throw fail("approach_tolerance must be in (0, 180]");
        route->approach_tolerance_deg = *v;
      } else if (key == "models") {
        route->models.clear();
        std::set<ModelKind> kinds;
        for (const auto& entry : detail::split_specs(value)) {
          route->models.push_back(parse_model_entry(entry));
          if (!kinds.insert(route->models.back().kind).second) throw fail("model listed twice: " + entry);
        }
      } else if (key == "backtest_folds" || key == "backtest_horizon") {
        const auto v = parse_number(value);
        if (!v || *v < 1 || *v != std::floor(*v)) throw fail(key + " must be a positive integer");
        (key == "backtest_folds" ? route->backtest_folds : route->backtest_horizon) = static_cast<std::size_t>(*v);
      } else {
        throw fail("unknown key '" + key + "'");
      }
    } catch (const Error& e) {
      if (e.row()) throw;
      throw fail(e.message());
    }
  }
  finish_route();
  return cfg;
}

inline ServiceConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::InvalidConfig, "cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.has_parent_path() ? path.parent_path() : std::filesystem::path("."));
}

}  // namespace whatif
