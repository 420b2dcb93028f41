// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "whatif/models.hpp"
#include "whatif/timeseries.hpp"

namespace whatif {

struct Perturbation {
  std::size_t step = 0;  // 0-based future index
  double value = 0.0;    // in the variable's own units
};

struct Scenario {
  std::string route_id;
  std::size_t horizon = 4;
  std::size_t forward_window = 1;
  std::map<std::string, std::vector<Perturbation>> perturbations;
  std::vector<ModelKind> model_selection{kAllModelKinds.begin(), kAllModelKinds.end()};
};

/// Record of one what-if execution. `diff[m][t]` is exactly
/// `whatif[m].values[t] - baseline[m].values[t]`.
struct ScenarioRun {
  std::uint64_t run_id = 0;
  Timestamp created_at{};
  Scenario scenario;
  std::map<ModelKind, Forecast> baseline;
  std::map<ModelKind, Forecast> whatif;
  std::map<ModelKind, std::vector<double>> diff;
  std::map<ModelKind, double> mean_diff_per_model;
  double overall_mean_diff = 0.0;
};

using ModelSet = std::map<ModelKind, FittedModel>;

/// Structural checks that need no data.
inline void check_scenario_shape(const Scenario& s) {
  if (s.horizon == 0) throw Error(Errc::InvalidScenario, "horizon must be >= 1");
  if (s.forward_window == 0) throw Error(Errc::InvalidScenario, "forward_window must be >= 1");
  if (s.model_selection.empty()) throw Error(Errc::InvalidScenario, "model_selection is empty");
  std::set<ModelKind> kinds(s.model_selection.begin(), s.model_selection.end());
  if (kinds.size() != s.model_selection.size()) throw Error(Errc::InvalidScenario, "duplicate model in selection");
  for (const auto& [var, list] : s.perturbations) {
    std::set<std::size_t> steps;
    for (const auto& p : list) {
      if (p.step >= s.horizon)
        throw Error(Errc::InvalidScenario, "perturbation of '" + var + "' at step " + std::to_string(p.step) +
                                               " is beyond horizon " + std::to_string(s.horizon));
      if (!steps.insert(p.step).second)
        throw Error(Errc::InvalidScenario, "duplicate perturbation step " + std::to_string(p.step) + " for '" + var + "'");
      if (!std::isfinite(p.value)) throw Error(Errc::InvalidScenario, "non-finite perturbation value for '" + var + "'");
    }
  }
}

/// Future exogenous paths: each variable's last observed value carried over
/// the whole horizon, then each perturbation overwrites its step and holds
/// until the next perturbation of the same variable (drag-then-hold).
/// Perturbed variables are included even when not listed in `exog_vars`.
inline ExogPaths build_exog_paths(const TimeSeriesFrame& frame, const Scenario& scenario,
                                  const std::vector<std::string>& exog_vars) {
  check_scenario_shape(scenario);
  std::set<std::string> vars(exog_vars.begin(), exog_vars.end());
  for (const auto& [var, list] : scenario.perturbations) vars.insert(var);

  ExogPaths paths;
  for (const auto& var : vars) {
    const auto col = frame.column(var);
    const auto last = last_observed(col);
    if (!last) throw Error(Errc::EmptySeries, "'" + var + "' has no observed value");
    std::vector<double> path(scenario.horizon, *last);
    if (const auto it = scenario.perturbations.find(var); it != scenario.perturbations.end()) {
      auto sorted = it->second;
      std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.step < b.step; });
      for (const auto& p : sorted) std::fill(path.begin() + static_cast<std::ptrdiff_t>(p.step), path.end(), p.value);
    }
    paths.emplace(var, std::move(path));
  }
  return paths;
}

// ---------------------------------------------------------------------------
// History

struct RunSummary {
  std::uint64_t run_id = 0;
  Timestamp created_at{};
  std::string route_id;
  std::vector<ModelKind> models;
  std::map<ModelKind, double> mean_diff_per_model;
  double overall_mean_diff = 0.0;
};

inline nlohmann::json run_to_json(const ScenarioRun& run);
inline ScenarioRun run_from_json(const nlohmann::json& j);

/// Append-only, linearizable run log. With a file path every append is
/// written as one JSON line and flushed before the call returns; existing
/// lines are loaded on construction.
class HistoryStore {
 public:
  HistoryStore() = default;

  explicit HistoryStore(std::filesystem::path log_path) : path_(std::move(log_path)) {
    if (std::filesystem::exists(*path_)) {
      std::ifstream in(*path_);
      std::string line;
      std::size_t line_no = 0;
      while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
          auto run = run_from_json(nlohmann::json::parse(line));
          if (!runs_.empty() && run.run_id <= runs_.back().run_id)
            throw Error(Errc::ParseError, "run ids not increasing", line_no);
          runs_.push_back(std::move(run));
        } catch (const nlohmann::json::exception& e) {
          throw Error(Errc::ParseError, path_->string() + " line " + std::to_string(line_no) + ": " + e.what(),
                      line_no);
        }
      }
    } else if (path_->has_parent_path()) {
      std::filesystem::create_directories(path_->parent_path());
    }
    out_.open(*path_, std::ios::app);
    if (!out_) throw Error(Errc::InvalidConfig, "cannot open history log " + path_->string());
  }

  HistoryStore(const HistoryStore&) = delete;
  HistoryStore& operator=(const HistoryStore&) = delete;

  /// Assigns the next run id and a creation time, persists, and returns the
  /// stored record.
  ScenarioRun append(ScenarioRun run) {
    std::lock_guard lock(mutex_);
    run.run_id = runs_.empty() ? 1 : runs_.back().run_id + 1;
    run.created_at = std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
    if (out_.is_open()) {
      out_ << run_to_json(run).dump() << '\n';
      out_.flush();
    }
    runs_.push_back(run);
    return run;
  }

  std::vector<ScenarioRun> runs(const std::optional<std::string>& route_id = std::nullopt) const {
    std::lock_guard lock(mutex_);
    std::vector<ScenarioRun> out;
    for (const auto& r : runs_)
      if (!route_id || r.scenario.route_id == *route_id) out.push_back(r);
    return out;
  }

  std::size_t size() const {
    std::lock_guard lock(mutex_);
    return runs_.size();
  }

 private:
  mutable std::mutex mutex_;
  std::vector<ScenarioRun> runs_;
  std::optional<std::filesystem::path> path_;
  std::ofstream out_;
};

inline std::vector<RunSummary> history_list(const HistoryStore& store,
                                            const std::optional<std::string>& route_id = std::nullopt) {
  std::vector<RunSummary> out;
  for (const auto& r : store.runs(route_id))
    out.push_back({r.run_id, r.created_at, r.scenario.route_id, r.scenario.model_selection, r.mean_diff_per_model,
                   r.overall_mean_diff});
  return out;
}

inline const std::vector<double>& diff_curve(const ScenarioRun& run, ModelKind model) {
  const auto it = run.diff.find(model);
  if (it == run.diff.end())
    throw Error(Errc::ModelNotInRun, std::string(to_string(model)) + " is not part of run " + std::to_string(run.run_id));
  return it->second;
}

/// Forecasts every selected model twice, with default and perturbed paths,
/// and records the per-model difference. Both passes go through the same
/// code with only the paths differing, so an empty perturbation set yields
/// exact zeros. The run is appended to `history` when one is given.
inline ScenarioRun run_whatif(const ModelSet& models, const TimeSeriesFrame& frame, const Scenario& scenario,
                              HistoryStore* history = nullptr) {
  check_scenario_shape(scenario);
  std::set<std::string> exog_union;
  std::set<std::string> targets;
  for (auto kind : scenario.model_selection) {
    const auto it = models.find(kind);
    if (it == models.end()) throw Error(Errc::ModelNotFitted, std::string(to_string(kind)) + " is not fitted");
    targets.insert(it->second.spec.target);
    exog_union.insert(it->second.spec.exogenous.begin(), it->second.spec.exogenous.end());
  }
  for (const auto& [var, list] : scenario.perturbations) {
    if (targets.count(var)) throw Error(Errc::InvalidScenario, "cannot perturb target variable '" + var + "'");
    if (!frame.has_variable(var)) throw Error(Errc::InvalidScenario, "unknown variable '" + var + "'");
  }

  const std::vector<std::string> exog(exog_union.begin(), exog_union.end());
  Scenario unperturbed = scenario;
  unperturbed.perturbations.clear();
  const auto base_paths = build_exog_paths(frame, unperturbed, exog);
  const auto whatif_paths = build_exog_paths(frame, scenario, exog);

  ScenarioRun run;
  run.scenario = scenario;
  double total = 0.0;
  for (auto kind : scenario.model_selection) {
    const auto& model = models.at(kind);
    auto base = forecast(model, base_paths, scenario.horizon);
    auto alt = forecast(model, whatif_paths, scenario.horizon);
    std::vector<double> d(scenario.horizon);
    double sum = 0.0;
    for (std::size_t t = 0; t < scenario.horizon; ++t) {
      d[t] = alt.values[t] - base.values[t];
      sum += d[t];
    }
    const double mean = sum / static_cast<double>(scenario.horizon);
    run.mean_diff_per_model[kind] = mean;
    total += mean;
    run.diff[kind] = std::move(d);
    run.baseline[kind] = std::move(base);
    run.whatif[kind] = std::move(alt);
  }
  run.overall_mean_diff = total / static_cast<double>(scenario.model_selection.size());
  if (history) return history->append(std::move(run));
  return run;
}

// ---------------------------------------------------------------------------
// JSON

inline void to_json(nlohmann::json& j, const Scenario& s) {
  nlohmann::json perturbations = nlohmann::json::object();
  for (const auto& [var, list] : s.perturbations) {
    auto arr = nlohmann::json::array();
    for (const auto& p : list) arr.push_back({{"step", p.step}, {"value", p.value}});
    perturbations[var] = std::move(arr);
  }
  j = {{"route_id", s.route_id},
       {"horizon", s.horizon},
       {"forward_window", s.forward_window},
       {"perturbations", std::move(perturbations)},
       {"model_selection", s.model_selection}};
}

inline void from_json(const nlohmann::json& j, Scenario& s) {
  s = Scenario{};
  s.route_id = j.value("route_id", std::string{});
  s.horizon = j.value("horizon", std::size_t{4});
  s.forward_window = j.value("forward_window", std::size_t{1});
  if (j.contains("perturbations"))
    for (const auto& [var, list] : j.at("perturbations").items()) {
      auto& dst = s.perturbations[var];
      for (const auto& p : list) dst.push_back({p.at("step").get<std::size_t>(), p.at("value").get<double>()});
    }
  if (j.contains("model_selection")) s.model_selection = j.at("model_selection").get<std::vector<ModelKind>>();
}

namespace detail {
template <class V, class F>
nlohmann::json kind_map_json(const std::map<ModelKind, V>& m, F&& conv) {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& [k, v] : m) out[std::string(to_string(k))] = conv(v);
  return out;
}

template <class V, class F>
std::map<ModelKind, V> kind_map_from_json(const nlohmann::json& j, F&& conv) {
  std::map<ModelKind, V> out;
  for (const auto& [k, v] : j.items()) {
    const auto kind = parse_model_kind(k);
    if (!kind) throw Error(Errc::ParseError, "unknown model kind '" + k + "'");
    out.emplace(*kind, conv(v));
  }
  return out;
}
}  // namespace detail

inline nlohmann::json run_to_json(const ScenarioRun& run) {
  auto as_json = [](const auto& v) { return nlohmann::json(v); };
  return {{"run_id", run.run_id},
          {"created_at", format_timestamp(run.created_at)},
          {"scenario", run.scenario},
          {"baseline", detail::kind_map_json(run.baseline, as_json)},
          {"whatif", detail::kind_map_json(run.whatif, as_json)},
          {"diff", detail::kind_map_json(run.diff, as_json)},
          {"mean_diff_per_model", detail::kind_map_json(run.mean_diff_per_model, as_json)},
          {"overall_mean_diff", run.overall_mean_diff}};
}

inline ScenarioRun run_from_json(const nlohmann::json& j) {
  ScenarioRun run;
  run.run_id = j.at("run_id").get<std::uint64_t>();
  const auto ts = parse_timestamp(j.at("created_at").get<std::string>());
  if (!ts) throw Error(Errc::ParseError, "bad created_at");
  run.created_at = *ts;
  run.scenario = j.at("scenario").get<Scenario>();
  run.baseline = detail::kind_map_from_json<Forecast>(j.at("baseline"), [](const auto& v) { return v.template get<Forecast>(); });
  run.whatif = detail::kind_map_from_json<Forecast>(j.at("whatif"), [](const auto& v) { return v.template get<Forecast>(); });
  run.diff = detail::kind_map_from_json<std::vector<double>>(
      j.at("diff"), [](const auto& v) { return v.template get<std::vector<double>>(); });
  run.mean_diff_per_model = detail::kind_map_from_json<double>(j.at("mean_diff_per_model"),
                                                               [](const auto& v) { return v.template get<double>(); });
  run.overall_mean_diff = j.at("overall_mean_diff").get<double>();
  return run;
}

inline void to_json(nlohmann::json& j, const RunSummary& s) {
  j = {{"run_id", s.run_id},
       {"created_at", format_timestamp(s.created_at)},
       {"route_id", s.route_id},
       {"models", s.models},
       {"mean_diff_per_model", detail::kind_map_json(s.mean_diff_per_model, [](double v) { return nlohmann::json(v); })},
       {"overall_mean_diff", s.overall_mean_diff}};
}

}  // namespace whatif
