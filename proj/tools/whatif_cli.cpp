// SPDX-License-Identifier: Apache-2.0
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "whatif/http.hpp"
#include "whatif/whatif.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace whatif;

namespace {

/// Failure in the inputs (as opposed to the command line). Exit code 1.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_text(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& out, const std::string& text) {
  if (out.empty() || out == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(out);
  if (!f) throw DataError("cannot write " + out);
  f << text;
}

std::string located(const fs::path& path, const Error& e) { return path.string() + ": " + e.what(); }

std::string fixed(double v, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

// ---------------------------------------------------------------------------
// gen-data

struct GenOptions {
  std::string kind;
  std::string out;
  std::uint64_t seed = 42;
  std::size_t weeks = 0;
  std::optional<double> sigma;
  std::optional<double> phi;
};

int run_gen(const GenOptions& o) {
  if (o.kind == "linear") {
    synth::LinearMarketConfig cfg;
    cfg.seed = o.seed;
    if (o.weeks) cfg.n_weeks = o.weeks;
    if (o.sigma) cfg.noise_sigma = *o.sigma;
    write_text(o.out, serialize_frame(synth::gen_linear_market(cfg)));
  } else if (o.kind == "cointegrated") {
    synth::CointegratedConfig cfg;
    cfg.seed = o.seed;
    if (o.weeks) cfg.n_weeks = o.weeks;
    if (o.sigma) cfg.sigma = *o.sigma;
    write_text(o.out, serialize_frame(synth::gen_cointegrated(cfg)));
  } else if (o.kind == "ar1") {
    synth::Ar1Config cfg;
    cfg.seed = o.seed;
    if (o.weeks) cfg.n_weeks = o.weeks;
    if (o.sigma) cfg.sigma = *o.sigma;
    if (o.phi) cfg.phi = *o.phi;
    write_text(o.out, serialize_frame(synth::gen_ar1(cfg)));
  } else if (o.kind == "vessels") {
    synth::VesselConfig cfg;
    cfg.seed = o.seed;
    if (o.weeks) cfg.n_weeks = o.weeks;
    write_text(o.out, serialize_vessels(synth::gen_vessels(cfg, synth::kDemoPort)));
  } else {
    if (o.out.empty() || o.out == "-") throw CLI::ValidationError("--out", "demo needs an output directory");
    synth::DemoOptions opt;
    opt.seed = o.seed;
    if (o.weeks) opt.n_weeks = o.weeks;
    std::cout << synth::write_demo_workspace(o.out, opt).string() << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// model specs on the command line

struct SpecOptions {
  std::string data;
  std::vector<std::string> models;
  std::string target;
  std::vector<std::string> exogenous;
  std::optional<std::uint64_t> seed;
};

TimeSeriesFrame load_data(const std::string& path) {
  try {
    return load_frame(read_text(path));
  } catch (const Error& e) {
    throw DataError(located(path, e));
  }
}

std::vector<ModelSpec> make_specs(const SpecOptions& o, const TimeSeriesFrame& frame) {
  const auto& vars = frame.variables();
  if (vars.empty()) throw DataError(o.data + ": no variables");
  const std::string target = o.target.empty() ? vars.front() : o.target;
  std::vector<std::string> exog = o.exogenous;
  if (exog.empty())
    for (const auto& v : vars)
      if (v != target) exog.push_back(v);
  std::vector<ModelSpec> specs;
  for (const auto& text : o.models) {
    ModelSpec spec;
    try {
      spec = parse_model_entry(text);
    } catch (const Error& e) {
      throw CLI::ValidationError("--model", e.message());
    }
    spec.target = target;
    spec.exogenous = exog;
    if (o.seed) spec.lstm.seed = *o.seed;
    specs.push_back(std::move(spec));
  }
  return specs;
}

void add_spec_options(CLI::App* cmd, SpecOptions& o, bool many) {
  cmd->add_option("--data", o.data, "Frame CSV")->required()->check(CLI::ExistingFile);
  auto* model = cmd->add_option("--model", o.models, "mlr | arimax(p,d,q) | vecm(lag) | lstm(w,h,epochs,lr,seed)");
  model->required();
  if (!many) model->expected(1);
  cmd->add_option("--target", o.target, "Target column (default: first column)");
  cmd->add_option("--exog", o.exogenous, "Exogenous columns (default: all others)")->delimiter(',');
  cmd->add_option("--seed", o.seed, "Overrides the LSTM initialisation seed");
}

// ---------------------------------------------------------------------------
// fit / backtest

int run_fit(const SpecOptions& o, const std::string& out) {
  const auto frame = load_data(o.data);
  const auto spec = make_specs(o, frame).front();
  write_text(out, model_to_json(fit(frame, spec)).dump(2) + "\n");
  return 0;
}

struct BacktestOptions {
  std::size_t folds = 8;
  std::size_t horizon = 1;
  std::string metric = "rmse";
  bool parallel = false;
  bool as_json = false;
};

int run_backtest(const SpecOptions& o, const BacktestOptions& b) {
  const auto frame = load_data(o.data);
  std::vector<ModelScorecard> cards;
  for (const auto& spec : make_specs(o, frame))
    cards.push_back(walk_forward_backtest(spec, frame, b.folds, b.horizon, b.parallel));
  cards = rank_models(std::move(cards), *parse_metric(b.metric));
  if (b.as_json) {
    std::cout << json{{"metric", b.metric}, {"scorecards", cards}}.dump(2) << "\n";
    return 0;
  }
  std::printf("%-8s %12s %12s %12s %6s %8s\n", "model", "rmse", "mae", "mape", "folds", "horizon");
  for (const auto& c : cards)
    std::printf("%-8s %12s %12s %12s %6zu %8zu\n", std::string(to_string(c.model_kind)).c_str(), fixed(c.rmse).c_str(),
                fixed(c.mae).c_str(), c.mape ? fixed(*c.mape).c_str() : "-", c.n_folds, c.horizon);
  return 0;
}

// ---------------------------------------------------------------------------
// whatif

struct WhatifOptions {
  std::string data;
  std::vector<std::string> model_files;
  std::string scenario;
  std::string route = "cli";
  std::string history;
  bool as_json = false;
};

int run_whatif_cmd(const WhatifOptions& o) {
  const auto frame = load_data(o.data);
  ModelSet models;
  for (const auto& path : o.model_files) {
    FittedModel model;
    try {
      model = model_from_json(json::parse(read_text(path)));
    } catch (const json::exception& e) {
      throw DataError(path + ": " + e.what());
    } catch (const Error& e) {
      throw DataError(located(path, e));
    }
    const auto kind = model.kind();
    if (!models.emplace(kind, std::move(model)).second)
      throw DataError(path + ": second " + std::string(to_string(kind)) + " model");
  }

  json request = json::object();
  if (!o.scenario.empty()) {
    try {
      request = json::parse(read_text(o.scenario));
    } catch (const json::parse_error& e) {
      throw DataError(o.scenario + ": " + e.what());
    }
  }
  std::string route_id = o.route;
  if (request.is_object() && request.contains("route_id") && request["route_id"].is_string())
    route_id = request["route_id"].get<std::string>();
  Scenario scenario;
  try {
    scenario = scenario_from_request(request, route_id, frame, models);
  } catch (const RequestError& e) {
    throw DataError(o.scenario + ": " + (e.pointer.empty() ? "" : e.pointer + ": ") + e.what());
  }

  std::unique_ptr<HistoryStore> history;
  if (!o.history.empty()) history = std::make_unique<HistoryStore>(o.history);
  const auto run = run_whatif(models, frame, scenario, history.get());
  if (o.as_json) {
    std::cout << run_to_json(run).dump(2) << "\n";
    return 0;
  }
  std::printf("route %s, horizon %zu\n", scenario.route_id.c_str(), scenario.horizon);
  std::printf("%-8s %12s %12s %12s %12s\n", "model", "step", "baseline", "whatif", "diff");
  for (const auto& [kind, diff] : run.diff)
    for (std::size_t t = 0; t < diff.size(); ++t)
      std::printf("%-8s %12zu %12s %12s %12s\n", std::string(to_string(kind)).c_str(), t,
                  fixed(run.baseline.at(kind).values[t], 4).c_str(), fixed(run.whatif.at(kind).values[t], 4).c_str(),
                  fixed(diff[t], 4).c_str());
  for (const auto& [kind, mean] : run.mean_diff_per_model)
    std::printf("mean_diff %s %s\n", std::string(to_string(kind)).c_str(), format_number(mean).c_str());
  std::printf("overall_mean_diff %s\n", format_number(run.overall_mean_diff).c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// vessels

struct VesselOptions {
  std::string data;
  std::vector<double> bbox;
  std::string status = "all";
  std::string at;
  std::vector<std::string> port;
  double tolerance = kDefaultApproachToleranceDeg;
  bool as_json = false;
};

int run_vessels(const VesselOptions& o) {
  std::vector<VesselRecord> records;
  try {
    records = load_vessels(read_text(o.data));
  } catch (const Error& e) {
    throw DataError(located(o.data, e));
  }
  BBox box;
  if (!o.bbox.empty()) box = {o.bbox[0], o.bbox[1], o.bbox[2], o.bbox[3]};
  Timestamp at{};
  if (!o.at.empty()) {
    const auto parsed = parse_timestamp(o.at);
    if (!parsed) throw CLI::ValidationError("--at", "bad timestamp '" + o.at + "'");
    at = *parsed;
  } else {
    for (const auto& r : records) at = std::max(at, r.timestamp);
  }
  std::vector<VesselRecord> view;
  for (const auto& r : vessels_in_view(records, box, at))
    if (o.status == "all" || to_string(r.cargo_status) == o.status) view.push_back(r);

  std::optional<TimeSeriesFrame> supply;
  if (!o.port.empty()) {
    PortRegion port{o.port[0], {}, 0.0};
    const auto lat = parse_number(o.port[1]), lon = parse_number(o.port[2]), radius = parse_number(o.port[3]);
    if (!lat || !lon || !radius || !(*radius > 0))
      throw CLI::ValidationError("--port", "expected name,lat,lon,radius_km");
    port.center = {*lat, *lon};
    port.radius_km = *radius;
    check_coordinate(port.center);
    supply = aggregate_supply(records, port, o.tolerance);
  }

  if (o.as_json) {
    json out{{"at", records.empty() ? json(nullptr) : json(format_timestamp(at))},
             {"status", o.status},
             {"vessels", view}};
    if (supply) out["supply"] = *supply;
    std::cout << out.dump(2) << "\n";
    return 0;
  }
  std::printf("%-8s %-21s %10s %11s %8s %6s %-8s\n", "imo", "timestamp", "lat", "lon", "heading", "knots", "status");
  for (const auto& r : view)
    std::printf("%-8u %-21s %10s %11s %8s %6s %-8s\n", r.imo, format_timestamp(r.timestamp).c_str(),
                fixed(r.lat, 4).c_str(), fixed(r.lon, 4).c_str(), fixed(r.heading, 1).c_str(),
                fixed(r.speed_knots, 1).c_str(), std::string(to_string(r.cargo_status)).c_str());
  if (supply) {
    std::printf("\nweek        %s\n", supply->variables().front().c_str());
    const auto counts = supply->column(supply->variables().front());
    for (std::size_t i = 0; i < supply->size(); ++i)
      std::printf("%s  %s\n", format_date(supply->index()[i]).c_str(), format_number(counts[i]).c_str());
  }
  return 0;
}

// ---------------------------------------------------------------------------
// validate

int run_validate(const std::string& kind, const std::string& path) {
  const auto text = read_text(path);
  std::string summary;
  try {
    if (kind == "frame") {
      const auto frame = load_frame(text);
      summary = std::to_string(frame.size()) + " rows, " + std::to_string(frame.variables().size()) + " variables";
    } else if (kind == "vessels") {
      summary = std::to_string(load_vessels(text).size()) + " records";
    } else if (kind == "config") {
      summary = std::to_string(parse_config(text, fs::path(path).parent_path()).routes.size()) + " routes";
    } else {
      json j;
      try {
        j = json::parse(text);
      } catch (const json::parse_error& e) {
        throw DataError(path + ": " + e.what());
      }
      if (kind == "scenario") {
        if (auto v = validate_json(j, schemas::scenario_request()))
          throw DataError(path + ": " + (v->path.empty() ? "" : v->path + ": ") + v->message);
        for (const auto& name : j.value("model_selection", json::array()))
          if (!parse_model_kind(name.get<std::string>())) throw DataError(path + ": unknown model " + name.dump());
        check_scenario_shape(j.get<Scenario>());
        summary = "scenario";
      } else {
        try {
          summary = std::string(to_string(model_from_json(j).kind())) + " model";
        } catch (const json::exception& e) {
          throw DataError(path + ": " + e.what());
        }
      }
    }
  } catch (const Error& e) {
    throw DataError(located(path, e));
  }
  std::cout << "ok: " << path << ": " << summary << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// serve

int run_serve(const std::string& config, const std::string& host, int port, bool parallel) {
  Service service(load_config(config), parallel);
  httplib::Server server;
  mount(server, service);
  if (!server.bind_to_port(host, port)) throw DataError("cannot bind " + host + ":" + std::to_string(port));
  std::fprintf(stderr, "listening on %s:%d with %zu routes\n", host.c_str(), port, service.routes().size());
  return server.listen_after_bind() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Freight-rate forecasting and what-if analysis"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "whatif-cli 0.1.0");

  GenOptions gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "Write synthetic data");
  gen_cmd->add_option("kind", gen.kind, "linear | cointegrated | ar1 | vessels | demo")
      ->required()
      ->check(CLI::IsMember({"linear", "cointegrated", "ar1", "vessels", "demo"}));
  gen_cmd->add_option("-o,--out", gen.out, "Output file (directory for demo); default stdout");
  gen_cmd->add_option("--seed", gen.seed, "PRNG seed")->capture_default_str();
  gen_cmd->add_option("--weeks", gen.weeks, "Number of weeks")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--sigma", gen.sigma, "Noise standard deviation")->check(CLI::NonNegativeNumber);
  gen_cmd->add_option("--phi", gen.phi, "AR(1) coefficient");

  SpecOptions fit_spec;
  std::string fit_out;
  auto* fit_cmd = app.add_subcommand("fit", "Fit one model and write its JSON");
  add_spec_options(fit_cmd, fit_spec, false);
  fit_cmd->add_option("-o,--out", fit_out, "Model JSON file; default stdout");

  SpecOptions bt_spec;
  BacktestOptions bt;
  auto* bt_cmd = app.add_subcommand("backtest", "Walk-forward scorecards");
  add_spec_options(bt_cmd, bt_spec, true);
  bt_cmd->add_option("--folds", bt.folds, "Number of folds")->capture_default_str()->check(CLI::Range(2, 100000));
  bt_cmd->add_option("--horizon", bt.horizon, "Steps per fold")->capture_default_str()->check(CLI::PositiveNumber);
  bt_cmd->add_option("--metric", bt.metric, "Ranking metric")
      ->capture_default_str()
      ->check(CLI::IsMember({"rmse", "mae", "mape"}));
  bt_cmd->add_flag("--parallel", bt.parallel, "Run folds concurrently");
  bt_cmd->add_flag("--json", bt.as_json, "Print JSON");

  WhatifOptions wi;
  auto* wi_cmd = app.add_subcommand("whatif", "Run a scenario against fitted models");
  wi_cmd->add_option("--data", wi.data, "Frame CSV")->required()->check(CLI::ExistingFile);
  wi_cmd->add_option("--model-file", wi.model_files, "Model JSON (repeatable)")->required()->check(CLI::ExistingFile);
  wi_cmd->add_option("--scenario", wi.scenario, "Scenario JSON; default empty")->check(CLI::ExistingFile);
  wi_cmd->add_option("--route", wi.route, "Route id when the scenario has none")->capture_default_str();
  wi_cmd->add_option("--history", wi.history, "Append the run to this ndjson log");
  wi_cmd->add_flag("--json", wi.as_json, "Print the run as JSON");

  VesselOptions vs;
  auto* vs_cmd = app.add_subcommand("vessels", "Vessels in view and port supply");
  vs_cmd->add_option("--data", vs.data, "Vessel CSV")->required()->check(CLI::ExistingFile);
  vs_cmd->add_option("--bbox", vs.bbox, "lat_min,lon_min,lat_max,lon_max")->delimiter(',')->expected(4);
  vs_cmd->add_option("--status", vs.status, "ballast | laden | all")
      ->capture_default_str()
      ->check(CLI::IsMember({"all", "ballast", "laden"}));
  vs_cmd->add_option("--at", vs.at, "Timestamp; default latest record");
  vs_cmd->add_option("--port", vs.port, "name,lat,lon,radius_km")->delimiter(',')->expected(4);
  vs_cmd->add_option("--tolerance", vs.tolerance, "Approach tolerance in degrees")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 180.0));
  vs_cmd->add_flag("--json", vs.as_json, "Print JSON");

  std::string cfg_path, host = "127.0.0.1";
  int port = 8080;
  bool serve_parallel = false;
  auto* serve_cmd = app.add_subcommand("serve", "Start the HTTP service");
  serve_cmd->add_option("--config", cfg_path, "Config file")->required()->check(CLI::ExistingFile);
  serve_cmd->add_option("--port", port, "TCP port")->capture_default_str()->check(CLI::Range(0, 65535));
  serve_cmd->add_option("--host", host, "Bind address")->capture_default_str();
  serve_cmd->add_flag("--parallel", serve_parallel, "Backtest folds concurrently at startup");

  std::string v_kind, v_path;
  auto* val_cmd = app.add_subcommand("validate", "Check an input file");
  val_cmd->add_option("kind", v_kind, "frame | vessels | scenario | model | config")
      ->required()
      ->check(CLI::IsMember({"frame", "vessels", "scenario", "model", "config"}));
  val_cmd->add_option("file", v_path, "File to check")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "whatif-cli: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*gen_cmd) return run_gen(gen);
    if (*fit_cmd) return run_fit(fit_spec, fit_out);
    if (*bt_cmd) return run_backtest(bt_spec, bt);
    if (*wi_cmd) return run_whatif_cmd(wi);
    if (*vs_cmd) return run_vessels(vs);
    if (*serve_cmd) return run_serve(cfg_path, host, port, serve_parallel);
    if (*val_cmd) return run_validate(v_kind, v_path);
  } catch (const CLI::Error& e) {
    std::cerr << "whatif-cli: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "whatif-cli: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
