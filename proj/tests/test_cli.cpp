// SPDX-License-Identifier: Apache-2.0
#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "whatif/demo.hpp"
#include "whatif/service.hpp"

using namespace whatif;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const std::string name = ::testing::UnitTest::GetInstance()->current_test_info()->name();
    dir_ = fs::temp_directory_path() / ("whatif_cli_" + name);
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }

  fs::path path(const std::string& name) const { return dir_ / name; }

  Result cli(const std::string& args) const {
    const auto out = dir_ / "stdout.txt", err = dir_ / "stderr.txt";
    const std::string cmd = "cd '" + dir_.string() + "' && '" WHATIF_CLI "' " + args + " >'" + out.string() + "' 2>'" +
                            err.string() + "'";
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
  }

  void write(const std::string& name, const std::string& text) const { std::ofstream(path(name)) << text; }

  fs::path dir_;
};

std::size_t line_count(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_F(CliTest, BacktestMlrOnNoiselessDataHasZeroRmse) {
  ASSERT_EQ(cli("gen-data linear --sigma 0 --weeks 120 --seed 9 -o lin.csv").code, 0);
  const auto r = cli("backtest --data lin.csv --model mlr --folds 6");
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream lines(r.out);
  std::string header, row;
  std::getline(lines, header);
  std::getline(lines, row);
  std::istringstream fields(row);
  std::string kind, rmse;
  fields >> kind >> rmse;
  EXPECT_EQ(kind, "MLR");
  EXPECT_EQ(rmse, "0.000");
}

TEST_F(CliTest, BacktestJsonRanksByMetric) {
  ASSERT_EQ(cli("gen-data ar1 --weeks 300 --seed 4 -o ar.csv").code, 0);
  const auto r = cli("backtest --data ar.csv --model 'arimax(0,0,0)' --model 'arimax(1,0,0)' --folds 20 --json");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out);
  ASSERT_EQ(j["scorecards"].size(), 2u);
  EXPECT_LE(j["scorecards"][0]["rmse"].get<double>(), j["scorecards"][1]["rmse"].get<double>());
  for (const auto& c : j["scorecards"]) EXPECT_EQ(c["n_folds"], 20);
}

TEST_F(CliTest, WhatifWithEmptyPerturbationsPrintsZero) {
  ASSERT_EQ(cli("gen-data linear --weeks 80 -o lin.csv").code, 0);
  ASSERT_EQ(cli("fit --data lin.csv --model mlr -o mlr.json").code, 0);
  ASSERT_EQ(cli("fit --data lin.csv --model 'arimax(1,0,0)' -o arimax.json").code, 0);
  write("empty.json", R"({"horizon": 3, "perturbations": {}})");
  const auto r = cli("whatif --data lin.csv --model-file mlr.json --model-file arimax.json --scenario empty.json");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("\noverall_mean_diff 0\n"), std::string::npos) << r.out;
}

TEST_F(CliTest, ValidateBadImoNamesRow) {
  ASSERT_EQ(cli("gen-data vessels --weeks 1 -o v.csv").code, 0);
  EXPECT_EQ(cli("validate vessels v.csv").code, 0);
  std::string text = slurp(path("v.csv"));
  // Third line, last IMO digit bumped.
  std::size_t pos = 0;
  for (int i = 0; i < 2; ++i) pos = text.find('\n', pos) + 1;
  auto& digit = text[pos + 6];
  digit = digit == '9' ? '0' : static_cast<char>(digit + 1);
  write("v.csv", text);
  const auto r = cli("validate vessels v.csv");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("row 3"), std::string::npos) << r.err;
  EXPECT_EQ(line_count(r.err), 1u);
}

TEST_F(CliTest, ValidateOtherKinds) {
  ASSERT_EQ(cli("gen-data linear --weeks 30 -o lin.csv").code, 0);
  EXPECT_EQ(cli("validate frame lin.csv").code, 0);
  write("gap.csv", "date,y\n2021-01-04,1\n2021-01-18,2\n");
  EXPECT_EQ(cli("validate frame gap.csv").code, 1);
  write("s.json", R"({"horizon": 2, "perturbations": {"x": [{"step": -1, "value": 1}]}})");
  const auto r = cli("validate scenario s.json");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("/perturbations/x/0/step"), std::string::npos) << r.err;
  write("ok.json", R"({"horizon": 2, "model_selection": ["mlr"]})");
  EXPECT_EQ(cli("validate scenario ok.json").code, 0);
  ASSERT_EQ(cli("fit --data lin.csv --model mlr -o m.json").code, 0);
  EXPECT_EQ(cli("validate model m.json").code, 0);
  write("bad.json", R"({"version": 99})");
  EXPECT_EQ(cli("validate model bad.json").code, 1);
  write("c.conf", "[route C3]\ntarget = y\nwhat = 1\n");
  const auto c = cli("validate config c.conf");
  EXPECT_EQ(c.code, 1);
  EXPECT_NE(c.err.find("line 3"), std::string::npos) << c.err;
}

TEST_F(CliTest, UsageErrorsExitTwo) {
  EXPECT_EQ(cli("").code, 2);
  EXPECT_EQ(cli("frobnicate").code, 2);
  EXPECT_EQ(cli("gen-data wavelet").code, 2);
  EXPECT_EQ(cli("backtest --data missing.csv --model mlr").code, 2);
  ASSERT_EQ(cli("gen-data linear --weeks 30 -o lin.csv").code, 0);
  const auto r = cli("backtest --data lin.csv --model garch");
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(line_count(r.err), 1u);
  EXPECT_EQ(cli("backtest --data lin.csv --model mlr --folds one").code, 2);
  EXPECT_EQ(cli("--help").code, 0);
}

TEST_F(CliTest, DataErrorsExitOne) {
  ASSERT_EQ(cli("gen-data linear --weeks 30 -o lin.csv").code, 0);
  auto r = cli("fit --data lin.csv --model mlr --exog nope");
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(line_count(r.err), 1u);
  EXPECT_NE(r.err.find("MissingVariable"), std::string::npos);
  ASSERT_EQ(cli("fit --data lin.csv --model mlr -o m.json").code, 0);
  write("s.json", R"({"perturbations": {"c3_rate": [{"step": 0, "value": 1}]}})");
  r = cli("whatif --data lin.csv --model-file m.json --scenario s.json");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("/perturbations/c3_rate"), std::string::npos) << r.err;
}

TEST_F(CliTest, GeneratorsAreSeedDeterministic) {
  for (const char* kind : {"linear", "cointegrated", "ar1", "vessels"}) {
    const std::string k = kind;
    ASSERT_EQ(cli("gen-data " + k + " --weeks 20 --seed 7 -o a.csv").code, 0);
    ASSERT_EQ(cli("gen-data " + k + " --weeks 20 --seed 7 -o b.csv").code, 0);
    ASSERT_EQ(cli("gen-data " + k + " --weeks 20 --seed 8 -o c.csv").code, 0);
    EXPECT_EQ(slurp(path("a.csv")), slurp(path("b.csv"))) << k;
    EXPECT_NE(slurp(path("a.csv")), slurp(path("c.csv"))) << k;
  }
}

TEST_F(CliTest, VesselsFiltersAndAggregates) {
  ASSERT_EQ(cli("gen-data vessels --weeks 2 --seed 3 -o v.csv").code, 0);
  const auto r = cli("vessels --data v.csv --status ballast --port qingdao,36.07,120.38,100 --json");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["vessels"].size(), 5u);
  for (const auto& v : j["vessels"]) EXPECT_EQ(v["cargo_status"], "ballast");
  for (const auto& row : j["supply"]["values"]) EXPECT_EQ(row[0], 3.0);
  EXPECT_EQ(cli("vessels --data v.csv --bbox 10,0,-10,5").code, 1);
  EXPECT_EQ(cli("vessels --data v.csv --status moored").code, 2);
}

TEST_F(CliTest, FitThenWhatifMatchesService) {
  synth::DemoOptions opt;
  opt.n_weeks = 90;
  opt.models = "mlr, arimax(1,0,1), vecm(1), lstm(3,4,15,0.05,2)";
  opt.backtest_folds = 3;
  const auto config = synth::write_demo_workspace(dir_ / "ws", opt);
  const std::string exog = "--target c3_rate --exog brazil_loading,iron_ore_price,bunker_price";
  ASSERT_EQ(cli("fit --data ws/market.csv --model mlr " + exog + " -o mlr.json").code, 0);
  ASSERT_EQ(cli("fit --data ws/market.csv --model 'arimax(1,0,1)' " + exog + " -o arimax.json").code, 0);
  ASSERT_EQ(cli("fit --data ws/market.csv --model 'vecm(1)' --target c3_rate --exog iron_ore_price -o vecm.json").code,
            0);
  ASSERT_EQ(cli("fit --data ws/market.csv --model 'lstm(3,4,15,0.05)' --seed 2 " + exog + " -o lstm.json").code, 0);

  const std::string body =
      R"({"route_id": "C3", "horizon": 5, "perturbations": {"brazil_loading": [{"step": 1, "value": 15000}],
          "iron_ore_price": [{"step": 0, "value": 130}, {"step": 3, "value": 90}]}})";
  write("scenario.json", body);
  const auto r = cli(
      "whatif --json --data ws/market.csv --model-file mlr.json --model-file arimax.json --model-file vecm.json "
      "--model-file lstm.json --scenario scenario.json");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto from_cli = json::parse(r.out);

  Service service(load_config(config));
  const auto resp = service.handle("POST", "/routes/C3/whatif", {}, body);
  ASSERT_EQ(resp.status, 200) << resp.body;
  const auto from_service = json::parse(resp.body);
  for (const char* key : {"scenario", "baseline", "whatif", "diff", "mean_diff_per_model", "overall_mean_diff"})
    EXPECT_EQ(from_cli[key], from_service[key]) << key;
  EXPECT_NE(from_cli["overall_mean_diff"].get<double>(), 0.0);
}
