// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "test_support.hpp"
#include "whatif/models.hpp"
#include "whatif/rng.hpp"

using namespace whatif;
using whatif::testing::code_of;
using whatif::testing::make_frame;

namespace {

ModelSpec mlr_spec(std::vector<std::string> exog = {"x"}) {
  ModelSpec spec;
  spec.kind = ModelKind::MLR;
  spec.target = "y";
  spec.exogenous = std::move(exog);
  return spec;
}

// Independent oracle: simple-regression normal equations in closed form.
std::pair<double, double> normal_equations(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return {(sy - slope * sx) / n, slope};
}

}  // namespace

TEST(FitMlr, RecoversExactLine) {
  std::vector<double> x, y;
  for (int i = 0; i < 10; ++i) {
    x.push_back(i * 0.7 - 2);
    y.push_back(1 + 2 * x.back());
  }
  const auto model = fit_mlr(make_frame({{"y", y}, {"x", x}}), mlr_spec());
  const auto& p = std::get<MlrParameters>(model.parameters);
  EXPECT_NEAR(p.intercept, 1.0, 1e-9);
  EXPECT_NEAR(p.coefficients[0], 2.0, 1e-9);
  EXPECT_NEAR(model.residual_sigma, 0.0, 1e-9);
  EXPECT_EQ(model.fit_range.rows, 10u);
}

TEST(FitMlr, NoisyLineMatchesNormalEquationsOracle) {
  Xoshiro256 rng(7);
  std::vector<double> x, y;
  for (int i = 0; i < 500; ++i) {
    x.push_back(rng.uniform(0, 10));
    y.push_back(3 - 0.5 * x.back() + 0.1 * rng.normal());
  }
  const auto [a, b] = normal_equations(x, y);
  EXPECT_NEAR(b, -0.5, 0.05);
  const auto model = fit_mlr(make_frame({{"y", y}, {"x", x}}), mlr_spec());
  const auto& p = std::get<MlrParameters>(model.parameters);
  EXPECT_NEAR(p.coefficients[0], b, 1e-10);
  EXPECT_NEAR(p.intercept, a, 1e-9);
  EXPECT_NEAR(model.residual_sigma, 0.1, 0.01);
}

TEST(FitMlr, DuplicateColumnIsSingular) {
  std::vector<double> x{1, 2, 3, 5, 8, 13}, y{2, 4, 7, 9, 15, 20};
  EXPECT_EQ(code_of([&] { fit_mlr(make_frame({{"y", y}, {"x", x}, {"x2", x}}), mlr_spec({"x", "x2"})); }),
            Errc::SingularDesign);
}

TEST(FitMlr, TooFewRowsAndBadSpecs) {
  const auto frame = make_frame({{"y", {1, 2}}, {"x", {3, 4}}});
  EXPECT_EQ(code_of([&] { fit_mlr(frame, mlr_spec()); }), Errc::InsufficientData);
  EXPECT_EQ(code_of([&] { fit_mlr(frame, mlr_spec({})); }), Errc::InvalidSpec);
  EXPECT_EQ(code_of([&] { fit_mlr(frame, mlr_spec({"y"})); }), Errc::InvalidSpec);
  EXPECT_EQ(code_of([&] { fit_mlr(frame, mlr_spec({"z"})); }), Errc::MissingVariable);
}

TEST(FitMlr, SkipsIncompleteRows) {
  std::vector<double> x{0, 1, 2, 3, 4, 5}, y{1, 3, kMissing, 7, 9, 11};
  x[4] = kMissing;
  const auto model = fit_mlr(make_frame({{"y", y}, {"x", x}}), mlr_spec());
  EXPECT_EQ(model.fit_range.rows, 4u);
  EXPECT_NEAR(std::get<MlrParameters>(model.parameters).coefficients[0], 2.0, 1e-12);
}

TEST(ForecastMlr, EvaluatesLinearPredictor) {
  FittedModel model{mlr_spec(), MlrParameters{1.0, {2.0}}, 0.0, {}};
  EXPECT_EQ(forecast_mlr(model, {{"x", {0, 0}}}, 2).values, (std::vector<double>{1, 1}));
  model.parameters = MlrParameters{0.0, {2.0}};
  EXPECT_EQ(forecast_mlr(model, {{"x", {3, -1}}}, 2).values, (std::vector<double>{6, -2}));
  EXPECT_EQ(code_of([&] { forecast_mlr(model, {{"x", {3}}}, 2); }), Errc::MissingExogPath);
  EXPECT_EQ(code_of([&] { forecast_mlr(model, {}, 2); }), Errc::MissingExogPath);
  EXPECT_EQ(code_of([&] { forecast_mlr(model, {{"x", {3}}}, 0); }), Errc::InvalidHorizon);
}

TEST(ForecastMlr, PerturbationIsLinear) {
  FittedModel model{mlr_spec({"a", "b"}), MlrParameters{0.3, {1.7, -0.4}}, 0.0, {}};
  Xoshiro256 rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    ExogPaths base{{"a", {}}, {"b", {}}}, moved = base;
    std::vector<double> da, db;
    for (int t = 0; t < 6; ++t) {
      base["a"].push_back(rng.uniform(-5, 5));
      base["b"].push_back(rng.uniform(-5, 5));
      da.push_back(rng.uniform(-1, 1));
      db.push_back(rng.uniform(-1, 1));
      moved["a"].push_back(base["a"].back() + da.back());
      moved["b"].push_back(base["b"].back() + db.back());
    }
    const auto f0 = forecast_mlr(model, base, 6).values;
    const auto f1 = forecast_mlr(model, moved, 6).values;
    for (int t = 0; t < 6; ++t) EXPECT_NEAR(f1[t] - f0[t], 1.7 * da[t] - 0.4 * db[t], 1e-12);
  }
}
