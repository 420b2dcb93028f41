// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "test_support.hpp"
#include "whatif/models.hpp"
#include "whatif/synth.hpp"

using namespace whatif;
using whatif::testing::code_of;
using whatif::testing::make_frame;

namespace {

ModelSpec vecm_spec(int lag = 1) {
  ModelSpec spec;
  spec.kind = ModelKind::VECM;
  spec.target = "c3_rate";
  spec.exogenous = {"capesize_index"};
  spec.vecm.lag_order = lag;
  return spec;
}

struct TwoStepOracle {
  double beta2 = 0, coint_intercept = 0;
  double alpha_target = 0, alpha_other = 0;
};

// Independent two-step estimate for a bivariate system with lag order 1,
// using closed-form simple regressions only.
TwoStepOracle two_step(const std::vector<double>& y1, const std::vector<double>& y2) {
  auto simple = [](const std::vector<double>& x, const std::vector<double>& y) {
    const auto n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      mx += x[i] / n;
      my += y[i] / n;
    }
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      sxy += (x[i] - mx) * (y[i] - my);
      sxx += (x[i] - mx) * (x[i] - mx);
    }
    const double b = sxy / sxx;
    return std::make_pair(my - b * mx, b);
  };
  TwoStepOracle o;
  const auto [a, b] = simple(y2, y1);
  o.beta2 = -b;
  o.coint_intercept = a;
  std::vector<double> z_lag, d1, d2;
  for (std::size_t t = 1; t < y1.size(); ++t) {
    z_lag.push_back(y1[t - 1] - b * y2[t - 1] - a);
    d1.push_back(y1[t] - y1[t - 1]);
    d2.push_back(y2[t] - y2[t - 1]);
  }
  o.alpha_target = simple(z_lag, d1).second;
  o.alpha_other = simple(z_lag, d2).second;
  return o;
}

}  // namespace

TEST(FitVecm, RecoversCointegratingVector) {
  const auto frame = synth::gen_cointegrated({.seed = 3, .n_weeks = 2000});
  const auto model = fit_vecm(frame, vecm_spec());
  const auto& p = std::get<VecmParameters>(model.parameters);
  const auto oracle = two_step(frame.column("c3_rate"), frame.column("capesize_index"));

  EXPECT_EQ(p.beta(0), 1.0);
  EXPECT_NEAR(p.beta(1), -1.0, 0.05);
  EXPECT_NEAR(p.beta(1), oracle.beta2, 1e-9);
  EXPECT_NEAR(p.coint_intercept, oracle.coint_intercept, 1e-7);
  EXPECT_NEAR(p.alpha(0), oracle.alpha_target, 1e-9);
  EXPECT_NEAR(p.alpha(1), oracle.alpha_other, 1e-9);
  EXPECT_NEAR(p.alpha(0), -0.3, 0.06);
  EXPECT_NEAR(p.alpha(1), 0.2, 0.06);
  EXPECT_TRUE(p.gamma.empty());
}

TEST(FitVecm, IndependentRandomWalksHaveWeakCorrection) {
  const auto frame = synth::gen_cointegrated({.seed = 3, .n_weeks = 2000, .alpha = {0.0, 0.0}});
  const auto model = fit_vecm(frame, vecm_spec());
  const auto& p = std::get<VecmParameters>(model.parameters);
  const auto oracle = two_step(frame.column("c3_rate"), frame.column("capesize_index"));
  EXPECT_NEAR(p.alpha(0), oracle.alpha_target, 1e-9);
  EXPECT_LT(std::abs(p.alpha(0)), 0.05);
}

TEST(FitVecm, HigherLagOrderShapes) {
  const auto frame = synth::gen_cointegrated({.seed = 8, .n_weeks = 500});
  const auto model = fit_vecm(frame, vecm_spec(3));
  const auto& p = std::get<VecmParameters>(model.parameters);
  ASSERT_EQ(p.gamma.size(), 2u);
  EXPECT_EQ(p.gamma[0].rows(), 2);
  EXPECT_EQ(p.gamma[0].cols(), 2);
  EXPECT_EQ(p.tail_levels.rows(), 3);
  EXPECT_EQ(forecast_vecm(model, {}, 6).values.size(), 6u);
}

TEST(FitVecm, RejectsDegenerateSystems) {
  const auto frame = synth::gen_cointegrated({.seed = 3, .n_weeks = 11});
  auto single = vecm_spec();
  single.exogenous.clear();
  EXPECT_EQ(code_of([&] { fit_vecm(frame, single); }), Errc::InvalidSystem);
  EXPECT_EQ(code_of([&] { fit_vecm(frame, vecm_spec()); }), Errc::InsufficientData);
}

TEST(ForecastVecm, NoDynamicsHoldsLastLevels) {
  VecmParameters p;
  p.alpha = Eigen::VectorXd::Zero(2);
  p.beta = Eigen::Vector2d(1, -1);
  p.intercept = Eigen::VectorXd::Zero(2);
  p.tail_levels = Eigen::RowVector2d(7.5, 3.0);
  const FittedModel model{vecm_spec(), p, 0.0, {}};
  EXPECT_EQ(forecast_vecm(model, {}, 5).values, std::vector<double>(5, 7.5));
}

TEST(ForecastVecm, SpreadShrinksTowardEquilibrium) {
  VecmParameters p;
  p.alpha = Eigen::Vector2d(-0.3, 0.2);
  p.beta = Eigen::Vector2d(1, -1);
  p.intercept = Eigen::VectorXd::Zero(2);
  p.tail_levels = Eigen::RowVector2d(130.0, 100.0);
  const FittedModel model{vecm_spec(), p, 0.0, {}};

  // Oracle: direct recursion of both levels.
  double y1 = 130, y2 = 100;
  std::vector<double> expected, spreads;
  for (int s = 0; s < 10; ++s) {
    const double z = y1 - y2;
    y1 += -0.3 * z;
    y2 += 0.2 * z;
    expected.push_back(y1);
    spreads.push_back(std::abs(y1 - y2));
  }
  const auto f = forecast_vecm(model, {}, 10).values;
  for (int s = 0; s < 10; ++s) EXPECT_NEAR(f[s], expected[s], 1e-12);
  const auto system = forecast_vecm_system(model, {}, 10);
  for (int s = 0; s < 10; ++s) EXPECT_NEAR(std::abs(system(s, 0) - system(s, 1)), spreads[s], 1e-12);
  for (int s = 1; s < 10; ++s) EXPECT_LT(spreads[s], spreads[s - 1]);
}

TEST(ForecastVecm, FixedPathsOverwriteAfterEachStep) {
  const auto frame = synth::gen_cointegrated({.seed = 4, .n_weeks = 400});
  const auto model = fit_vecm(frame, vecm_spec(2));
  const auto free_run = forecast_vecm(model, {}, 5).values;
  const auto fixed = forecast_vecm(model, {{"capesize_index", std::vector<double>(5, 150.0)}}, 5).values;
  EXPECT_EQ(free_run[0], fixed[0]);  // first fixed value only enters the next step
  EXPECT_NE(free_run[1], fixed[1]);
  const auto system = forecast_vecm_system(model, {{"capesize_index", std::vector<double>(5, 150.0)}}, 5);
  for (int s = 0; s < 5; ++s) {
    EXPECT_EQ(system(s, 0), fixed[s]);
    EXPECT_EQ(system(s, 1), 150.0);
  }
  EXPECT_EQ(code_of([&] { forecast_vecm(model, {{"c3_rate", std::vector<double>(5, 1.0)}}, 5); }),
            Errc::CannotFixTarget);
  EXPECT_EQ(code_of([&] { forecast_vecm(model, {{"capesize_index", {1.0}}}, 5); }), Errc::MissingExogPath);
  EXPECT_EQ(code_of([&] { forecast_vecm(model, {}, 0); }), Errc::InvalidHorizon);
}
