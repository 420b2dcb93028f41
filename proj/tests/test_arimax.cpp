// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "test_support.hpp"
#include "whatif/models.hpp"
#include "whatif/rng.hpp"
#include "whatif/synth.hpp"

using namespace whatif;
using whatif::testing::code_of;
using whatif::testing::make_frame;

namespace {

ModelSpec arimax_spec(int p, int d, int q, std::vector<std::string> exog = {}) {
  ModelSpec spec;
  spec.kind = ModelKind::ARIMAX;
  spec.target = "y";
  spec.exogenous = std::move(exog);
  spec.arimax = {p, d, q};
  return spec;
}

// Yule-Walker AR(1) estimate: lag-1 autocorrelation of the demeaned series.
double yule_walker_ar1(const std::vector<double>& y) {
  double mean = 0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  double c0 = 0, c1 = 0;
  for (std::size_t t = 0; t < y.size(); ++t) {
    c0 += (y[t] - mean) * (y[t] - mean);
    if (t > 0) c1 += (y[t] - mean) * (y[t - 1] - mean);
  }
  return c1 / c0;
}

}  // namespace

TEST(FitArimax, ZeroOrderWithExogReducesToMlr) {
  std::vector<double> x, y;
  for (int i = 0; i < 10; ++i) {
    x.push_back(i * 0.7 - 2);
    y.push_back(1 + 2 * x.back());
  }
  const auto model = fit_arimax(make_frame({{"y", y}, {"x", x}}), arimax_spec(0, 0, 0, {"x"}));
  const auto& p = std::get<ArimaxParameters>(model.parameters);
  EXPECT_NEAR(p.intercept, 1.0, 1e-6);
  EXPECT_NEAR(p.exog[0], 2.0, 1e-6);
}

TEST(FitArimax, ZeroOrderForecastsMatchMlr) {
  Xoshiro256 rng(4);
  std::vector<double> a, b, y;
  for (int i = 0; i < 120; ++i) {
    a.push_back(rng.normal(10, 2));
    b.push_back(rng.normal(-3, 1));
    y.push_back(0.5 + 1.5 * a.back() - 2 * b.back() + rng.normal());
  }
  const auto frame = make_frame({{"y", y}, {"a", a}, {"b", b}});
  auto mlr_spec = arimax_spec(0, 0, 0, {"a", "b"});
  mlr_spec.kind = ModelKind::MLR;
  const auto m1 = fit(frame, mlr_spec);
  const auto m2 = fit(frame, arimax_spec(0, 0, 0, {"a", "b"}));
  const ExogPaths paths{{"a", {9, 11, 12}}, {"b", {-2, -4, -3}}};
  const auto f1 = forecast(m1, paths, 3).values;
  const auto f2 = forecast(m2, paths, 3).values;
  for (int t = 0; t < 3; ++t) EXPECT_NEAR(f1[t], f2[t], 1e-6);
}

TEST(FitArimax, RecoversAr1AgainstYuleWalker) {
  const auto frame = synth::gen_ar1({.seed = 11, .n_weeks = 2000, .phi = 0.6, .sigma = 1.0});
  const double oracle = yule_walker_ar1(frame.column("y"));
  EXPECT_NEAR(oracle, 0.6, 0.1);
  const auto model = fit_arimax(frame, arimax_spec(1, 0, 0));
  const double phi = std::get<ArimaxParameters>(model.parameters).ar[0];
  EXPECT_NEAR(phi, 0.6, 0.1);
  EXPECT_NEAR(phi, oracle, 0.01);
  EXPECT_NEAR(model.residual_sigma, 1.0, 0.05);
}

TEST(FitArimax, RecoversArmaWithIntegration) {
  // y is the cumulative sum of an ARMA(1,1) with phi=0.5, theta=0.3.
  Xoshiro256 rng(17);
  std::vector<double> y{50.0};
  double u_prev = 0, e_prev = 0;
  for (int t = 1; t < 3000; ++t) {
    const double e = rng.normal();
    const double u = 0.5 * u_prev + e + 0.3 * e_prev;
    y.push_back(y.back() + u);
    u_prev = u;
    e_prev = e;
  }
  const auto model = fit_arimax(make_frame({{"y", y}}), arimax_spec(1, 1, 1));
  const auto& p = std::get<ArimaxParameters>(model.parameters);
  EXPECT_NEAR(p.ar[0], 0.5, 0.1);
  EXPECT_NEAR(p.ma[0], 0.3, 0.1);
  EXPECT_EQ(p.target_tail, (std::vector<double>{y.back()}));
}

TEST(FitArimax, OrdersTooLargeForSample) {
  const auto frame = make_frame({{"y", {1, 2, 3, 4, 5, 6, 7, 8}}});
  EXPECT_EQ(code_of([&] { fit_arimax(frame, arimax_spec(5, 0, 5)); }), Errc::InsufficientData);
  EXPECT_EQ(code_of([&] { fit_arimax(frame, arimax_spec(-1, 0, 0)); }), Errc::InvalidSpec);
}

TEST(ForecastArimax, RandomWalkIsFlat) {
  ArimaxParameters p;
  p.d = 1;
  p.target_tail = {100.0};
  const FittedModel model{arimax_spec(0, 1, 0), p, 1.0, {}};
  EXPECT_EQ(forecast_arimax(model, {}, 4).values, (std::vector<double>(4, 100.0)));
}

TEST(ForecastArimax, Ar1ClosedForm) {
  ArimaxParameters p;
  p.ar = {0.5};
  p.recent_residuals = {8.0};
  const FittedModel model{arimax_spec(1, 0, 0), p, 1.0, {}};
  EXPECT_EQ(forecast_arimax(model, {}, 2).values, (std::vector<double>{4, 2}));
  const auto long_run = forecast_arimax(model, {}, 10).values;
  for (int t = 0; t < 10; ++t) EXPECT_NEAR(long_run[t], std::pow(0.5, t + 1) * 8.0, 1e-12);
  EXPECT_EQ(code_of([&] { forecast_arimax(model, {}, 0); }), Errc::InvalidHorizon);
}

TEST(ForecastArimax, ShorterHorizonIsPrefix) {
  const auto frame = synth::gen_ar1({.seed = 2, .n_weeks = 300, .phi = 0.4});
  const auto model = fit_arimax(frame, arimax_spec(2, 1, 1));
  const auto h1 = forecast_arimax(model, {}, 1).values;
  const auto h5 = forecast_arimax(model, {}, 5).values;
  EXPECT_EQ(h1[0], h5[0]);
  EXPECT_EQ(forecast_arimax(model, {}, 5).values, h5);
}

TEST(ForecastArimax, DifferencedExogenousIntegrates) {
  // Level relation y = 3x + noise-free: with d=1 the differenced coefficient is 3
  // and a unit step in x's future path lifts y by 3.
  std::vector<double> x{10}, y;
  Xoshiro256 rng(3);
  for (int t = 1; t < 200; ++t) x.push_back(x.back() + rng.normal());
  for (double v : x) y.push_back(3 * v);
  const auto model = fit_arimax(make_frame({{"y", y}, {"x", x}}), arimax_spec(0, 1, 0, {"x"}));
  const double last_x = x.back();
  const auto base = forecast_arimax(model, {{"x", {last_x, last_x}}}, 2).values;
  const auto moved = forecast_arimax(model, {{"x", {last_x + 1, last_x + 1}}}, 2).values;
  EXPECT_NEAR(moved[0] - base[0], 3.0, 1e-6);
  EXPECT_NEAR(moved[1] - base[1], 3.0, 1e-6);
  EXPECT_EQ(code_of([&] { forecast_arimax(model, {}, 2); }), Errc::MissingExogPath);
}

TEST(UnitRoots, CompanionCheck) {
  EXPECT_TRUE(detail::roots_outside_unit_circle(Eigen::VectorXd::Constant(1, 0.9)));
  EXPECT_FALSE(detail::roots_outside_unit_circle(Eigen::VectorXd::Constant(1, 1.0)));
  Eigen::VectorXd ar2(2);
  ar2 << 0.5, 0.3;
  EXPECT_TRUE(detail::roots_outside_unit_circle(ar2));
  ar2 << 0.5, 0.6;  // 1 - 0.5z - 0.6z^2 has a root inside
  EXPECT_FALSE(detail::roots_outside_unit_circle(ar2));
}

TEST(NelderMead, MinimizesRosenbrock) {
  auto rosen = [](const Eigen::VectorXd& v) {
    return 100 * std::pow(v(1) - v(0) * v(0), 2) + std::pow(1 - v(0), 2);
  };
  Eigen::VectorXd start(2);
  start << -1.2, 1.0;
  const auto r = nelder_mead(rosen, start, Eigen::VectorXd::Constant(2, 0.5));
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.x(0), 1.0, 1e-5);
  EXPECT_NEAR(r.x(1), 1.0, 1e-5);
}
