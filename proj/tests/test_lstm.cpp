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

ModelSpec lstm_spec(int hidden, int window, std::uint64_t seed, std::vector<std::string> exog = {"x"}) {
  ModelSpec spec;
  spec.kind = ModelKind::LSTM;
  spec.target = "y";
  spec.exogenous = std::move(exog);
  spec.lstm.hidden_size = hidden;
  spec.lstm.window = window;
  spec.lstm.seed = seed;
  return spec;
}

TimeSeriesFrame noisy_frame(std::uint64_t seed, std::size_t n = 60) {
  Xoshiro256 rng(seed);
  std::vector<double> x, y;
  double level = 0;
  for (std::size_t t = 0; t < n; ++t) {
    x.push_back(rng.normal(5, 2));
    level = 0.7 * level + 0.3 * x.back() + rng.normal(0, 0.5);
    y.push_back(level);
  }
  return make_frame({{"y", y}, {"x", x}});
}

bool same_bits(const LstmWeights& a, const LstmWeights& b) {
  return flatten(a) == flatten(b);
}

}  // namespace

TEST(LstmGradient, MatchesFiniteDifferencesSmall) {
  EXPECT_LT(lstm_gradient_check(lstm_spec(2, 2, 1), noisy_frame(1)), 1e-4);
}

TEST(LstmGradient, MatchesFiniteDifferencesAcrossSeeds) {
  EXPECT_LT(lstm_gradient_check(lstm_spec(4, 3, 9), noisy_frame(9)), 1e-4);
  for (std::uint64_t seed = 1; seed <= 6; ++seed)
    EXPECT_LT(lstm_gradient_check(lstm_spec(3, 4, seed), noisy_frame(100 + seed)), 1e-4) << "seed " << seed;
}

TEST(LstmGradient, TrainedWeightsStillAgree) {
  auto spec = lstm_spec(3, 3, 4);
  spec.lstm.epochs = 30;
  const auto frame = noisy_frame(4);
  const auto model = fit_lstm(frame, spec);
  const auto data = detail::prepare_lstm_data(frame, spec);
  auto samples = detail::make_samples(data.standardized, 3);
  samples.resize(10);
  EXPECT_LT(lstm_gradient_check(std::get<LstmParameters>(model.parameters).weights, samples), 1e-4);
}

TEST(LstmForward, ZeroWeightsOnZeroInputsGiveZero) {
  const auto shape = init_lstm_weights(2, 3, 1);
  const auto zero = unflatten(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(shape.parameter_count())), shape);
  EXPECT_EQ(lstm_predict(zero, Eigen::MatrixXd::Zero(4, 2)), 0.0);
  EXPECT_EQ(shape.parameter_count(), 4u * 3 * 2 + 4u * 3 * 3 + 4u * 3 + 3 + 1);
}

TEST(FitLstm, IdenticalFitsAreBitwiseEqual) {
  auto spec = lstm_spec(4, 3, 7);
  spec.lstm.epochs = 50;
  const auto frame = noisy_frame(3);
  const auto a = fit_lstm(frame, spec);
  const auto b = fit_lstm(frame, spec);
  const auto& pa = std::get<LstmParameters>(a.parameters);
  const auto& pb = std::get<LstmParameters>(b.parameters);
  EXPECT_TRUE(same_bits(pa.weights, pb.weights));
  EXPECT_EQ(pa.loss_history, pb.loss_history);
  const ExogPaths paths{{"x", {5, 6, 4}}};
  EXPECT_EQ(forecast_lstm(a, paths, 3).values, forecast_lstm(b, paths, 3).values);
}

TEST(FitLstm, TrainingReducesLoss) {
  auto spec = lstm_spec(4, 3, 2);
  spec.lstm.epochs = 100;
  const auto model = fit_lstm(noisy_frame(6, 120), spec);
  const auto& loss = std::get<LstmParameters>(model.parameters).loss_history;
  ASSERT_EQ(loss.size(), 100u);
  EXPECT_LT(loss.back(), loss.front());
}

TEST(FitLstm, ZeroEpochsLeavesModelUntrained) {
  auto spec = lstm_spec(2, 2, 5);
  spec.lstm.epochs = 0;
  const auto model = fit_lstm(noisy_frame(5), spec);
  const auto& p = std::get<LstmParameters>(model.parameters);
  EXPECT_FALSE(p.trained);
  EXPECT_TRUE(p.loss_history.empty());
  EXPECT_TRUE(same_bits(p.weights, init_lstm_weights(2, 2, 5)));
}

TEST(FitLstm, LearnsConstantSeries) {
  auto spec = lstm_spec(4, 3, 1, {});
  spec.lstm.epochs = 300;
  const auto model = fit_lstm(make_frame({{"y", std::vector<double>(40, 10.0)}}), spec);
  const auto& p = std::get<LstmParameters>(model.parameters);
  EXPECT_NEAR(lstm_predict(p.weights, p.tail_inputs) * p.scales[0] + p.means[0], 10.0, 0.1);
  for (double v : forecast_lstm(model, {}, 6).values) EXPECT_NEAR(v, 10.0, 0.5);
}

TEST(ForecastLstm, ZeroNetworkForecastsTrainingMean) {
  auto spec = lstm_spec(3, 2, 1);
  spec.lstm.epochs = 0;
  auto model = fit_lstm(noisy_frame(8), spec);
  auto& p = std::get<LstmParameters>(model.parameters);
  p.weights = unflatten(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p.weights.parameter_count())), p.weights);
  for (double v : forecast_lstm(model, {{"x", {1, 2, 3}}}, 3).values) EXPECT_NEAR(v, p.means[0], 1e-12);
}

TEST(ForecastLstm, Errors) {
  auto spec = lstm_spec(2, 2, 1);
  spec.lstm.epochs = 5;
  const auto model = fit_lstm(noisy_frame(2), spec);
  EXPECT_EQ(code_of([&] { forecast_lstm(model, {{"x", {1}}}, 0); }), Errc::InvalidHorizon);
  EXPECT_EQ(code_of([&] { forecast_lstm(model, {{"x", {1}}}, 2); }), Errc::MissingExogPath);
  EXPECT_EQ(code_of([&] { fit_lstm(noisy_frame(2, 12), spec); }), Errc::InsufficientData);
}
