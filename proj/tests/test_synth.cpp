// SPDX-License-Identifier: Apache-2.0
#include <map>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "test_support.hpp"
#include "whatif/models.hpp"
#include "whatif/spatial.hpp"
#include "whatif/synth.hpp"

using namespace whatif;
using whatif::testing::code_of;

namespace {
const PortRegion kQingdao{"qingdao", {36.07, 120.38}, 100.0};
}

TEST(SynthLinear, SameSeedSameFrame) {
  const auto a = synth::gen_linear_market({.seed = 5, .n_weeks = 80});
  const auto b = synth::gen_linear_market({.seed = 5, .n_weeks = 80});
  const auto c = synth::gen_linear_market({.seed = 6, .n_weeks = 80});
  EXPECT_EQ(a, b);
  EXPECT_EQ(serialize_frame(a), serialize_frame(b));
  EXPECT_NE(a.column("c3_rate"), c.column("c3_rate"));
  EXPECT_EQ(a.size(), 80u);
  EXPECT_EQ(a.variables().front(), "c3_rate");
}

TEST(SynthLinear, NoiselessDataRecoversCoefficients) {
  synth::LinearMarketConfig cfg;
  cfg.noise_sigma = 0.0;
  cfg.n_weeks = 100;
  const auto frame = synth::gen_linear_market(cfg);
  ModelSpec spec;
  spec.kind = ModelKind::MLR;
  spec.target = cfg.target;
  spec.exogenous = cfg.exogenous;
  const auto model = fit(frame, spec);
  const auto& p = std::get<MlrParameters>(model.parameters);
  EXPECT_NEAR(p.intercept, cfg.intercept, 1e-7);
  for (std::size_t i = 0; i < cfg.exogenous.size(); ++i) {
    EXPECT_NEAR(p.coefficients[i], cfg.coefficients[i], 1e-9);
    EXPECT_EQ(frame.metadata().at("coef." + cfg.exogenous[i]), cfg.coefficients[i]);
  }
}

TEST(SynthLinear, TooFewWeeks) {
  synth::LinearMarketConfig cfg;
  cfg.n_weeks = 3;
  cfg.exogenous = {"a", "b", "c", "d", "e"};
  cfg.coefficients = {1, 1, 1, 1, 1};
  cfg.exog_means = {0, 0, 0, 0, 0};
  cfg.exog_sds = {1, 1, 1, 1, 1};
  EXPECT_EQ(code_of([&] { synth::gen_linear_market(cfg); }), Errc::InsufficientData);
}

TEST(SynthCointegrated, SpreadStaysBounded) {
  const auto frame = synth::gen_cointegrated({});
  const auto a = frame.column("c3_rate"), b = frame.column("capesize_index");
  double worst = 0;
  for (std::size_t t = 0; t < a.size(); ++t) worst = std::max(worst, std::abs(a[t] - b[t]));
  EXPECT_LT(worst, 10.0);
  EXPECT_EQ(code_of([] { synth::gen_cointegrated({.alpha = {0.5, -0.6}}); }), Errc::InvalidSpec);
}

TEST(SynthVessels, ApproachingBallastCountPerWeek) {
  const synth::VesselConfig cfg{.seed = 5, .n_weeks = 6};
  const auto records = synth::gen_vessels(cfg, kQingdao);
  EXPECT_EQ(records, synth::gen_vessels(cfg, kQingdao));
  std::set<std::uint32_t> imos;
  for (const auto& r : records) {
    EXPECT_TRUE(imo_valid(r.imo));
    EXPECT_NO_THROW(validate_record(r));
    imos.insert(r.imo);
  }
  EXPECT_EQ(imos.size(), 7u);
  const auto frame = aggregate_supply(records, kQingdao);
  EXPECT_EQ(frame.column(supply_variable(kQingdao)), std::vector<double>(6, 3.0));
}

TEST(SynthVessels, AllLadenGivesZeroSupply) {
  const synth::VesselConfig cfg{.seed = 8, .n_weeks = 3, .approaching_ballast = 0, .approaching_laden = 4,
                                .departing_ballast = 0};
  const auto frame = aggregate_supply(synth::gen_vessels(cfg, kQingdao), kQingdao);
  EXPECT_EQ(frame.column(supply_variable(kQingdao)), std::vector<double>(3, 0.0));
}

TEST(SynthVessels, CsvRoundTrip) {
  const auto records = synth::gen_vessels({.seed = 2, .n_weeks = 2}, kQingdao);
  const auto text = serialize_vessels(records);
  EXPECT_EQ(serialize_vessels(load_vessels(text)), text);
}
