// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "whatif/error.hpp"
#include "whatif/rng.hpp"
#include "whatif/spatial.hpp"
#include "whatif/timeseries.hpp"

// Deterministic synthetic data. Every generator draws only from Xoshiro256
// seeded by the config, so output is identical across runs and platforms.
// Ground-truth parameters are written into the frame metadata.

namespace whatif::synth {

inline Date default_start() { return *parse_date("2019-01-07"); }  // a Monday

inline std::vector<Date> weekly_index(Date start, std::size_t n) {
  std::vector<Date> index;
  index.reserve(n);
  for (std::size_t t = 0; t < n; ++t) index.push_back(start + std::chrono::days{7 * static_cast<int>(t)});
  return index;
}

/// target = intercept + sum coef_i * x_i + N(0, noise_sigma^2), where each x_i
/// is a stationary AR(1) around its mean.
struct LinearMarketConfig {
  std::uint64_t seed = 42;
  std::size_t n_weeks = 260;
  Date start = default_start();
  std::string target = "c3_rate";
  std::vector<std::string> exogenous{"brazil_loading", "iron_ore_price", "bunker_price"};
  std::vector<double> coefficients{0.001, 0.05, -0.01};
  std::vector<double> exog_means{20000.0, 110.0, 550.0};
  std::vector<double> exog_sds{1500.0, 8.0, 30.0};
  double exog_phi = 0.8;
  double intercept = 5.0;
  double noise_sigma = 0.5;
};

inline TimeSeriesFrame gen_linear_market(const LinearMarketConfig& cfg) {
  const auto k = cfg.exogenous.size();
  if (cfg.coefficients.size() != k || cfg.exog_means.size() != k || cfg.exog_sds.size() != k)
    throw Error(Errc::InvalidSpec, "exogenous names, coefficients, means and sds must have equal length");
  if (cfg.n_weeks < k + 2)
    throw Error(Errc::InsufficientData, "need at least " + std::to_string(k + 2) + " weeks for " +
                                            std::to_string(k) + " exogenous variables");
  if (!(std::abs(cfg.exog_phi) < 1.0)) throw Error(Errc::InvalidSpec, "exogenous AR coefficient must be in (-1, 1)");

  Xoshiro256 rng(cfg.seed);
  const double innovation_scale = std::sqrt(1.0 - cfg.exog_phi * cfg.exog_phi);
  std::vector<double> x(k);
  for (std::size_t i = 0; i < k; ++i) x[i] = cfg.exog_means[i] + cfg.exog_sds[i] * rng.normal();

  std::vector<TimeSeriesFrame::Row> rows;
  rows.reserve(cfg.n_weeks);
  for (std::size_t t = 0; t < cfg.n_weeks; ++t) {
    if (t > 0)
      for (std::size_t i = 0; i < k; ++i)
        x[i] = cfg.exog_means[i] + cfg.exog_phi * (x[i] - cfg.exog_means[i]) +
               cfg.exog_sds[i] * innovation_scale * rng.normal();
    double y = cfg.intercept;
    for (std::size_t i = 0; i < k; ++i) y += cfg.coefficients[i] * x[i];
    const double noise = rng.normal();
    y += cfg.noise_sigma * noise;
    TimeSeriesFrame::Row row{y};
    row.insert(row.end(), x.begin(), x.end());
    rows.push_back(std::move(row));
  }

  std::vector<std::string> names{cfg.target};
  names.insert(names.end(), cfg.exogenous.begin(), cfg.exogenous.end());
  TimeSeriesFrame::Metadata meta{{"intercept", cfg.intercept},
                                 {"noise_sigma", cfg.noise_sigma},
                                 {"seed", static_cast<double>(cfg.seed)}};
  for (std::size_t i = 0; i < k; ++i) meta["coef." + cfg.exogenous[i]] = cfg.coefficients[i];
  return TimeSeriesFrame(weekly_index(cfg.start, cfg.n_weeks), std::move(names), std::move(rows), true,
                         std::move(meta));
}

/// Simulates the error-correction system
///   y_t = y_{t-1} + alpha * (beta' y_{t-1}) + sigma * eps_t
/// which is a common random-walk trend plus a stationary AR(1) spread
/// beta'y with coefficient 1 + beta'alpha. alpha = 0 gives independent random
/// walks.
struct CointegratedConfig {
  std::uint64_t seed = 3;
  std::size_t n_weeks = 2000;
  Date start = default_start();
  std::vector<std::string> names{"c3_rate", "capesize_index"};
  std::vector<double> beta{1.0, -1.0};
  std::vector<double> alpha{-0.3, 0.2};
  double sigma = 1.0;
  std::vector<double> start_levels{100.0, 100.0};
};

inline TimeSeriesFrame gen_cointegrated(const CointegratedConfig& cfg) {
  const auto m = cfg.names.size();
  if (m < 2 || cfg.beta.size() != m || cfg.alpha.size() != m || cfg.start_levels.size() != m)
    throw Error(Errc::InvalidSpec, "names, beta, alpha and start levels must share a length >= 2");
  if (cfg.n_weeks < 2) throw Error(Errc::InsufficientData, "need at least two weeks");
  double ba = 0.0;
  for (std::size_t i = 0; i < m; ++i) ba += cfg.beta[i] * cfg.alpha[i];
  if (!(1.0 + ba > -1.0 && 1.0 + ba <= 1.0 + 1e-12))
    throw Error(Errc::InvalidSpec, "1 + beta'alpha must lie in (-1, 1] for a stable spread");

  Xoshiro256 rng(cfg.seed);
  std::vector<double> y = cfg.start_levels;
  std::vector<TimeSeriesFrame::Row> rows{y};
  rows.reserve(cfg.n_weeks);
  for (std::size_t t = 1; t < cfg.n_weeks; ++t) {
    double spread = 0.0;
    for (std::size_t i = 0; i < m; ++i) spread += cfg.beta[i] * y[i];
    for (std::size_t i = 0; i < m; ++i) y[i] += cfg.alpha[i] * spread + cfg.sigma * rng.normal();
    rows.push_back(y);
  }
  TimeSeriesFrame::Metadata meta{{"sigma", cfg.sigma}, {"seed", static_cast<double>(cfg.seed)}};
  for (std::size_t i = 0; i < m; ++i) {
    meta["beta." + cfg.names[i]] = cfg.beta[i];
    meta["alpha." + cfg.names[i]] = cfg.alpha[i];
  }
  return TimeSeriesFrame(weekly_index(cfg.start, cfg.n_weeks), cfg.names, std::move(rows), true, std::move(meta));
}

/// Stationary AR(1): y_t = phi * y_{t-1} + sigma * eps_t.
struct Ar1Config {
  std::uint64_t seed = 11;
  std::size_t n_weeks = 2000;
  Date start = default_start();
  std::string name = "y";
  double phi = 0.6;
  double sigma = 1.0;
};

inline TimeSeriesFrame gen_ar1(const Ar1Config& cfg) {
  if (!(std::abs(cfg.phi) < 1.0)) throw Error(Errc::InvalidSpec, "AR coefficient must be in (-1, 1)");
  Xoshiro256 rng(cfg.seed);
  double y = cfg.sigma / std::sqrt(1.0 - cfg.phi * cfg.phi) * rng.normal();
  std::vector<TimeSeriesFrame::Row> rows;
  rows.reserve(cfg.n_weeks);
  for (std::size_t t = 0; t < cfg.n_weeks; ++t) {
    if (t > 0) y = cfg.phi * y + cfg.sigma * rng.normal();
    rows.push_back({y});
  }
  return TimeSeriesFrame(weekly_index(cfg.start, cfg.n_weeks), {cfg.name}, std::move(rows), true,
                         {{"phi", cfg.phi}, {"sigma", cfg.sigma}, {"seed", static_cast<double>(cfg.seed)}});
}

/// Straight great-circle tracks around a port. Approaching tracks head for
/// the port center (heading jitter within +/-10 degrees) and are slowed so
/// they stay outside the port radius for the whole span; departing tracks
/// head directly away.
struct VesselConfig {
  std::uint64_t seed = 5;
  std::size_t n_weeks = 4;
  Date start = default_start();
  std::size_t reports_per_week = 14;
  std::size_t approaching_ballast = 3;
  std::size_t approaching_laden = 2;
  std::size_t departing_ballast = 2;
  double min_distance_km = 1500.0;  // beyond the port radius, at the first report
  double max_distance_km = 6000.0;
};

inline std::vector<VesselRecord> gen_vessels(const VesselConfig& cfg, const PortRegion& port) {
  if (cfg.reports_per_week == 0 || cfg.n_weeks == 0) return {};
  if (!(cfg.min_distance_km > 0.0 && cfg.max_distance_km >= cfg.min_distance_km))
    throw Error(Errc::InvalidSpec, "bad distance range");
  Xoshiro256 rng(cfg.seed);
  std::set<std::uint32_t> used;
  auto next_imo = [&] {
    for (;;) {
      const auto imo = imo_from_body(static_cast<std::uint32_t>(900000 + rng.below(100000)));
      if (used.insert(imo).second) return imo;
    }
  };

  const std::size_t reports = cfg.n_weeks * cfg.reports_per_week;
  const double step_hours = 168.0 / static_cast<double>(cfg.reports_per_week);
  const double span_hours = step_hours * static_cast<double>(reports - 1);
  constexpr double km_per_nm = 1.852;
  constexpr double margin_km = 200.0;

  struct Track {
    bool approaching;
    CargoStatus status;
  };
  std::vector<Track> tracks;
  for (std::size_t i = 0; i < cfg.approaching_ballast; ++i) tracks.push_back({true, CargoStatus::Ballast});
  for (std::size_t i = 0; i < cfg.approaching_laden; ++i) tracks.push_back({true, CargoStatus::Laden});
  for (std::size_t i = 0; i < cfg.departing_ballast; ++i) tracks.push_back({false, CargoStatus::Ballast});

  std::vector<VesselRecord> out;
  for (const auto& track : tracks) {
    const auto imo = next_imo();
    const double radial = rng.uniform(0.0, 360.0);
    const double jitter = rng.uniform(-10.0, 10.0);
    double speed = rng.uniform(10.0, 14.0);
    const double first_distance = port.radius_km + rng.uniform(cfg.min_distance_km, cfg.max_distance_km);
    if (track.approaching && span_hours > 0.0)
      speed = std::min(speed, (first_distance - port.radius_km - margin_km) / (span_hours * km_per_nm));
    for (std::size_t r = 0; r < reports; ++r) {
      const double hours = step_hours * static_cast<double>(r);
      const double travelled = speed * km_per_nm * hours;
      const double distance = track.approaching ? first_distance - travelled : port.radius_km + margin_km + travelled;
      const GeoPoint pos = destination(port.center, radial, distance);
      const double to_port = bearing_deg(pos, port.center);
      const double heading = detail::normalize_deg(track.approaching ? to_port + jitter : to_port + 180.0 + jitter);
      VesselRecord rec;
      rec.imo = imo;
      rec.timestamp = Timestamp{cfg.start} + std::chrono::seconds{static_cast<long long>(std::llround(hours * 3600.0))};
      rec.lat = pos.lat;
      rec.lon = pos.lon;
      rec.heading = heading;
      rec.speed_knots = speed;
      rec.cargo_status = track.status;
      out.push_back(rec);
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });
  return out;
}

}  // namespace whatif::synth
