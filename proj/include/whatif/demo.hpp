// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include "whatif/spatial.hpp"
#include "whatif/synth.hpp"

namespace whatif::synth {

struct DemoOptions {
  std::uint64_t seed = 42;
  std::size_t n_weeks = 156;
  std::string route_id = "C3";
  std::string models = "mlr, arimax(1,0,0), vecm(1), lstm(4,8,100,0.05,1)";
  std::size_t backtest_folds = 4;
  std::size_t vessel_weeks = 4;
};

inline const PortRegion kDemoPort{"qingdao", {36.07, 120.38}, 100.0};

/// Writes a self-contained service workspace into `dir`: a synthetic
/// market CSV, a vessel CSV around the demo port and `whatif.conf`.
/// Returns the config path.
inline std::filesystem::path write_demo_workspace(const std::filesystem::path& dir, const DemoOptions& opt = {}) {
  std::filesystem::create_directories(dir);
  LinearMarketConfig market;
  market.seed = opt.seed;
  market.n_weeks = opt.n_weeks;
  std::ofstream(dir / "market.csv") << serialize_frame(gen_linear_market(market));

  VesselConfig vessels;
  vessels.seed = opt.seed + 1;
  vessels.n_weeks = opt.vessel_weeks;
  vessels.start = default_start() + std::chrono::days{7 * static_cast<int>(opt.n_weeks - opt.vessel_weeks)};
  std::ofstream(dir / "vessels.csv") << serialize_vessels(gen_vessels(vessels, kDemoPort));

  std::string exog;
  for (const auto& x : market.exogenous) exog += (exog.empty() ? "" : ", ") + x;
  const auto path = dir / "whatif.conf";
  std::ofstream(path) << "data_dir = state\n"
                      << "[route " << opt.route_id << "]\n"
                      << "target = " << market.target << "\n"
                      << "exogenous = " << exog << "\n"
                      << "vecm_system = iron_ore_price\n"
                      << "data = market.csv\n"
                      << "vessels = vessels.csv\n"
                      << "port = " << kDemoPort.name << " " << format_number(kDemoPort.center.lat) << " "
                      << format_number(kDemoPort.center.lon) << " " << format_number(kDemoPort.radius_km) << "\n"
                      << "models = " << opt.models << "\n"
                      << "backtest_folds = " << opt.backtest_folds << "\n";
  return path;
}

}  // namespace whatif::synth
