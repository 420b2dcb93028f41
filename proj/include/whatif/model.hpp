// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "whatif/error.hpp"
#include "whatif/time.hpp"
#include "whatif/timeseries.hpp"

namespace whatif {

/// Model families, in the fixed order used for tie-breaking.
enum class ModelKind { MLR = 0, ARIMAX = 1, VECM = 2, LSTM = 3 };

inline constexpr std::array<ModelKind, 4> kAllModelKinds{ModelKind::MLR, ModelKind::ARIMAX, ModelKind::VECM,
                                                         ModelKind::LSTM};

constexpr std::string_view to_string(ModelKind kind) noexcept {
  switch (kind) {
    case ModelKind::MLR: return "MLR";
    case ModelKind::ARIMAX: return "ARIMAX";
    case ModelKind::VECM: return "VECM";
    case ModelKind::LSTM: return "LSTM";
  }
  return "?";
}

/// Case-insensitive.
inline std::optional<ModelKind> parse_model_kind(std::string_view s) {
  std::string up;
  for (char c : s) up.push_back(static_cast<char>(c >= 'a' && c <= 'z' ? c - 32 : c));
  for (auto k : kAllModelKinds)
    if (up == to_string(k)) return k;
  return std::nullopt;
}

struct ArimaxOrder {
  int p = 1;
  int d = 1;
  int q = 1;
};

struct VecmOptions {
  int lag_order = 1;
};

struct LstmOptions {
  int window = 4;
  int hidden_size = 8;
  int epochs = 200;
  double learning_rate = 0.05;
  std::uint64_t seed = 1;
};

struct ModelSpec {
  ModelKind kind = ModelKind::MLR;
  std::string target;
  std::vector<std::string> exogenous;
  ArimaxOrder arimax;
  VecmOptions vecm;
  LstmOptions lstm;
};

/// Checks the spec against the frame it will be fitted on.
inline void validate_spec(const ModelSpec& spec, const TimeSeriesFrame& frame) {
  if (spec.target.empty()) throw Error(Errc::InvalidSpec, "empty target");
  if (!frame.has_variable(spec.target)) throw Error(Errc::MissingVariable, "no variable '" + spec.target + "'");
  for (const auto& x : spec.exogenous) {
    if (x == spec.target) throw Error(Errc::InvalidSpec, "target '" + x + "' listed as exogenous");
    if (!frame.has_variable(x)) throw Error(Errc::MissingVariable, "no variable '" + x + "'");
  }
  switch (spec.kind) {
    case ModelKind::MLR:
      if (spec.exogenous.empty()) throw Error(Errc::InvalidSpec, "MLR needs at least one exogenous variable");
      break;
    case ModelKind::ARIMAX:
      if (spec.arimax.p < 0 || spec.arimax.d < 0 || spec.arimax.q < 0)
        throw Error(Errc::InvalidSpec, "ARIMAX orders must be nonnegative");
      break;
    case ModelKind::VECM:
      if (spec.vecm.lag_order < 1) throw Error(Errc::InvalidSpec, "VECM lag order must be >= 1");
      break;
    case ModelKind::LSTM:
      if (spec.lstm.window < 1 || spec.lstm.hidden_size < 1 || spec.lstm.epochs < 0 ||
          !(spec.lstm.learning_rate > 0.0))
        throw Error(Errc::InvalidSpec, "LSTM hyperparameters must be positive");
      break;
  }
}

struct FitRange {
  Date start{};
  Date end{};
  std::size_t rows = 0;
};

struct MlrParameters {
  double intercept = 0.0;
  std::vector<double> coefficients;  // aligned with spec.exogenous
};

struct ArimaxParameters {
  double intercept = 0.0;
  std::vector<double> ar;
  std::vector<double> ma;
  std::vector<double> exog;  // aligned with spec.exogenous, on d-times differenced data
  int d = 0;
  // Recursion state at the end of the fit range.
  std::vector<double> recent_residuals;    // last p values of the exog-adjusted series, oldest first
  std::vector<double> recent_innovations;  // last q innovations, oldest first
  std::vector<double> target_tail;         // last value of the j-th difference of the target, j = 0..d-1
  std::vector<std::vector<double>> exog_tail;  // same, per exogenous variable
};

struct VecmParameters {
  Eigen::VectorXd alpha;         // loading, one entry per system variable
  Eigen::VectorXd beta;          // cointegrating vector, beta[0] == 1 (target)
  double coint_intercept = 0.0;  // equilibrium: beta'y == coint_intercept
  std::vector<Eigen::MatrixXd> gamma;  // short-run matrices Gamma_1..Gamma_{k-1}
  Eigen::VectorXd intercept;
  Eigen::MatrixXd tail_levels;  // last k observed rows of the system, oldest first
};

struct LstmWeights {
  Eigen::MatrixXd input;      // 4H x M, gate blocks in order input, forget, cell, output
  Eigen::MatrixXd recurrent;  // 4H x H
  Eigen::VectorXd bias;       // 4H
  Eigen::VectorXd head;       // H
  double head_bias = 0.0;

  std::size_t parameter_count() const {
    return static_cast<std::size_t>(input.size() + recurrent.size() + bias.size() + head.size() + 1);
  }
};

struct LstmParameters {
  LstmWeights weights;
  std::vector<double> means;  // standardization, target first then exogenous
  std::vector<double> scales;
  bool trained = false;
  std::vector<double> loss_history;
  Eigen::MatrixXd tail_inputs;  // last w standardized input rows
};

using Parameters = std::variant<MlrParameters, ArimaxParameters, VecmParameters, LstmParameters>;

/// Estimated model, immutable once returned from a fit_* function.
struct FittedModel {
  ModelSpec spec;
  Parameters parameters;
  double residual_sigma = 0.0;
  FitRange fit_range;

  ModelKind kind() const noexcept { return spec.kind; }
};

struct Forecast {
  ModelKind model_kind = ModelKind::MLR;
  std::size_t horizon = 0;
  std::vector<double> values;
  Date origin{};
};

/// Future exogenous values keyed by variable name.
using ExogPaths = std::map<std::string, std::vector<double>>;

namespace detail {

inline void check_horizon(std::size_t horizon) {
  if (horizon == 0) throw Error(Errc::InvalidHorizon, "horizon must be >= 1");
}

inline const std::vector<double>& require_path(const ExogPaths& paths, const std::string& var, std::size_t horizon) {
  const auto it = paths.find(var);
  if (it == paths.end()) throw Error(Errc::MissingExogPath, "no path for '" + var + "'");
  if (it->second.size() < horizon)
    throw Error(Errc::MissingExogPath, "path for '" + var + "' has " + std::to_string(it->second.size()) +
                                           " steps, need " + std::to_string(horizon));
  for (std::size_t t = 0; t < horizon; ++t)
    if (!std::isfinite(it->second[t]))
      throw Error(Errc::MissingExogPath, "path for '" + var + "' has a missing value at step " + std::to_string(t));
  return it->second;
}

template <class Params>
const Params& params_of(const FittedModel& model, ModelKind expected) {
  if (model.kind() != expected || !std::holds_alternative<Params>(model.parameters))
    throw Error(Errc::InvalidSpec, std::string("expected a ") + std::string(to_string(expected)) + " model");
  return std::get<Params>(model.parameters);
}

/// Rows of the final gap-free block over `columns` (sequential models need
/// an unbroken history). Returns (first row, row-major values).
inline std::pair<std::size_t, Eigen::MatrixXd> trailing_complete_block(const TimeSeriesFrame& frame,
                                                                       const std::vector<std::string>& columns) {
  std::vector<std::size_t> cols;
  for (const auto& c : columns) cols.push_back(*frame.column_index(c));
  std::size_t end = frame.size();
  auto complete = [&](std::size_t r) {
    for (auto c : cols)
      if (is_missing(frame.rows()[r][c])) return false;
    return true;
  };
  while (end > 0 && !complete(end - 1)) --end;
  std::size_t start = end;
  while (start > 0 && complete(start - 1)) --start;
  Eigen::MatrixXd data(static_cast<Eigen::Index>(end - start), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t r = start; r < end; ++r)
    for (std::size_t j = 0; j < cols.size(); ++j)
      data(static_cast<Eigen::Index>(r - start), static_cast<Eigen::Index>(j)) = frame.rows()[r][cols[j]];
  return {start, std::move(data)};
}

inline FitRange make_range(const TimeSeriesFrame& frame, std::size_t start, std::size_t rows) {
  if (rows == 0) return {};
  return {frame.index()[start], frame.index()[start + rows - 1], rows};
}

}  // namespace detail
}  // namespace whatif
