// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "whatif/model.hpp"
#include "whatif/rng.hpp"

namespace whatif {

/// One supervised example: `inputs` holds w rows of M standardized values
/// (target first), `label` is the standardized target one step after the
/// last row.
struct LstmSample {
  Eigen::MatrixXd inputs;
  double label = 0.0;
};

namespace detail {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct LstmTrace {
  std::vector<Eigen::VectorXd> gates;  // post-activation [i f g o], per step
  std::vector<Eigen::VectorXd> cells;  // c_0..c_w
  std::vector<Eigen::VectorXd> hidden; // h_0..h_w
};

inline double lstm_forward(const LstmWeights& w, const Eigen::MatrixXd& inputs, LstmTrace* trace) {
  const auto hs = w.head.size();
  Eigen::VectorXd h = Eigen::VectorXd::Zero(hs);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(hs);
  if (trace) {
    trace->gates.clear();
    trace->cells.assign(1, c);
    trace->hidden.assign(1, h);
  }
  for (Eigen::Index t = 0; t < inputs.rows(); ++t) {
    Eigen::VectorXd a = w.input * inputs.row(t).transpose() + w.recurrent * h + w.bias;
    for (Eigen::Index j = 0; j < hs; ++j) {
      a(j) = sigmoid(a(j));
      a(hs + j) = sigmoid(a(hs + j));
      a(2 * hs + j) = std::tanh(a(2 * hs + j));
      a(3 * hs + j) = sigmoid(a(3 * hs + j));
    }
    c = a.segment(hs, hs).cwiseProduct(c) + a.head(hs).cwiseProduct(a.segment(2 * hs, hs));
    h = a.tail(hs).cwiseProduct(c.array().tanh().matrix());
    if (trace) {
      trace->gates.push_back(std::move(a));
      trace->cells.push_back(c);
      trace->hidden.push_back(h);
    }
  }
  return w.head.dot(h) + w.head_bias;
}

inline LstmWeights zero_like(const LstmWeights& w) {
  return {Eigen::MatrixXd::Zero(w.input.rows(), w.input.cols()),
          Eigen::MatrixXd::Zero(w.recurrent.rows(), w.recurrent.cols()), Eigen::VectorXd::Zero(w.bias.size()),
          Eigen::VectorXd::Zero(w.head.size()), 0.0};
}

}  // namespace detail

/// All weights and biases uniform in +/- 1/sqrt(hidden), drawn in the order
/// input, recurrent, bias, head, head bias.
inline LstmWeights init_lstm_weights(Eigen::Index inputs, Eigen::Index hidden, std::uint64_t seed) {
  Xoshiro256 rng(seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
  auto draw = [&] { return rng.uniform(-bound, bound); };
  LstmWeights w;
  w.input = Eigen::MatrixXd(4 * hidden, inputs);
  w.recurrent = Eigen::MatrixXd(4 * hidden, hidden);
  w.bias = Eigen::VectorXd(4 * hidden);
  w.head = Eigen::VectorXd(hidden);
  for (Eigen::Index i = 0; i < w.input.size(); ++i) w.input.data()[i] = draw();
  for (Eigen::Index i = 0; i < w.recurrent.size(); ++i) w.recurrent.data()[i] = draw();
  for (Eigen::Index i = 0; i < w.bias.size(); ++i) w.bias(i) = draw();
  for (Eigen::Index i = 0; i < w.head.size(); ++i) w.head(i) = draw();
  w.head_bias = draw();
  return w;
}

inline Eigen::VectorXd flatten(const LstmWeights& w) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(w.parameter_count()));
  Eigen::Index at = 0;
  auto put = [&](const auto& m) {
    out.segment(at, m.size()) = Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
    at += m.size();
  };
  put(w.input);
  put(w.recurrent);
  put(w.bias);
  put(w.head);
  out(at) = w.head_bias;
  return out;
}

inline LstmWeights unflatten(const Eigen::VectorXd& flat, const LstmWeights& shape) {
  LstmWeights w = shape;
  Eigen::Index at = 0;
  auto take = [&](auto& m) {
    Eigen::Map<Eigen::VectorXd>(m.data(), m.size()) = flat.segment(at, m.size());
    at += m.size();
  };
  take(w.input);
  take(w.recurrent);
  take(w.bias);
  take(w.head);
  w.head_bias = flat(at);
  return w;
}

inline double lstm_predict(const LstmWeights& w, const Eigen::MatrixXd& inputs) {
  return detail::lstm_forward(w, inputs, nullptr);
}

/// Mean squared error over the samples and, when `grad` is given, its exact
/// gradient by backpropagation through time.
inline double lstm_loss(const LstmWeights& w, const std::vector<LstmSample>& samples, LstmWeights* grad = nullptr) {
  if (grad) *grad = detail::zero_like(w);
  if (samples.empty()) return 0.0;
  const auto hs = w.head.size();
  const double inv_n = 1.0 / static_cast<double>(samples.size());
  double loss = 0.0;
  detail::LstmTrace trace;
  for (const auto& s : samples) {
    const double pred = detail::lstm_forward(w, s.inputs, grad ? &trace : nullptr);
    const double err = pred - s.label;
    loss += err * err * inv_n;
    if (!grad) continue;

    const double dpred = 2.0 * err * inv_n;
    const auto steps = static_cast<std::size_t>(s.inputs.rows());
    grad->head += dpred * trace.hidden[steps];
    grad->head_bias += dpred;
    Eigen::VectorXd dh = dpred * w.head;
    Eigen::VectorXd dc = Eigen::VectorXd::Zero(hs);
    Eigen::VectorXd da(4 * hs);
    for (std::size_t t = steps; t-- > 0;) {
      const auto& g = trace.gates[t];
      const auto i = g.head(hs).array();
      const auto f = g.segment(hs, hs).array();
      const auto cand = g.segment(2 * hs, hs).array();
      const auto o = g.tail(hs).array();
      const Eigen::ArrayXd tc = trace.cells[t + 1].array().tanh();
      dc.array() += dh.array() * o * (1.0 - tc.square());
      da.head(hs) = (dc.array() * cand * i * (1.0 - i)).matrix();
      da.segment(hs, hs) = (dc.array() * trace.cells[t].array() * f * (1.0 - f)).matrix();
      da.segment(2 * hs, hs) = (dc.array() * i * (1.0 - cand.square())).matrix();
      da.tail(hs) = (dh.array() * tc * o * (1.0 - o)).matrix();
      grad->input.noalias() += da * s.inputs.row(static_cast<Eigen::Index>(t));
      grad->recurrent.noalias() += da * trace.hidden[t].transpose();
      grad->bias += da;
      dh.noalias() = w.recurrent.transpose() * da;
      dc = (dc.array() * f).matrix();
    }
  }
  return loss;
}

namespace detail {

struct LstmData {
  std::vector<double> means;
  std::vector<double> scales;
  Eigen::MatrixXd standardized;  // rows x (1 + |exog|)
  std::size_t first_row = 0;
};

inline LstmData prepare_lstm_data(const TimeSeriesFrame& frame, const ModelSpec& spec) {
  std::vector<std::string> columns{spec.target};
  columns.insert(columns.end(), spec.exogenous.begin(), spec.exogenous.end());
  auto [first_row, raw] = trailing_complete_block(frame, columns);
  LstmData data;
  data.first_row = first_row;
  const auto n = static_cast<double>(std::max<Eigen::Index>(1, raw.rows()));
  for (Eigen::Index c = 0; c < raw.cols(); ++c) {
    const double mean = raw.rows() > 0 ? raw.col(c).sum() / n : 0.0;
    const double sd = raw.rows() > 0 ? std::sqrt((raw.col(c).array() - mean).square().sum() / n) : 0.0;
    const double scale = sd > 1e-12 ? sd : 1.0;
    data.means.push_back(mean);
    data.scales.push_back(scale);
    raw.col(c) = (raw.col(c).array() - mean) / scale;
  }
  data.standardized = std::move(raw);
  return data;
}

inline std::vector<LstmSample> make_samples(const Eigen::MatrixXd& series, Eigen::Index window) {
  std::vector<LstmSample> out;
  for (Eigen::Index t = window - 1; t + 1 < series.rows(); ++t)
    out.push_back({series.middleRows(t - window + 1, window), series(t + 1, 0)});
  return out;
}

}  // namespace detail

/// Single-layer LSTM on standardized (target, exogenous) rows, trained by
/// full-batch gradient descent on next-step target MSE. Standardization
/// statistics are frozen here and reused by forecast_lstm.
inline FittedModel fit_lstm(const TimeSeriesFrame& frame, const ModelSpec& spec) {
  if (spec.kind != ModelKind::LSTM) throw Error(Errc::InvalidSpec, "fit_lstm needs an LSTM spec");
  validate_spec(spec, frame);
  const auto& opt = spec.lstm;
  auto data = detail::prepare_lstm_data(frame, spec);
  const auto n = data.standardized.rows();
  if (n <= opt.window + 10)
    throw Error(Errc::InsufficientData, "LSTM with window " + std::to_string(opt.window) + " needs more than " +
                                            std::to_string(opt.window + 10) + " gap-free rows, have " +
                                            std::to_string(n));

  const auto samples = detail::make_samples(data.standardized, opt.window);
  LstmParameters params;
  params.weights = init_lstm_weights(data.standardized.cols(), opt.hidden_size, opt.seed);

  Eigen::VectorXd theta = flatten(params.weights);
  LstmWeights grad;
  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    const double loss = lstm_loss(params.weights, samples, &grad);
    if (!std::isfinite(loss))
      throw Error(Errc::DivergedTraining, "non-finite loss at epoch " + std::to_string(epoch));
    params.loss_history.push_back(loss);
    theta -= opt.learning_rate * flatten(grad);
    params.weights = unflatten(theta, params.weights);
  }
  params.trained = opt.epochs > 0;

  double ssr = 0.0;
  for (const auto& s : samples) {
    const double err = (lstm_predict(params.weights, s.inputs) - s.label) * data.scales[0];
    ssr += err * err;
  }
  if (!std::isfinite(ssr)) throw Error(Errc::DivergedTraining, "non-finite residuals after training");

  params.means = std::move(data.means);
  params.scales = std::move(data.scales);
  params.tail_inputs = data.standardized.bottomRows(opt.window);

  FittedModel model;
  model.spec = spec;
  model.residual_sigma = std::sqrt(ssr / static_cast<double>(samples.size()));
  model.parameters = std::move(params);
  model.fit_range = detail::make_range(frame, data.first_row, static_cast<std::size_t>(n));
  return model;
}

/// Recursive multi-step forecast: each prediction, together with the
/// scenario's exogenous values for that step, becomes the next input row.
inline Forecast forecast_lstm(const FittedModel& model, const ExogPaths& paths, std::size_t horizon) {
  detail::check_horizon(horizon);
  const auto& params = detail::params_of<LstmParameters>(model, ModelKind::LSTM);
  const auto& exog = model.spec.exogenous;
  std::vector<const std::vector<double>*> exog_paths;
  for (const auto& x : exog) exog_paths.push_back(&detail::require_path(paths, x, horizon));

  Eigen::MatrixXd window = params.tail_inputs;
  const auto w = window.rows();
  Forecast out{ModelKind::LSTM, horizon, {}, model.fit_range.end};
  out.values.reserve(horizon);
  for (std::size_t s = 0; s < horizon; ++s) {
    const double z = lstm_predict(params.weights, window);
    out.values.push_back(z * params.scales[0] + params.means[0]);
    for (Eigen::Index r = 0; r + 1 < w; ++r) window.row(r) = window.row(r + 1);
    window(w - 1, 0) = z;
    for (std::size_t i = 0; i < exog.size(); ++i)
      window(w - 1, static_cast<Eigen::Index>(i + 1)) = ((*exog_paths[i])[s] - params.means[i + 1]) / params.scales[i + 1];
  }
  return out;
}

/// Largest relative disagreement between the analytic gradient and central
/// finite differences (step 1e-5) over every parameter. A pair where both
/// magnitudes are below 1e-12 counts as agreement.
inline double lstm_gradient_check(const LstmWeights& weights, const std::vector<LstmSample>& samples,
                                  double step = 1e-5) {
  LstmWeights grad;
  lstm_loss(weights, samples, &grad);
  const Eigen::VectorXd analytic = flatten(grad);
  Eigen::VectorXd theta = flatten(weights);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    const double saved = theta(i);
    theta(i) = saved + step;
    const double up = lstm_loss(unflatten(theta, weights), samples);
    theta(i) = saved - step;
    const double down = lstm_loss(unflatten(theta, weights), samples);
    theta(i) = saved;
    const double numeric = (up - down) / (2.0 * step);
    const double scale = std::max(std::abs(analytic(i)), std::abs(numeric));
    if (scale < 1e-12) continue;
    worst = std::max(worst, std::abs(analytic(i) - numeric) / scale);
  }
  return worst;
}

/// Gradient check on the seeded initial weights and the frame's first (at
/// most 20) training samples.
inline double lstm_gradient_check(const ModelSpec& spec, const TimeSeriesFrame& frame) {
  validate_spec(spec, frame);
  const auto data = detail::prepare_lstm_data(frame, spec);
  auto samples = detail::make_samples(data.standardized, spec.lstm.window);
  if (samples.size() > 20) samples.resize(20);
  const auto weights = init_lstm_weights(data.standardized.cols(), spec.lstm.hidden_size, spec.lstm.seed);
  return lstm_gradient_check(weights, samples);
}

}  // namespace whatif
