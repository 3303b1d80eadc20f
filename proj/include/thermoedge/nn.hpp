#pragma once

// Two-layer perceptron (input -> ReLU hidden -> sigmoid output) with
// hand-derived backpropagation, Adam, mini-batch training and early stopping.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <span>
#include <string>
#include <vector>

#include "thermoedge/data.hpp"
#include "thermoedge/errors.hpp"
#include "thermoedge/image.hpp"
#include "thermoedge/rng.hpp"

namespace thermoedge {

struct NetworkTopology {
  std::size_t input_size = 9;
  std::size_t hidden_size = 12;
  std::size_t output_size = 1;

  void validate() const {
    if (input_size == 0 || hidden_size == 0 || output_size == 0) {
      throw ContractError("NetworkTopology: all layer sizes must be >= 1");
    }
  }
  bool operator==(const NetworkTopology&) const = default;
};

// Dense row-major matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  bool operator==(const Matrix&) const = default;
};

struct Mlp {
  NetworkTopology topology;
  Matrix w1;               // hidden x input
  std::vector<double> b1;  // hidden
  Matrix w2;               // output x hidden
  std::vector<double> b2;  // output

  Mlp() : Mlp(NetworkTopology{}) {}

  explicit Mlp(const NetworkTopology& t)
      : topology(t),
        w1(t.hidden_size, t.input_size),
        b1(t.hidden_size, 0.0),
        w2(t.output_size, t.hidden_size),
        b2(t.output_size, 0.0) {
    t.validate();
  }

  // Views over the four parameter arrays in a fixed order (w1, b1, w2, b2).
  std::array<std::span<double>, 4> parameters() { return {w1.data, b1, w2.data, b2}; }
  std::array<std::span<const double>, 4> parameters() const { return {w1.data, b1, w2.data, b2}; }

  std::size_t parameter_count() const { return w1.data.size() + b1.size() + w2.data.size() + b2.size(); }

  bool all_finite() const {
    for (auto p : parameters())
      for (double v : p)
        if (!std::isfinite(v)) return false;
    return true;
  }

  bool operator==(const Mlp&) const = default;
};

// Same shapes as Mlp; also used for the Adam moment accumulators.
struct Gradients {
  Matrix dw1;
  std::vector<double> db1;
  Matrix dw2;
  std::vector<double> db2;

  Gradients() = default;
  explicit Gradients(const NetworkTopology& t)
      : dw1(t.hidden_size, t.input_size), db1(t.hidden_size, 0.0), dw2(t.output_size, t.hidden_size),
        db2(t.output_size, 0.0) {}

  std::array<std::span<double>, 4> arrays() { return {dw1.data, db1, dw2.data, db2}; }
  std::array<std::span<const double>, 4> arrays() const { return {dw1.data, db1, dw2.data, db2}; }

  void add(const Gradients& o) {
    auto dst = arrays();
    const auto src = o.arrays();
    for (std::size_t k = 0; k < dst.size(); ++k)
      for (std::size_t i = 0; i < dst[k].size(); ++i) dst[k][i] += src[k][i];
  }

  void scale(double factor) {
    for (auto a : arrays())
      for (double& v : a) v *= factor;
  }
};

struct ForwardTrace {
  std::vector<double> input;
  std::vector<double> hidden_pre;
  std::vector<double> hidden_post;
  std::vector<double> output_pre;
  std::vector<double> output;
};

inline double relu(double z) noexcept { return z > 0.0 ? z : 0.0; }

/// Logistic function, evaluated without overflow for either sign of z. The
/// result is clamped to the open interval (0, 1): in double precision
/// 1/(1+e^-z) rounds to exactly 1 once z exceeds about 36.7.
inline double sigmoid(double z) noexcept {
  constexpr double kLow = std::numeric_limits<double>::min();
  constexpr double kHigh = 1.0 - std::numeric_limits<double>::epsilon() / 2.0;
  double s;
  if (z >= 0.0) {
    s = 1.0 / (1.0 + std::exp(-z));
  } else {
    const double e = std::exp(z);
    s = e / (1.0 + e);
  }
  return s < kLow ? kLow : (s > kHigh ? kHigh : s);
}

// Gaussian He initialization: w ~ N(0, 2/fan_in), biases zero.
inline Mlp he_init(const NetworkTopology& topology, std::uint64_t seed) {
  Mlp net(topology);
  Rng rng(seed);
  const double sd1 = std::sqrt(2.0 / static_cast<double>(topology.input_size));
  const double sd2 = std::sqrt(2.0 / static_cast<double>(topology.hidden_size));
  for (double& w : net.w1.data) w = sd1 * rng.gaussian();
  for (double& w : net.w2.data) w = sd2 * rng.gaussian();
  return net;
}

inline ForwardTrace forward(const Mlp& net, std::span<const double> input) {
  const auto& t = net.topology;
  if (input.size() != t.input_size) {
    throw ContractError("forward: input has " + std::to_string(input.size()) + " values, network expects " +
                        std::to_string(t.input_size));
  }
  ForwardTrace tr;
  tr.input.assign(input.begin(), input.end());
  tr.hidden_pre.resize(t.hidden_size);
  tr.hidden_post.resize(t.hidden_size);
  for (std::size_t j = 0; j < t.hidden_size; ++j) {
    double z = net.b1[j];
    for (std::size_t i = 0; i < t.input_size; ++i) z += net.w1(j, i) * input[i];
    tr.hidden_pre[j] = z;
    tr.hidden_post[j] = relu(z);
  }
  tr.output_pre.resize(t.output_size);
  tr.output.resize(t.output_size);
  for (std::size_t k = 0; k < t.output_size; ++k) {
    double z = net.b2[k];
    for (std::size_t j = 0; j < t.hidden_size; ++j) z += net.w2(k, j) * tr.hidden_post[j];
    tr.output_pre[k] = z;
    tr.output[k] = sigmoid(z);
  }
  return tr;
}

inline double mse_loss(double pred, double target) noexcept {
  const double d = pred - target;
  return d * d;
}

inline double mse_loss(std::span<const double> preds, std::span<const double> targets) {
  if (preds.size() != targets.size() || preds.empty()) throw ContractError("mse_loss: size mismatch or empty batch");
  double sum = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) sum += mse_loss(preds[i], targets[i]);
  return sum / static_cast<double>(preds.size());
}

/// Gradients of the per-sample loss mean_k (output_k - target_k)^2 with
/// respect to every parameter. The ReLU derivative at exactly 0 is taken as 0.
inline Gradients backward(const Mlp& net, const ForwardTrace& trace, std::span<const double> target) {
  const auto& t = net.topology;
  if (target.size() != t.output_size || trace.output.size() != t.output_size ||
      trace.hidden_pre.size() != t.hidden_size || trace.input.size() != t.input_size) {
    throw ContractError("backward: trace or target does not match the network topology");
  }
  Gradients g(t);
  const double per_output = 2.0 / static_cast<double>(t.output_size);
  std::vector<double> delta_out(t.output_size);
  for (std::size_t k = 0; k < t.output_size; ++k) {
    const double o = trace.output[k];
    delta_out[k] = per_output * (o - target[k]) * o * (1.0 - o);
    g.db2[k] = delta_out[k];
    for (std::size_t j = 0; j < t.hidden_size; ++j) g.dw2(k, j) = delta_out[k] * trace.hidden_post[j];
  }
  for (std::size_t j = 0; j < t.hidden_size; ++j) {
    if (!(trace.hidden_pre[j] > 0.0)) continue;
    double delta = 0.0;
    for (std::size_t k = 0; k < t.output_size; ++k) delta += net.w2(k, j) * delta_out[k];
    g.db1[j] = delta;
    for (std::size_t i = 0; i < t.input_size; ++i) g.dw1(j, i) = delta * trace.input[i];
  }
  return g;
}

inline Gradients backward(const Mlp& net, const ForwardTrace& trace, double target) {
  return backward(net, trace, std::span<const double>(&target, 1));
}

struct AdamConfig {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void validate() const {
    if (!(lr > 0.0) || !(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0) || !(epsilon > 0.0)) {
      throw ContractError("AdamConfig: need lr > 0, 0 <= beta1, beta2 < 1 and epsilon > 0");
    }
  }
  bool operator==(const AdamConfig&) const = default;
};

struct AdamState {
  AdamConfig config;
  Gradients m;
  Gradients v;
  std::uint64_t t = 0;

  AdamState() = default;
  AdamState(const NetworkTopology& topology, AdamConfig cfg) : config(cfg), m(topology), v(topology) {
    config.validate();
  }
};

// One bias-corrected Adam update; increments state.t.
inline void adam_step(AdamState& state, Mlp& net, const Gradients& grads) {
  state.t += 1;
  const auto& c = state.config;
  const double correction1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.t));
  const double correction2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.t));
  auto params = net.parameters();
  auto m = state.m.arrays();
  auto v = state.v.arrays();
  const auto g = grads.arrays();
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (g[k].size() != params[k].size() || m[k].size() != params[k].size()) {
      throw ContractError("adam_step: gradient shapes do not match the network");
    }
    for (std::size_t i = 0; i < params[k].size(); ++i) {
      m[k][i] = c.beta1 * m[k][i] + (1.0 - c.beta1) * g[k][i];
      v[k][i] = c.beta2 * v[k][i] + (1.0 - c.beta2) * g[k][i] * g[k][i];
      const double m_hat = m[k][i] / correction1;
      const double v_hat = v[k][i] / correction2;
      params[k][i] -= c.lr * m_hat / (std::sqrt(v_hat) + c.epsilon);
    }
  }
}

struct EpochStats {
  double train_mse = 0.0;  // mean over every sample seen during the pass
  std::size_t steps = 0;   // optimizer steps taken
};

/// One pass over `data`: seeded Fisher-Yates shuffle, consecutive batches of
/// `batch_size` (the last one may be short), one Adam step per batch on the
/// batch-mean gradient. Loss is measured before each batch's update.
inline EpochStats train_epoch(Mlp& net, AdamState& optimizer, const PatchDataset& data, std::size_t batch_size,
                              std::uint64_t seed) {
  if (data.empty()) throw ContractError("train_epoch: dataset is empty");
  if (batch_size == 0) throw ContractError("train_epoch: batch size must be positive");
  if (net.topology.input_size != kPatchSize || net.topology.output_size != 1) {
    throw ContractError("train_epoch: patch training needs a 9-input, 1-output network");
  }
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  shuffle(std::span<std::size_t>(order), rng);

  EpochStats stats;
  double loss_sum = 0.0;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    const std::size_t end = std::min(order.size(), start + batch_size);
    Gradients sum(net.topology);
    for (std::size_t b = start; b < end; ++b) {
      const std::size_t idx = order[b];
      const auto trace = forward(net, data.patches[idx]);
      const double target = data.labels[idx];
      loss_sum += mse_loss(trace.output[0], target);
      sum.add(backward(net, trace, target));
    }
    sum.scale(1.0 / static_cast<double>(end - start));
    adam_step(optimizer, net, sum);
    ++stats.steps;
  }
  stats.train_mse = loss_sum / static_cast<double>(data.size());
  return stats;
}

inline double evaluate_mse(const Mlp& net, const PatchDataset& data) {
  if (data.empty()) throw ContractError("evaluate_mse: dataset is empty");
  double sum = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    sum += mse_loss(forward(net, data.patches[i]).output[0], data.labels[i]);
  }
  return sum / static_cast<double>(data.size());
}

struct FitOptions {
  std::size_t max_epochs = 100;
  std::size_t patience = 5;
  std::size_t batch_size = 128;
  std::uint64_t seed = 0;
  AdamConfig adam;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_mse = 0.0;
  double val_mse = 0.0;
  Mlp snapshot;  // weights at the end of this epoch

  bool operator==(const EpochRecord&) const = default;
};

struct TrainingHistory {
  Mlp initial;
  std::vector<EpochRecord> records;
  std::size_t stopped_epoch = 0;
  std::size_t best_epoch = 0;  // epoch with the lowest validation MSE

  // The early-stopped network: the snapshot with the best validation error.
  const Mlp& best_network() const {
    if (records.empty()) throw ContractError("TrainingHistory: no completed epochs");
    return records.at(best_epoch - 1).snapshot;
  }

  bool operator==(const TrainingHistory&) const = default;
};

/// Trains until `max_epochs` or until validation MSE has failed to improve
/// strictly on the best value for `patience` consecutive epochs. Epoch k is
/// shuffled with derive_seed(options.seed, k).
inline TrainingHistory fit(Mlp net, const PatchDataset& train, const PatchDataset& val, const FitOptions& options) {
  if (train.empty() || val.empty()) throw ContractError("fit: training and validation sets must be non-empty");
  if (options.patience == 0) throw ContractError("fit: patience must be >= 1");
  TrainingHistory history;
  history.initial = net;
  AdamState adam(net.topology, options.adam);
  double best = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;
  for (std::size_t epoch = 1; epoch <= options.max_epochs; ++epoch) {
    const auto stats = train_epoch(net, adam, train, options.batch_size, derive_seed(options.seed, epoch));
    if (!net.all_finite()) throw std::runtime_error("fit: non-finite weights after epoch " + std::to_string(epoch));
    const double val_mse = evaluate_mse(net, val);
    history.records.push_back({epoch, stats.train_mse, val_mse, net});
    history.stopped_epoch = epoch;
    if (val_mse < best) {
      best = val_mse;
      history.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= options.patience) {
      break;
    }
  }
  return history;
}

/// Slides a 3x3 window over every interior pixel; the output pixel is 1 iff
/// the network output is >= 0.5. Border pixels are 0.
inline Image predict_edge_map(const Mlp& net, const Image& image) {
  if (image.width() < kPatchSide || image.height() < kPatchSide) {
    throw ContractError("predict_edge_map: image must be at least 3x3");
  }
  Image out(image.width(), image.height(), 0.0);
  Patch patch{};
  for (std::size_t r = 1; r + 1 < image.height(); ++r) {
    for (std::size_t c = 1; c + 1 < image.width(); ++c) {
      for (std::size_t dr = 0; dr < kPatchSide; ++dr)
        for (std::size_t dc = 0; dc < kPatchSide; ++dc) patch[dr * kPatchSide + dc] = image.at(r + dr - 1, c + dc - 1);
      if (forward(net, patch).output[0] >= 0.5) out.set(r, c, 1.0);
    }
  }
  return out;
}

}  // namespace thermoedge
