#pragma once

// Independent reference computations used only by the test suites. Nothing
// here calls into the library's forward, quantize or entropy code paths.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "thermoedge/nn.hpp"

namespace oracle {

// Straight-line forward pass in long double; returns {hidden_post..., output}.
struct LongTrace {
  std::vector<long double> hidden;
  long double output = 0.0L;
};

inline LongTrace forward_long(const thermoedge::Mlp& net, const std::vector<long double>& x) {
  const auto& t = net.topology;
  LongTrace tr;
  tr.hidden.assign(t.hidden_size, 0.0L);
  for (std::size_t j = 0; j < t.hidden_size; ++j) {
    long double acc = 0.0L;
    for (std::size_t i = 0; i < t.input_size; ++i) acc += static_cast<long double>(net.w1.data[j * t.input_size + i]) * x[i];
    acc += net.b1[j];
    tr.hidden[j] = acc > 0.0L ? acc : 0.0L;
  }
  long double z = net.b2[0];
  for (std::size_t j = 0; j < t.hidden_size; ++j) z += static_cast<long double>(net.w2.data[j]) * tr.hidden[j];
  tr.output = 1.0L / (1.0L + std::exp(-z));
  return tr;
}

inline long double loss_long(const thermoedge::Mlp& net, const std::vector<long double>& x, long double target) {
  const long double d = forward_long(net, x).output - target;
  return d * d;
}

// Central differences, h applied in long double, for every parameter in the
// order w1, b1, w2, b2.
inline std::vector<double> finite_difference_gradient(const thermoedge::Mlp& net, const std::vector<double>& input,
                                                      double target, double h = 1e-6) {
  std::vector<long double> x(input.begin(), input.end());
  std::vector<double> out;
  thermoedge::Mlp probe = net;
  auto params = probe.parameters();
  for (auto& arr : params) {
    for (double& p : arr) {
      const double saved = p;
      p = saved + h;
      const long double up = loss_long(probe, x, target);
      p = saved - h;
      const long double down = loss_long(probe, x, target);
      p = saved;
      // (p + h) - (p - h) in double is not exactly 2h; use the realized step.
      const long double step = static_cast<long double>(saved + h) - static_cast<long double>(saved - h);
      out.push_back(static_cast<double>((up - down) / step));
    }
  }
  return out;
}

// Bin index for uniform quantization, written independently of the library.
inline int uniform_bin(double x, double lo, double hi, int bins) {
  if (hi <= lo) return 0;
  int b = static_cast<int>(std::floor((x - lo) / (hi - lo) * bins));
  if (b < 0) b = 0;
  if (b > bins - 1) b = bins - 1;
  return b;
}

using Key = std::vector<int>;

/// H(X|Y) by explicit enumeration: group samples by y with linear search,
/// then sum p(y) * H(X | Y = y) using natural logs, converted to bits.
inline double conditional_entropy_bruteforce(const std::vector<Key>& xs, const std::vector<Key>& ys) {
  std::vector<Key> y_values;
  std::vector<std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < ys.size(); ++i) {
    auto it = std::find(y_values.begin(), y_values.end(), ys[i]);
    if (it == y_values.end()) {
      y_values.push_back(ys[i]);
      members.push_back({i});
    } else {
      members[static_cast<std::size_t>(it - y_values.begin())].push_back(i);
    }
  }
  const double n = static_cast<double>(xs.size());
  double h = 0.0;
  for (const auto& group : members) {
    std::vector<Key> x_values;
    std::vector<double> counts;
    for (std::size_t i : group) {
      auto it = std::find(x_values.begin(), x_values.end(), xs[i]);
      if (it == x_values.end()) {
        x_values.push_back(xs[i]);
        counts.push_back(1.0);
      } else {
        counts[static_cast<std::size_t>(it - x_values.begin())] += 1.0;
      }
    }
    const double ny = static_cast<double>(group.size());
    double hy = 0.0;
    for (double c : counts) hy -= (c / ny) * std::log(c / ny);
    h += (ny / n) * hy;
  }
  return h / std::log(2.0);
}

// Marginal entropy in bits by enumeration.
inline double entropy_bruteforce(const std::vector<Key>& xs) {
  std::vector<Key> zero(xs.size(), Key{0});
  return conditional_entropy_bruteforce(xs, zero);
}

struct TransitionOracle {
  double input_to_hidden = 0.0;
  double hidden_to_output = 0.0;
};

/// Exhaustive oracle for a network evaluated on a set of binary patches:
/// identity input symbols, observed-range uniform bins on the hidden layer,
/// threshold 0.5 on the output.
inline TransitionOracle transition_oracle(const thermoedge::Mlp& net, const std::vector<std::vector<double>>& patches,
                                          int hidden_bins) {
  const std::size_t H = net.topology.hidden_size;
  std::vector<std::vector<long double>> hidden;
  std::vector<double> outputs;
  for (const auto& p : patches) {
    // Double-precision straight-line pass in the same accumulation order as a
    // dot product, so bin edges see the same rounding as the library.
    std::vector<long double> h(H);
    for (std::size_t j = 0; j < H; ++j) {
      double acc = net.b1[j];
      for (std::size_t i = 0; i < p.size(); ++i) acc += net.w1.data[j * p.size() + i] * p[i];
      h[j] = acc > 0.0 ? acc : 0.0;
    }
    double z = net.b2[0];
    for (std::size_t j = 0; j < H; ++j) z += net.w2.data[j] * static_cast<double>(h[j]);
    hidden.push_back(h);
    outputs.push_back(z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z)));
  }
  std::vector<double> lo(H, 0.0), hi(H, 0.0);
  for (std::size_t j = 0; j < H; ++j) {
    lo[j] = hi[j] = static_cast<double>(hidden[0][j]);
    for (const auto& h : hidden) {
      lo[j] = std::min(lo[j], static_cast<double>(h[j]));
      hi[j] = std::max(hi[j], static_cast<double>(h[j]));
    }
  }
  std::vector<Key> xs, hs, ys;
  for (std::size_t s = 0; s < patches.size(); ++s) {
    Key x;
    for (double v : patches[s]) x.push_back(v == 1.0 ? 1 : 0);
    Key hk;
    for (std::size_t j = 0; j < H; ++j) hk.push_back(uniform_bin(static_cast<double>(hidden[s][j]), lo[j], hi[j], hidden_bins));
    xs.push_back(x);
    hs.push_back(hk);
    ys.push_back(Key{outputs[s] >= 0.5 ? 1 : 0});
  }
  return {conditional_entropy_bruteforce(xs, hs), conditional_entropy_bruteforce(hs, ys)};
}

// All 512 binary 3x3 patches, in counting order.
inline std::vector<std::vector<double>> all_binary_patches() {
  std::vector<std::vector<double>> out;
  for (int code = 0; code < 512; ++code) {
    std::vector<double> p(9);
    for (int b = 0; b < 9; ++b) p[static_cast<std::size_t>(b)] = (code >> b) & 1 ? 1.0 : 0.0;
    out.push_back(p);
  }
  return out;
}

}  // namespace oracle
