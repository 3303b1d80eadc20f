#pragma once

// Classical Canny edge detector: Gaussian blur, Sobel gradients, non-maximum
// suppression along the quantized gradient direction, double threshold and
// hysteresis.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <utility>
#include <vector>

#include "thermoedge/errors.hpp"
#include "thermoedge/image.hpp"

namespace thermoedge {

// Gradient direction, quantized to the nearest multiple of 45 degrees
// (angles are measured from the +column axis towards +row, modulo 180).
enum class Direction : std::uint8_t { Deg0, Deg45, Deg90, Deg135 };

struct GradientField {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> gx;
  std::vector<double> gy;
  std::vector<double> magnitude;
  std::vector<Direction> direction;

  double mag(std::size_t r, std::size_t c) const { return magnitude[r * width + c]; }
  Direction dir(std::size_t r, std::size_t c) const { return direction[r * width + c]; }
};

namespace detail {

// Reflect-101 border: ... c b | a b c d | c b ...
inline std::size_t reflect(std::ptrdiff_t i, std::size_t n) {
  if (n == 1) return 0;
  const auto len = static_cast<std::ptrdiff_t>(n);
  const std::ptrdiff_t period = 2 * (len - 1);
  i %= period;
  if (i < 0) i += period;
  return static_cast<std::size_t>(i < len ? i : period - i);
}

inline Direction quantize_direction(double gx, double gy) {
  double deg = std::atan2(gy, gx) * 180.0 / std::numbers::pi;
  if (deg < 0.0) deg += 180.0;
  if (deg < 22.5 || deg >= 157.5) return Direction::Deg0;
  if (deg < 67.5) return Direction::Deg45;
  if (deg < 112.5) return Direction::Deg90;
  return Direction::Deg135;
}

}  // namespace detail

// Normalized 1-D Gaussian of radius ceil(3 sigma).
inline std::vector<double> gaussian_kernel(double sigma) {
  if (!(sigma > 0.0)) throw ContractError("gaussian_kernel: sigma must be > 0");
  const auto radius = static_cast<std::ptrdiff_t>(std::ceil(3.0 * sigma));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (std::ptrdiff_t i = -radius; i <= radius; ++i) {
    const double v = std::exp(-static_cast<double>(i * i) / (2.0 * sigma * sigma));
    k[static_cast<std::size_t>(i + radius)] = v;
    sum += v;
  }
  for (double& v : k) v /= sum;
  return k;
}

// Separable blur with reflected borders.
inline Image gaussian_blur(const Image& image, double sigma) {
  const auto kernel = gaussian_kernel(sigma);
  const auto radius = static_cast<std::ptrdiff_t>(kernel.size() / 2);
  const std::size_t w = image.width();
  const std::size_t h = image.height();
  std::vector<double> tmp(w * h), out(w * h);
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      double acc = 0.0;
      for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
        acc += kernel[static_cast<std::size_t>(k + radius)] *
               image.at(r, detail::reflect(static_cast<std::ptrdiff_t>(c) + k, w));
      }
      tmp[r * w + c] = acc;
    }
  }
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      double acc = 0.0;
      for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
        acc += kernel[static_cast<std::size_t>(k + radius)] *
               tmp[detail::reflect(static_cast<std::ptrdiff_t>(r) + k, h) * w + c];
      }
      out[r * w + c] = std::clamp(acc, 0.0, 1.0);
    }
  }
  return Image(w, h, std::move(out));
}

inline GradientField sobel_gradients(const Image& image) {
  if (image.width() < 3 || image.height() < 3) throw ContractError("sobel_gradients: image must be at least 3x3");
  const std::size_t w = image.width();
  const std::size_t h = image.height();
  GradientField g;
  g.width = w;
  g.height = h;
  g.gx.resize(w * h);
  g.gy.resize(w * h);
  g.magnitude.resize(w * h);
  g.direction.resize(w * h);
  auto px = [&](std::size_t r, std::size_t c, int dr, int dc) {
    return image.at(detail::reflect(static_cast<std::ptrdiff_t>(r) + dr, h),
                    detail::reflect(static_cast<std::ptrdiff_t>(c) + dc, w));
  };
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      const double gx = (px(r, c, -1, 1) + 2.0 * px(r, c, 0, 1) + px(r, c, 1, 1)) -
                        (px(r, c, -1, -1) + 2.0 * px(r, c, 0, -1) + px(r, c, 1, -1));
      const double gy = (px(r, c, 1, -1) + 2.0 * px(r, c, 1, 0) + px(r, c, 1, 1)) -
                        (px(r, c, -1, -1) + 2.0 * px(r, c, -1, 0) + px(r, c, -1, 1));
      const std::size_t i = r * w + c;
      g.gx[i] = gx;
      g.gy[i] = gy;
      g.magnitude[i] = std::sqrt(gx * gx + gy * gy);
      g.direction[i] = detail::quantize_direction(gx, gy);
    }
  }
  return g;
}

/// Keeps a pixel's magnitude iff it is a local maximum across its quantized
/// gradient direction: strictly greater than the neighbor behind, and no
/// smaller than the neighbor ahead, so a plateau two pixels wide keeps one.
/// Border pixels are always suppressed.
inline std::vector<double> non_maximum_suppression(const GradientField& g) {
  std::vector<double> out(g.width * g.height, 0.0);
  for (std::size_t r = 1; r + 1 < g.height; ++r) {
    for (std::size_t c = 1; c + 1 < g.width; ++c) {
      int dr = 0;
      int dc = 0;
      switch (g.dir(r, c)) {
        case Direction::Deg0: dc = 1; break;
        case Direction::Deg45: dr = 1; dc = 1; break;
        case Direction::Deg90: dr = 1; break;
        case Direction::Deg135: dr = 1; dc = -1; break;
      }
      const double m = g.mag(r, c);
      const double behind = g.mag(r - dr, c - dc);
      const double ahead = g.mag(r + dr, c + dc);
      if (m > behind && m >= ahead) out[r * g.width + c] = m;
    }
  }
  return out;
}

struct CannyOptions {
  double sigma = 1.0;
  double low = 0.1;   // fraction of the maximum gradient magnitude
  double high = 0.2;  // fraction of the maximum gradient magnitude

  void validate() const {
    if (!(sigma > 0.0)) throw ContractError("canny: sigma must be > 0");
    if (!(low > 0.0 && low < high)) throw ContractError("canny: thresholds must satisfy 0 < low < high");
  }
};

struct CannyResult {
  Image edges;                 // binary: 1.0 = edge
  GradientField gradients;     // of the blurred image
  std::vector<double> thinned; // magnitudes surviving non-maximum suppression
  std::vector<std::uint8_t> strong;
  std::vector<std::uint8_t> weak;
  double low_threshold = 0.0;   // absolute
  double high_threshold = 0.0;  // absolute
};

inline CannyResult canny_detailed(const Image& image, const CannyOptions& options = {}) {
  options.validate();
  CannyResult res;
  res.gradients = sobel_gradients(gaussian_blur(image, options.sigma));
  res.thinned = non_maximum_suppression(res.gradients);
  const std::size_t w = res.gradients.width;
  const std::size_t h = res.gradients.height;
  const double max_mag = *std::max_element(res.gradients.magnitude.begin(), res.gradients.magnitude.end());
  res.low_threshold = options.low * max_mag;
  res.high_threshold = options.high * max_mag;
  res.strong.assign(w * h, 0);
  res.weak.assign(w * h, 0);
  res.edges = Image(w, h, 0.0);
  if (max_mag <= 0.0) return res;

  std::vector<std::size_t> stack;
  for (std::size_t i = 0; i < w * h; ++i) {
    if (res.thinned[i] >= res.high_threshold) {
      res.strong[i] = 1;
      stack.push_back(i);
    } else if (res.thinned[i] >= res.low_threshold) {
      res.weak[i] = 1;
    }
  }
  std::vector<std::uint8_t> kept(w * h, 0);
  for (std::size_t i : stack) kept[i] = 1;
  while (!stack.empty()) {
    const std::size_t i = stack.back();
    stack.pop_back();
    const auto r = static_cast<std::ptrdiff_t>(i / w);
    const auto c = static_cast<std::ptrdiff_t>(i % w);
    for (std::ptrdiff_t dr = -1; dr <= 1; ++dr) {
      for (std::ptrdiff_t dc = -1; dc <= 1; ++dc) {
        const auto rr = r + dr;
        const auto cc = c + dc;
        if (rr < 0 || cc < 0 || rr >= static_cast<std::ptrdiff_t>(h) || cc >= static_cast<std::ptrdiff_t>(w)) continue;
        const auto j = static_cast<std::size_t>(rr) * w + static_cast<std::size_t>(cc);
        if (res.weak[j] && !kept[j]) {
          kept[j] = 1;
          stack.push_back(j);
        }
      }
    }
  }
  for (std::size_t i = 0; i < w * h; ++i)
    if (kept[i]) res.edges.set(i / w, i % w, 1.0);
  return res;
}

// Binary edge map (1.0 = edge).
inline Image canny(const Image& image, const CannyOptions& options = {}) {
  return canny_detailed(image, options).edges;
}

}  // namespace thermoedge
