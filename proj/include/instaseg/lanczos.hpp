#pragma once

// Separable Lanczos resampling (window a = 3).
//
// Output pixel centers map to source coordinates by
//   src = (dst + 0.5) * in / out - 0.5
// When shrinking, the kernel is stretched by in/out so every source pixel
// that falls under the output footprint contributes. Taps outside the image
// are dropped and the remaining weights renormalized to sum 1, which keeps
// constant images constant at every scale.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "instaseg/raster.hpp"

namespace instaseg {

inline constexpr int kLanczosWindow = 3;

inline double lanczos_kernel(double x, int a = kLanczosWindow) {
  if (x == 0.0) return 1.0;
  const double ax = std::abs(x);
  if (ax >= a) return 0.0;
  // sin(pi k) is not exactly zero in floating point; integer taps must be.
  if (ax == std::floor(ax)) return 0.0;
  const double px = std::numbers::pi * x;
  return a * std::sin(px) * std::sin(px / a) / (px * px);
}

namespace detail {

struct Tap {
  int index;
  double weight;
};

inline std::vector<std::vector<Tap>> lanczos_taps(std::uint32_t in, std::uint32_t out) {
  const double scale = static_cast<double>(in) / out;
  const double stretch = std::max(1.0, scale);
  const double support = kLanczosWindow * stretch;
  std::vector<std::vector<Tap>> taps(out);
  for (std::uint32_t d = 0; d < out; ++d) {
    const double center = (d + 0.5) * scale - 0.5;
    const int lo = std::max(0, static_cast<int>(std::floor(center - support)));
    const int hi = std::min(static_cast<int>(in) - 1, static_cast<int>(std::ceil(center + support)));
    double total = 0.0;
    for (int i = lo; i <= hi; ++i) {
      const double w = lanczos_kernel((i - center) / stretch);
      if (w != 0.0) {
        taps[d].push_back({i, w});
        total += w;
      }
    }
    if (taps[d].empty() || total == 0.0) {
      // Degenerate footprint: fall back to the nearest source sample.
      const int nearest = std::clamp(static_cast<int>(std::lround(center)), 0, static_cast<int>(in) - 1);
      taps[d] = {{nearest, 1.0}};
      continue;
    }
    for (auto& t : taps[d]) t.weight /= total;
  }
  return taps;
}

template <typename T>
struct SampleTraits;

template <>
struct SampleTraits<std::uint8_t> {
  static std::uint8_t from(double v) {
    return static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
  }
};

template <>
struct SampleTraits<float> {
  static float from(double v) { return static_cast<float>(std::clamp(v, 0.0, 1.0)); }
};

}  // namespace detail

// Works for GrayImage and ProbMap; the result is clamped to the sample
// type's valid range.
template <typename T, typename Tag>
Grid<T, Tag> lanczos_resize(const Grid<T, Tag>& image, std::uint32_t out_w, std::uint32_t out_h) {
  if (out_w == 0 || out_h == 0) {
    throw ConfigError("resize target must be positive, got " + std::to_string(out_w) + "x" +
                      std::to_string(out_h));
  }
  const std::uint32_t in_w = image.width();
  const std::uint32_t in_h = image.height();
  const auto xtaps = detail::lanczos_taps(in_w, out_w);
  const auto ytaps = detail::lanczos_taps(in_h, out_h);

  std::vector<double> rows(static_cast<std::size_t>(out_w) * in_h);
  for (std::uint32_t y = 0; y < in_h; ++y) {
    for (std::uint32_t x = 0; x < out_w; ++x) {
      double acc = 0.0;
      for (const auto& t : xtaps[x]) acc += t.weight * image(t.index, y);
      rows[static_cast<std::size_t>(y) * out_w + x] = acc;
    }
  }

  Grid<T, Tag> out(out_w, out_h);
  for (std::uint32_t y = 0; y < out_h; ++y) {
    for (std::uint32_t x = 0; x < out_w; ++x) {
      double acc = 0.0;
      for (const auto& t : ytaps[y]) acc += t.weight * rows[static_cast<std::size_t>(t.index) * out_w + x];
      out(x, y) = detail::SampleTraits<T>::from(acc);
    }
  }
  return out;
}

}  // namespace instaseg
