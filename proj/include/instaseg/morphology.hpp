#pragma once

// Flat grayscale morphology with square structuring elements, plus the 3x3
// sharpening filter.
//
// Samples outside the image take the identity of the operator (255 for min,
// 0 for max), so borders never introduce new extrema.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "instaseg/raster.hpp"

namespace instaseg {

namespace detail {

// Square flat min/max filter done as two 1-D passes; the square window is the
// Cartesian product of a row window and a column window, and skipping
// out-of-range samples is the same as padding with the identity.
template <typename Pick>
GrayImage square_rank_filter(const GrayImage& image, int radius, Pick pick) {
  const int w = static_cast<int>(image.width());
  const int h = static_cast<int>(image.height());
  GrayImage rows(image.width(), image.height());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int x0 = std::max(0, x - radius);
      const int x1 = std::min(w - 1, x + radius);
      std::uint8_t v = image(x0, y);
      for (int xx = x0 + 1; xx <= x1; ++xx) v = pick(v, image(xx, y));
      rows(x, y) = v;
    }
  }
  GrayImage out(image.width(), image.height());
  for (int y = 0; y < h; ++y) {
    const int y0 = std::max(0, y - radius);
    const int y1 = std::min(h - 1, y + radius);
    for (int x = 0; x < w; ++x) {
      std::uint8_t v = rows(x, y0);
      for (int yy = y0 + 1; yy <= y1; ++yy) v = pick(v, rows(x, yy));
      out(x, y) = v;
    }
  }
  return out;
}

}  // namespace detail

inline GrayImage erode(const GrayImage& image, const StructuringElement& se) {
  return detail::square_rank_filter(image, se.radius(),
                                    [](std::uint8_t a, std::uint8_t b) { return std::min(a, b); });
}

inline GrayImage dilate(const GrayImage& image, const StructuringElement& se) {
  return detail::square_rank_filter(image, se.radius(),
                                    [](std::uint8_t a, std::uint8_t b) { return std::max(a, b); });
}

// Removes bright structures that cannot contain the structuring element.
inline GrayImage open(const GrayImage& image, const StructuringElement& se) {
  return dilate(erode(image, se), se);
}

inline GrayImage close(const GrayImage& image, const StructuringElement& se) {
  return erode(dilate(image, se), se);
}

// Correlation with edge replication; the result is rounded half-up and
// saturated to [0, 255].
inline GrayImage convolve(const GrayImage& image, const ConvKernel& kernel) {
  const int w = static_cast<int>(image.width());
  const int h = static_cast<int>(image.height());
  const int r = kernel.radius();
  GrayImage out(image.width(), image.height());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int dy = -r; dy <= r; ++dy) {
        const int sy = std::clamp(y + dy, 0, h - 1);
        for (int dx = -r; dx <= r; ++dx) {
          const int sx = std::clamp(x + dx, 0, w - 1);
          acc += kernel(dx, dy) * image(sx, sy);
        }
      }
      out(x, y) = static_cast<std::uint8_t>(std::clamp(std::floor(acc + 0.5), 0.0, 255.0));
    }
  }
  return out;
}

inline GrayImage sharpen(const GrayImage& image) {
  static const ConvKernel kernel = sharpening_kernel();
  return convolve(image, kernel);
}

}  // namespace instaseg
