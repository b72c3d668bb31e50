#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "instaseg/error.hpp"

namespace instaseg {

// Row-major 2-D raster with top-left origin. `Tag` keeps semantically
// different grids with the same sample type (gray image vs. binary mask)
// from converting into each other.
template <typename T, typename Tag>
class Grid {
 public:
  using value_type = T;

  Grid() = default;

  Grid(std::uint32_t width, std::uint32_t height, T fill = T{})
      : width_(width), height_(height), data_(checked_area(width, height), fill) {}

  Grid(std::uint32_t width, std::uint32_t height, std::vector<T> data)
      : width_(width), height_(height), data_(std::move(data)) {
    if (data_.size() != checked_area(width, height)) {
      throw DataError("grid data length " + std::to_string(data_.size()) +
                      " does not match " + std::to_string(width) + "x" + std::to_string(height));
    }
  }

  std::uint32_t width() const noexcept { return width_; }
  std::uint32_t height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T& operator()(std::size_t x, std::size_t y) noexcept { return data_[y * width_ + x]; }
  const T& operator()(std::size_t x, std::size_t y) const noexcept { return data_[y * width_ + x]; }

  T& operator[](std::size_t i) noexcept { return data_[i]; }
  const T& operator[](std::size_t i) const noexcept { return data_[i]; }

  std::span<T> pixels() noexcept { return data_; }
  std::span<const T> pixels() const noexcept { return data_; }
  std::span<const T> row(std::size_t y) const noexcept {
    return std::span<const T>(data_).subspan(y * width_, width_);
  }

  const std::vector<T>& values() const noexcept { return data_; }

  bool same_shape(std::uint32_t w, std::uint32_t h) const noexcept {
    return width_ == w && height_ == h;
  }
  template <typename U, typename OtherTag>
  bool same_shape(const Grid<U, OtherTag>& other) const noexcept {
    return width_ == other.width() && height_ == other.height();
  }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  static std::size_t checked_area(std::uint32_t width, std::uint32_t height) {
    if (width == 0 || height == 0) {
      throw DataError("grid dimensions must be positive, got " + std::to_string(width) + "x" +
                      std::to_string(height));
    }
    return static_cast<std::size_t>(width) * height;
  }

  std::uint32_t width_ = 0;
  std::uint32_t height_ = 0;
  std::vector<T> data_;
};

struct ProbTag {};
struct GrayTag {};
struct MaskTag {};
struct LabelTag {};

// Per-pixel foreground probability in [0, 1].
using ProbMap = Grid<float, ProbTag>;
// 8-bit intensities.
using GrayImage = Grid<std::uint8_t, GrayTag>;
// 1 = foreground, 0 = background.
using BinaryMask = Grid<std::uint8_t, MaskTag>;

inline bool in_unit_range(float v) noexcept { return v >= 0.0f && v <= 1.0f; }

// Throws DataError if any value is outside [0, 1] (NaN included).
inline void validate(const ProbMap& map) {
  const auto px = map.pixels();
  const auto bad = std::find_if(px.begin(), px.end(), [](float v) { return !in_unit_range(v); });
  if (bad != px.end()) {
    throw DataError("probability map value out of [0,1] at index " +
                    std::to_string(bad - px.begin()));
  }
}

// Instance labels: 0 is background, positive labels are exactly {1..n_labels}.
class LabelMap {
 public:
  using Labels = Grid<std::uint32_t, LabelTag>;

  LabelMap() = default;

  // Empty (all background) label map.
  LabelMap(std::uint32_t width, std::uint32_t height) : labels_(width, height, 0u) {}

  // Validates that the positive labels are contiguous from 1.
  LabelMap(std::uint32_t width, std::uint32_t height, std::vector<std::uint32_t> data)
      : labels_(width, height, std::move(data)) {
    std::uint32_t max_label = 0;
    for (auto v : labels_.pixels()) max_label = std::max(max_label, v);
    std::vector<bool> seen(static_cast<std::size_t>(max_label) + 1, false);
    for (auto v : labels_.pixels()) seen[v] = true;
    for (std::uint32_t l = 1; l <= max_label; ++l) {
      if (!seen[l]) {
        throw DataError("label map is not contiguous: label " + std::to_string(l) +
                        " missing below maximum " + std::to_string(max_label));
      }
    }
    n_labels_ = max_label;
  }

  std::uint32_t width() const noexcept { return labels_.width(); }
  std::uint32_t height() const noexcept { return labels_.height(); }
  std::size_t size() const noexcept { return labels_.size(); }
  std::uint32_t n_labels() const noexcept { return n_labels_; }

  std::uint32_t operator()(std::size_t x, std::size_t y) const noexcept { return labels_(x, y); }
  std::uint32_t operator[](std::size_t i) const noexcept { return labels_[i]; }
  std::span<const std::uint32_t> pixels() const noexcept { return labels_.pixels(); }
  const Labels& grid() const noexcept { return labels_; }

  friend bool operator==(const LabelMap&, const LabelMap&) = default;

 private:
  Labels labels_;
  std::uint32_t n_labels_ = 0;
};

inline BinaryMask foreground(const LabelMap& labels) {
  BinaryMask mask(labels.width(), labels.height());
  for (std::size_t i = 0; i < labels.size(); ++i) mask[i] = labels[i] != 0 ? 1 : 0;
  return mask;
}

// Flat square structuring element of odd side length.
class StructuringElement {
 public:
  static StructuringElement square(int size) {
    if (size < 1 || size % 2 == 0) {
      throw ConfigError("structuring element size must be odd and >= 1, got " +
                        std::to_string(size));
    }
    return StructuringElement(size);
  }

  int size() const noexcept { return size_; }
  int radius() const noexcept { return size_ / 2; }

  friend bool operator==(const StructuringElement&, const StructuringElement&) = default;

 private:
  explicit StructuringElement(int size) : size_(size) {}
  int size_;
};

// Square convolution kernel of odd side length, row-major weights.
class ConvKernel {
 public:
  ConvKernel(int size, std::vector<double> weights) : size_(size), weights_(std::move(weights)) {
    if (size < 1 || size % 2 == 0) {
      throw ConfigError("kernel size must be odd and >= 1, got " + std::to_string(size));
    }
    if (weights_.size() != static_cast<std::size_t>(size) * size) {
      throw ConfigError("kernel needs " + std::to_string(size * size) + " weights");
    }
  }

  int size() const noexcept { return size_; }
  int radius() const noexcept { return size_ / 2; }
  double operator()(int dx, int dy) const noexcept {
    return weights_[static_cast<std::size_t>(dy + radius()) * size_ + (dx + radius())];
  }
  std::span<const double> weights() const noexcept { return weights_; }

 private:
  int size_;
  std::vector<double> weights_;
};

// 3x3 high-boost kernel: 9 at the center, -1 around it. Sums to 1.
inline ConvKernel sharpening_kernel() {
  return ConvKernel(3, {-1, -1, -1,
                        -1,  9, -1,
                        -1, -1, -1});
}

// Round-half-up of v * 255.
inline std::uint8_t quantize(float v) noexcept {
  const double scaled = std::floor(static_cast<double>(v) * 255.0 + 0.5);
  return static_cast<std::uint8_t>(std::clamp(scaled, 0.0, 255.0));
}

inline GrayImage quantize(const ProbMap& map) {
  GrayImage out(map.width(), map.height());
  for (std::size_t i = 0; i < map.size(); ++i) out[i] = quantize(map[i]);
  return out;
}

}  // namespace instaseg
