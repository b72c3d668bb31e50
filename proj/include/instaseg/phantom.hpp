#pragma once

// Synthetic probability maps with known instance ground truth.
//
// Blobs are truncated Gaussian bumps laid out on two curved rows (an upper
// and a lower arch). Neighbours on the same row are joined by a 3-pixel-wide
// bridge of constant probability, so a plain probability cut merges each
// row into one object while the morphology chain can cut it apart.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "instaseg/raster.hpp"

namespace instaseg {

// xorshift64* (Vigna). The seed goes through one splitmix64 step so that
// small or zero seeds still give a full-period state.
class Xorshift64Star {
 public:
  explicit Xorshift64Star(std::uint64_t seed) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    state_ = z ^ (z >> 31);
    if (state_ == 0) state_ = 0x9E3779B97F4A7C15ull;
  }

  std::uint64_t next() noexcept {
    state_ ^= state_ >> 12;
    state_ ^= state_ << 25;
    state_ ^= state_ >> 27;
    return state_ * 0x2545F4914F6CDD1Dull;
  }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

struct PhantomSpec {
  std::uint32_t width = 512;
  std::uint32_t height = 256;
  std::uint32_t n_blobs = 14;
  double blob_peak = 0.95;
  double blob_sigma = 8.0;
  double bridge_value = 0.4;
  double noise_amplitude = 0.02;
  std::uint64_t seed = 7;
};

struct BlobCenter {
  double x = 0.0;
  double y = 0.0;
  int row = 0;  // 0 upper, 1 lower
};

struct PhantomPair {
  ProbMap map;
  LabelMap truth_labels;
  std::uint32_t truth_count = 0;
  std::vector<BlobCenter> centers;
};

inline constexpr double kBlobTruncation = 3.0;  // in sigmas
inline constexpr double kBridgeHalfWidth = 1.5;

namespace detail {

inline double distance_to_segment(double px, double py, const BlobCenter& a, const BlobCenter& b) {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0.0 ? ((px - a.x) * dx + (py - a.y) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double ex = a.x + t * dx - px;
  const double ey = a.y + t * dy - py;
  return std::sqrt(ex * ex + ey * ey);
}

}  // namespace detail

inline void validate(const PhantomSpec& spec) {
  auto fail = [](const std::string& what) { throw ConfigError("phantom: " + what); };
  if (spec.width == 0 || spec.height == 0) fail("canvas must be non-empty");
  if (!(spec.blob_peak > 0.0 && spec.blob_peak <= 1.0)) fail("blob_peak must be in (0,1]");
  if (!(spec.bridge_value >= 0.0 && spec.bridge_value < 1.0)) fail("bridge_value must be in [0,1)");
  if (!(spec.blob_peak > spec.bridge_value)) fail("blob_peak must exceed bridge_value");
  if (!(spec.noise_amplitude >= 0.0 && spec.noise_amplitude < 1.0)) fail("noise_amplitude must be in [0,1)");
  if (!(spec.blob_sigma >= 1.0)) fail("blob_sigma must be >= 1");
  if (spec.n_blobs > 65535) fail("at most 65535 blobs");
}

// Centers of the blobs: ceil(n/2) on the upper row, the rest on the lower
// row, both left to right. Throws ConfigError if they do not fit.
inline std::vector<BlobCenter> phantom_layout(const PhantomSpec& spec) {
  validate(spec);
  std::vector<BlobCenter> centers;
  if (spec.n_blobs == 0) return centers;

  const double w = spec.width;
  const double h = spec.height;
  const double reach = kBlobTruncation * spec.blob_sigma;
  const double margin = reach + 1.0;
  if (w - 2 * margin <= 0.0 || h - 2 * margin <= 0.0) {
    throw ConfigError("phantom: blobs of sigma " + std::to_string(spec.blob_sigma) +
                      " do not fit a " + std::to_string(spec.width) + "x" +
                      std::to_string(spec.height) + " canvas");
  }
  const std::uint32_t upper = (spec.n_blobs + 1) / 2;
  const std::uint32_t counts[2] = {upper, spec.n_blobs - upper};
  for (int row = 0; row < 2; ++row) {
    for (std::uint32_t i = 0; i < counts[row]; ++i) {
      const double u = (i + 0.5) / counts[row];
      const double bow = 0.10 * (2 * u - 1) * (2 * u - 1);
      BlobCenter c;
      c.x = margin + u * (w - 2 * margin);
      c.y = row == 0 ? h * (0.25 + bow) : h * (0.75 - bow);
      c.row = row;
      centers.push_back(c);
    }
  }

  for (const auto& c : centers) {
    if (c.x - reach < 0 || c.x + reach > w - 1 || c.y - reach < 0 || c.y + reach > h - 1) {
      throw ConfigError("phantom: blob at (" + std::to_string(c.x) + "," + std::to_string(c.y) +
                        ") leaves the canvas");
    }
  }
  for (std::size_t i = 0; i < centers.size(); ++i) {
    for (std::size_t j = i + 1; j < centers.size(); ++j) {
      if (std::hypot(centers[i].x - centers[j].x, centers[i].y - centers[j].y) <
          2.0 * spec.blob_sigma) {
        throw ConfigError("phantom: " + std::to_string(spec.n_blobs) + " blobs of sigma " +
                          std::to_string(spec.blob_sigma) + " are closer than 2 sigma");
      }
    }
  }
  return centers;
}

inline PhantomPair generate_phantom(const PhantomSpec& spec) {
  PhantomPair out;
  out.centers = phantom_layout(spec);
  const std::size_t w = spec.width;
  const std::size_t h = spec.height;
  const std::size_t n = w * h;

  std::vector<double> value(n, 0.0);
  std::vector<double> own_best(n, 0.0);
  std::vector<std::uint32_t> owner(n, 0);

  const double sigma = spec.blob_sigma;
  const double reach = kBlobTruncation * sigma;
  for (std::size_t b = 0; b < out.centers.size(); ++b) {
    const auto& c = out.centers[b];
    const auto x0 = static_cast<std::size_t>(std::max(0.0, std::floor(c.x - reach)));
    const auto x1 = static_cast<std::size_t>(std::min(w - 1.0, std::ceil(c.x + reach)));
    const auto y0 = static_cast<std::size_t>(std::max(0.0, std::floor(c.y - reach)));
    const auto y1 = static_cast<std::size_t>(std::min(h - 1.0, std::ceil(c.y + reach)));
    for (std::size_t y = y0; y <= y1; ++y) {
      for (std::size_t x = x0; x <= x1; ++x) {
        const double dx = x - c.x;
        const double dy = y - c.y;
        const double r2 = dx * dx + dy * dy;
        if (r2 > reach * reach) continue;
        const double bump = spec.blob_peak * std::exp(-r2 / (2 * sigma * sigma));
        const std::size_t i = y * w + x;
        value[i] = std::max(value[i], bump);
        if (bump > own_best[i]) {
          own_best[i] = bump;
          owner[i] = static_cast<std::uint32_t>(b + 1);
        }
      }
    }
  }

  for (std::size_t b = 0; b + 1 < out.centers.size(); ++b) {
    const auto& a = out.centers[b];
    const auto& c = out.centers[b + 1];
    if (a.row != c.row) continue;
    const auto x0 = static_cast<std::size_t>(std::max(0.0, std::floor(std::min(a.x, c.x) - 2)));
    const auto x1 = static_cast<std::size_t>(std::min(w - 1.0, std::ceil(std::max(a.x, c.x) + 2)));
    const auto y0 = static_cast<std::size_t>(std::max(0.0, std::floor(std::min(a.y, c.y) - 2)));
    const auto y1 = static_cast<std::size_t>(std::min(h - 1.0, std::ceil(std::max(a.y, c.y) + 2)));
    for (std::size_t y = y0; y <= y1; ++y) {
      for (std::size_t x = x0; x <= x1; ++x) {
        if (detail::distance_to_segment(static_cast<double>(x), static_cast<double>(y), a, c) <
            kBridgeHalfWidth) {
          value[y * w + x] = std::max(value[y * w + x], spec.bridge_value);
        }
      }
    }
  }

  Xorshift64Star rng(spec.seed);
  std::vector<float> samples(n);
  std::vector<std::uint32_t> truth(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const double noise = spec.noise_amplitude * (2.0 * rng.uniform() - 1.0);
    samples[i] = static_cast<float>(std::clamp(value[i] + noise, 0.0, 1.0));
    if (owner[i] != 0 && own_best[i] >= spec.blob_peak / 2) truth[i] = owner[i];
  }

  out.map = ProbMap(spec.width, spec.height, std::move(samples));
  out.truth_labels = LabelMap(spec.width, spec.height, std::move(truth));
  out.truth_count = spec.n_blobs;
  return out;
}

}  // namespace instaseg
