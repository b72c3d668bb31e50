#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "instaseg/raster.hpp"

namespace instaseg {

using Histogram = std::array<std::uint64_t, 256>;

inline Histogram histogram(const GrayImage& image) {
  Histogram h{};
  for (auto v : image.pixels()) ++h[v];
  return h;
}

struct OtsuResult {
  // Pixels strictly above `threshold` are foreground.
  std::uint8_t threshold = 0;
  double between_class_variance = 0.0;
  // Fewer than two occupied intensity levels; the foreground is empty.
  bool degenerate = false;
};

namespace detail {

// Between-class variance scaled by N^2: (S0*n1 - S1*n0)^2 / (n0*n1), kept as
// an exact fraction so ties are detected exactly.
struct VarianceKey {
  unsigned __int128 num = 0;
  std::uint64_t den = 1;
};

// a < b for fractions with num < 2^128 and den < 2^64.
inline bool less(const VarianceKey& a, const VarianceKey& b) {
  const unsigned __int128 qa = a.num / a.den;
  const unsigned __int128 qb = b.num / b.den;
  if (qa != qb) return qa < qb;
  const unsigned __int128 ra = a.num % a.den;
  const unsigned __int128 rb = b.num % b.den;
  return ra * b.den < rb * a.den;
}

}  // namespace detail

// Exhaustive search over all 256 thresholds; class 0 is {v <= t}. Among
// equal maxima the smallest t wins.
inline OtsuResult otsu_threshold(const Histogram& hist) {
  std::uint64_t total = 0;
  std::uint64_t total_sum = 0;
  int occupied = 0;
  for (int v = 0; v < 256; ++v) {
    total += hist[v];
    total_sum += hist[v] * static_cast<std::uint64_t>(v);
    occupied += hist[v] != 0;
  }
  OtsuResult result;
  if (occupied < 2) {
    result.degenerate = true;
    return result;
  }
  // |S0*n1 - S1*n0| <= 255*N^2/4 must fit in 64 bits for the exact path.
  const bool exact = total <= (std::uint64_t{1} << 29);

  detail::VarianceKey best_key;
  long double best_approx = -1.0L;
  bool have_best = false;
  std::uint64_t n0 = 0;
  std::uint64_t s0 = 0;
  for (int t = 0; t < 256; ++t) {
    n0 += hist[t];
    s0 += hist[t] * static_cast<std::uint64_t>(t);
    const std::uint64_t n1 = total - n0;
    if (n0 == 0 || n1 == 0) continue;
    const std::uint64_t s1 = total_sum - s0;
    const unsigned __int128 a = static_cast<unsigned __int128>(s0) * n1;
    const unsigned __int128 b = static_cast<unsigned __int128>(s1) * n0;
    const unsigned __int128 diff = a > b ? a - b : b - a;

    bool better = false;
    if (exact) {
      const detail::VarianceKey key{diff * diff, n0 * n1};
      better = !have_best || detail::less(best_key, key);
      if (better) best_key = key;
    } else {
      const long double d = static_cast<long double>(diff);
      const long double approx = d * d / (static_cast<long double>(n0) * n1);
      better = !have_best || approx > best_approx;
      if (better) best_approx = approx;
    }
    if (better) {
      have_best = true;
      result.threshold = static_cast<std::uint8_t>(t);
      const double d = static_cast<double>(diff);
      const double n = static_cast<double>(total);
      result.between_class_variance = d * d / (static_cast<double>(n0) * n1) / (n * n);
    }
  }
  return result;
}

inline OtsuResult otsu_threshold(const GrayImage& image) { return otsu_threshold(histogram(image)); }

// Foreground where value > threshold.
inline BinaryMask binarize_above(const GrayImage& image, std::uint8_t threshold) {
  BinaryMask mask(image.width(), image.height());
  for (std::size_t i = 0; i < image.size(); ++i) mask[i] = image[i] > threshold ? 1 : 0;
  return mask;
}

// Otsu binarization; a degenerate histogram gives an empty mask.
inline BinaryMask binarize_otsu(const GrayImage& image, const OtsuResult& otsu) {
  if (otsu.degenerate) return BinaryMask(image.width(), image.height());
  return binarize_above(image, otsu.threshold);
}

inline constexpr double kBaselineLevel = 0.2;

// Foreground where value >= level. The comparison is done in binary32 so a
// level typed as a decimal matches map values stored from the same decimal.
inline BinaryMask binarize_fixed(const ProbMap& map, double level = kBaselineLevel) {
  if (!(level >= 0.0 && level <= 1.0)) {
    throw ConfigError("binarization level must be in [0,1], got " + std::to_string(level));
  }
  const float cut = static_cast<float>(level);
  BinaryMask mask(map.width(), map.height());
  for (std::size_t i = 0; i < map.size(); ++i) mask[i] = map[i] >= cut ? 1 : 0;
  return mask;
}

}  // namespace instaseg
