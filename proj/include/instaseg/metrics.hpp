#pragma once

// Pixel-wise overlap metrics, count error and fold aggregation.
//
// A ratio whose numerator and denominator are both zero has no value and is
// reported as std::nullopt rather than 0 or 1.

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "instaseg/raster.hpp"

namespace instaseg {

struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const noexcept { return tp + tn + fp + fn; }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

inline ConfusionCounts confusion(const BinaryMask& pred, const BinaryMask& truth) {
  if (!pred.same_shape(truth)) {
    throw DataError("mask dimensions differ: " + std::to_string(pred.width()) + "x" +
                    std::to_string(pred.height()) + " vs " + std::to_string(truth.width()) + "x" +
                    std::to_string(truth.height()));
  }
  ConfusionCounts c;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const bool p = pred[i] != 0;
    const bool t = truth[i] != 0;
    if (p && t) ++c.tp;
    else if (!p && !t) ++c.tn;
    else if (p) ++c.fp;
    else ++c.fn;
  }
  return c;
}

using Metric = std::optional<double>;

inline constexpr std::array<std::string_view, 6> kMetricNames = {
    "sensitivity", "specificity", "ppv", "npv", "jaccard", "dice"};

struct MetricsReport {
  Metric sensitivity;
  Metric specificity;
  Metric ppv;
  Metric npv;
  Metric jaccard;
  Metric dice;

  // Same order as kMetricNames.
  std::array<Metric, 6> values() const {
    return {sensitivity, specificity, ppv, npv, jaccard, dice};
  }
};

namespace detail {

inline Metric ratio(std::uint64_t num, std::uint64_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace detail

inline MetricsReport compute_metrics(const ConfusionCounts& c) {
  using detail::ratio;
  MetricsReport r;
  r.sensitivity = ratio(c.tp, c.tp + c.fn);
  r.specificity = ratio(c.tn, c.tn + c.fp);
  r.ppv = ratio(c.tp, c.tp + c.fp);
  r.npv = ratio(c.tn, c.tn + c.fn);
  r.jaccard = ratio(c.tp, c.tp + c.fp + c.fn);
  r.dice = ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn);
  return r;
}

struct CountPair {
  std::uint64_t actual = 0;
  std::uint64_t predicted = 0;
};

// Mean absolute percentage error of instance counts, in percent.
inline double mape(std::span<const CountPair> series) {
  if (series.empty()) throw DataError("count series is empty");
  double sum = 0.0;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& p = series[i];
    if (p.actual == 0) throw DataError("actual count must be >= 1 (row " + std::to_string(i) + ")");
    const double diff = std::abs(static_cast<double>(p.actual) - static_cast<double>(p.predicted));
    sum += diff / static_cast<double>(p.actual);
  }
  return sum / static_cast<double>(series.size()) * 100.0;
}

struct MetricSummary {
  Metric mean;
  // Sample standard deviation (n - 1 denominator).
  Metric stddev;
  std::size_t used = 0;
  std::size_t skipped = 0;
};

struct FoldSummary {
  std::size_t folds = 0;
  std::array<MetricSummary, 6> metrics;  // kMetricNames order

  const MetricSummary& operator[](std::string_view name) const {
    for (std::size_t i = 0; i < kMetricNames.size(); ++i) {
      if (kMetricNames[i] == name) return metrics[i];
    }
    throw ConfigError("unknown metric '" + std::string(name) + "'");
  }
};

// Mean and sample standard deviation per metric; undefined entries are
// skipped and counted. A metric needs one defined value for a mean and two
// for a deviation.
inline FoldSummary aggregate_folds(std::span<const MetricsReport> per_fold) {
  if (per_fold.size() < 2) {
    throw DataError("aggregation needs at least 2 folds, got " + std::to_string(per_fold.size()));
  }
  FoldSummary summary;
  summary.folds = per_fold.size();
  for (std::size_t m = 0; m < kMetricNames.size(); ++m) {
    // Welford's running update.
    double mean = 0.0;
    double m2 = 0.0;
    std::size_t n = 0;
    std::size_t skipped = 0;
    for (const auto& fold : per_fold) {
      const Metric v = fold.values()[m];
      if (!v) {
        ++skipped;
        continue;
      }
      ++n;
      const double delta = *v - mean;
      mean += delta / static_cast<double>(n);
      m2 += delta * (*v - mean);
    }
    auto& out = summary.metrics[m];
    out.used = n;
    out.skipped = skipped;
    if (n >= 1) out.mean = mean;
    if (n >= 2) out.stddev = std::sqrt(m2 / static_cast<double>(n - 1));
  }
  return summary;
}

}  // namespace instaseg
