#pragma once

// JSON and CSV renderings of the result types. Key names are stable.

#include <cstdio>
#include <string>

#include <json.hpp>

#include "instaseg/metrics.hpp"
#include "instaseg/phantom.hpp"
#include "instaseg/wilcoxon.hpp"

namespace instaseg::report {

using nlohmann::ordered_json;

inline ordered_json optional_number(const Metric& m) { return m ? ordered_json(*m) : ordered_json(nullptr); }

inline ordered_json to_json(const MetricsReport& r) {
  ordered_json j = ordered_json::object();
  const auto values = r.values();
  for (std::size_t i = 0; i < kMetricNames.size(); ++i) {
    j[std::string(kMetricNames[i])] = optional_number(values[i]);
  }
  return j;
}

inline ordered_json to_json(const ConfusionCounts& c) {
  return {{"tp", c.tp}, {"tn", c.tn}, {"fp", c.fp}, {"fn", c.fn}};
}

inline ordered_json to_json(const FoldSummary& s) {
  ordered_json mean = ordered_json::object();
  ordered_json stddev = ordered_json::object();
  ordered_json skipped = ordered_json::object();
  for (std::size_t i = 0; i < kMetricNames.size(); ++i) {
    const std::string key(kMetricNames[i]);
    mean[key] = optional_number(s.metrics[i].mean);
    stddev[key] = optional_number(s.metrics[i].stddev);
    skipped[key] = s.metrics[i].skipped;
  }
  ordered_json j;
  j["folds"] = s.folds;
  j["mean"] = std::move(mean);
  j["std"] = std::move(stddev);
  j["skipped"] = std::move(skipped);
  return j;
}

inline ordered_json to_json(const WilcoxonResult& r, double alpha = kSignificanceLevel) {
  ordered_json j;
  j["w_statistic"] = r.w_statistic;
  j["w_plus"] = r.w_plus;
  j["w_minus"] = r.w_minus;
  j["n_effective"] = r.n_effective;
  j["p_two_sided"] = r.p_two_sided;
  j["method"] = std::string(to_string(r.method));
  j["degenerate"] = r.degenerate;
  j["alpha"] = alpha;
  j["significant"] = r.significant(alpha);
  return j;
}

inline ordered_json to_json(const PhantomSpec& s) {
  ordered_json j;
  j["width"] = s.width;
  j["height"] = s.height;
  j["n_blobs"] = s.n_blobs;
  j["blob_peak"] = s.blob_peak;
  j["blob_sigma"] = s.blob_sigma;
  j["bridge_value"] = s.bridge_value;
  j["noise_amplitude"] = s.noise_amplitude;
  j["seed"] = s.seed;
  return j;
}

inline std::string csv_header() {
  std::string out;
  for (std::size_t i = 0; i < kMetricNames.size(); ++i) {
    if (i) out += ',';
    out += kMetricNames[i];
  }
  return out;
}

// Undefined metrics are empty fields; defined ones use 17 significant digits.
inline std::string csv_row(const MetricsReport& r) {
  std::string out;
  const auto values = r.values();
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    if (values[i]) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", *values[i]);
      out += buf;
    }
  }
  return out;
}

}  // namespace instaseg::report
