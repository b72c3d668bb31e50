#pragma once

// Paired Wilcoxon signed-rank test.
//
// Zero differences are dropped, |d| is ranked with average ranks for ties
// and W = min(W+, W-). Up to kExactLimit non-zero pairs the two-sided p-value
// is exact: the null distribution of W+ over all 2^n sign assignments is
// counted on doubled ranks (always integers, even with ties). Above that
// the normal approximation with tie correction is used.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "instaseg/error.hpp"

namespace instaseg {

inline constexpr std::size_t kExactLimit = 25;
inline constexpr double kSignificanceLevel = 0.01;

enum class WilcoxonMethod { exact, normal_approx };

inline std::string_view to_string(WilcoxonMethod m) {
  return m == WilcoxonMethod::exact ? "exact" : "normal-approx";
}

struct WilcoxonResult {
  double w_statistic = 0.0;
  double w_plus = 0.0;
  double w_minus = 0.0;
  std::size_t n_effective = 0;
  double p_two_sided = 1.0;
  WilcoxonMethod method = WilcoxonMethod::exact;
  // Every difference was zero.
  bool degenerate = false;

  bool significant(double alpha = kSignificanceLevel) const { return p_two_sided < alpha; }
};

namespace detail {

// Average ranks (1-based) of `values`, doubled so that ties stay integral.
inline std::vector<std::uint64_t> doubled_average_ranks(std::span<const double> values,
                                                        std::vector<std::size_t>* tie_sizes) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<std::uint64_t> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    // Ranks i+1..j+1 share their mean; doubled that is i+j+2.
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = i + j + 2;
    if (tie_sizes && j > i) tie_sizes->push_back(j - i + 1);
    i = j + 1;
  }
  return ranks;
}

}  // namespace detail

inline WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b,
                                           std::size_t exact_limit = kExactLimit) {
  if (a.size() != b.size()) {
    throw DataError("paired series differ in length: " + std::to_string(a.size()) + " vs " +
                    std::to_string(b.size()));
  }
  if (a.empty()) throw DataError("paired series are empty");

  std::vector<double> magnitude;
  std::vector<bool> positive;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    if (std::isnan(d)) throw DataError("non-finite value in pair " + std::to_string(i));
    if (d == 0.0) continue;
    magnitude.push_back(std::abs(d));
    positive.push_back(d > 0.0);
  }

  WilcoxonResult r;
  r.n_effective = magnitude.size();
  if (r.n_effective == 0) {
    r.degenerate = true;
    return r;
  }

  std::vector<std::size_t> ties;
  const auto ranks2 = detail::doubled_average_ranks(magnitude, &ties);
  std::uint64_t plus2 = 0;
  std::uint64_t minus2 = 0;
  for (std::size_t i = 0; i < ranks2.size(); ++i) (positive[i] ? plus2 : minus2) += ranks2[i];
  r.w_plus = plus2 / 2.0;
  r.w_minus = minus2 / 2.0;
  const std::uint64_t w2 = std::min(plus2, minus2);
  r.w_statistic = w2 / 2.0;

  const std::size_t n = r.n_effective;
  if (n <= exact_limit) {
    r.method = WilcoxonMethod::exact;
    const std::uint64_t total2 = plus2 + minus2;
    // ways[s] = number of sign assignments whose doubled W+ equals s.
    std::vector<std::uint64_t> ways(total2 + 1, 0);
    ways[0] = 1;
    std::uint64_t reach = 0;
    for (auto r2 : ranks2) {
      reach += r2;
      for (std::uint64_t s = reach; s >= r2; --s) {
        ways[s] += ways[s - r2];
        if (s == r2) break;
      }
    }
    std::uint64_t tail = 0;
    for (std::uint64_t s = 0; s <= w2; ++s) tail += ways[s];
    const double p = 2.0 * static_cast<double>(tail) / std::ldexp(1.0, static_cast<int>(n));
    r.p_two_sided = std::min(1.0, p);
  } else {
    r.method = WilcoxonMethod::normal_approx;
    const double nn = static_cast<double>(n);
    const double mean = nn * (nn + 1.0) / 4.0;
    double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0;
    for (auto t : ties) {
      const double tt = static_cast<double>(t);
      var -= (tt * tt * tt - tt) / 48.0;
    }
    const double z = (r.w_statistic - mean) / std::sqrt(var);
    r.p_two_sided = std::min(1.0, std::erfc(std::abs(z) / std::sqrt(2.0)));
  }
  return r;
}

}  // namespace instaseg
