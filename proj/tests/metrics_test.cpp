#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "instaseg/metrics.hpp"
#include "instaseg/report.hpp"
#include "instaseg/wilcoxon.hpp"
#include "oracles.hpp"

using namespace instaseg;

namespace {

BinaryMask first_n(std::uint32_t w, std::uint32_t h, std::size_t n) {
  BinaryMask m(w, h);
  for (std::size_t i = 0; i < n; ++i) m[i] = 1;
  return m;
}

}  // namespace

TEST(Confusion, IdenticalMasks) {
  const BinaryMask m = first_n(10, 10, 10);
  EXPECT_EQ(confusion(m, m), (ConfusionCounts{10, 90, 0, 0}));
}

TEST(Confusion, EmptyPrediction) {
  EXPECT_EQ(confusion(BinaryMask(10, 10), first_n(10, 10, 10)), (ConfusionCounts{0, 90, 0, 10}));
}

TEST(Confusion, MatchesFourWayTally) {
  std::mt19937_64 rng(41);
  const BinaryMask p = oracle::random_mask(rng, 16, 16, 0.4);
  const BinaryMask t = oracle::random_mask(rng, 16, 16, 0.6);
  std::uint64_t tally[2][2] = {};
  for (std::size_t i = 0; i < p.size(); ++i) ++tally[p[i]][t[i]];
  const ConfusionCounts c = confusion(p, t);
  EXPECT_EQ(c.tp, tally[1][1]);
  EXPECT_EQ(c.tn, tally[0][0]);
  EXPECT_EQ(c.fp, tally[1][0]);
  EXPECT_EQ(c.fn, tally[0][1]);
  EXPECT_EQ(c.total(), 256u);
}

TEST(Confusion, DimensionMismatch) {
  EXPECT_THROW(confusion(BinaryMask(3, 3), BinaryMask(3, 4)), DataError);
}

TEST(Metrics, WorkedExample) {
  const MetricsReport r = compute_metrics({3, 5, 1, 1});
  // 2*3 / (2*3 + 1 + 1); agrees with 2J / (1 + J) for J = 3/5.
  EXPECT_NEAR(*r.dice, 0.75, 1e-12);
  EXPECT_NEAR(*r.jaccard, 0.6, 1e-12);
  EXPECT_NEAR(*r.sensitivity, 0.75, 1e-12);
  EXPECT_NEAR(*r.ppv, 0.75, 1e-12);
  EXPECT_NEAR(*r.specificity, 5.0 / 6.0, 1e-12);
  EXPECT_NEAR(*r.npv, 5.0 / 6.0, 1e-12);
}

TEST(Metrics, PerfectAgreement) {
  for (const Metric& m : compute_metrics({40, 60, 0, 0}).values()) EXPECT_EQ(m, 1.0);
}

TEST(Metrics, ZeroOverZeroIsUndefined) {
  const MetricsReport r = compute_metrics({0, 100, 0, 0});
  EXPECT_FALSE(r.sensitivity);
  EXPECT_FALSE(r.ppv);
  EXPECT_FALSE(r.jaccard);
  EXPECT_FALSE(r.dice);
  EXPECT_EQ(r.specificity, 1.0);
  EXPECT_EQ(r.npv, 1.0);
}

TEST(Metrics, DiceJaccardRelationAndScaleInvariance) {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 500; ++trial) {
    const ConfusionCounts c{rng() % 50, rng() % 50, rng() % 50, rng() % 50};
    const MetricsReport r = compute_metrics(c);
    if (r.dice) {
      ASSERT_GE(*r.dice, *r.jaccard);
      ASSERT_NEAR(*r.dice, 2 * *r.jaccard / (1 + *r.jaccard), 1e-12);
      if (*r.jaccard > 0.0 && *r.jaccard < 1.0) {
        ASSERT_GT(*r.dice, *r.jaccard);
      }
    }
    const std::uint64_t k = 1 + rng() % 1000;
    const MetricsReport scaled = compute_metrics({c.tp * k, c.tn * k, c.fp * k, c.fn * k});
    const auto a = r.values();
    const auto b = scaled.values();
    for (std::size_t i = 0; i < a.size(); ++i) {
      ASSERT_EQ(a[i].has_value(), b[i].has_value());
      if (a[i]) {
        ASSERT_NEAR(*a[i], *b[i], 1e-12);
      }
    }
  }
}

TEST(Mape, Examples) {
  const CountPair exact[] = {{28, 28}};
  const CountPair over[] = {{20, 23}};
  const CountPair two[] = {{10, 9}, {20, 25}};
  EXPECT_NEAR(mape(exact), 0.0, 1e-12);
  EXPECT_NEAR(mape(over), 15.0, 1e-12);
  EXPECT_NEAR(mape(two), 17.5, 1e-12);
}

TEST(Mape, RejectsZeroActualAndEmpty) {
  const CountPair zero[] = {{0, 3}};
  EXPECT_THROW(mape(zero), DataError);
  EXPECT_THROW(mape(std::span<const CountPair>{}), DataError);
}

TEST(Mape, OrderInvariant) {
  std::mt19937_64 rng(43);
  std::vector<CountPair> s;
  for (int i = 0; i < 30; ++i) s.push_back({1 + rng() % 32, rng() % 40});
  const double ref = mape(s);
  for (int k = 0; k < 10; ++k) {
    std::shuffle(s.begin(), s.end(), rng);
    ASSERT_NEAR(mape(s), ref, 1e-12);
  }
}

TEST(Aggregate, Examples) {
  auto fold = [](double dice) {
    MetricsReport r;
    r.dice = dice;
    return r;
  };
  const std::vector<MetricsReport> flat = {fold(0.9), fold(0.9), fold(0.9)};
  const FoldSummary a = aggregate_folds(flat);
  EXPECT_NEAR(*a["dice"].mean, 0.9, 1e-15);
  EXPECT_EQ(*a["dice"].stddev, 0.0);
  EXPECT_EQ(a["jaccard"].skipped, 3u);
  EXPECT_FALSE(a["jaccard"].mean);

  const std::vector<MetricsReport> two = {fold(0.8), fold(1.0)};
  const FoldSummary b = aggregate_folds(two);
  EXPECT_NEAR(*b["dice"].mean, 0.9, 1e-12);
  EXPECT_NEAR(*b["dice"].stddev, std::sqrt(0.02), 1e-12);

  EXPECT_THROW(aggregate_folds(std::span<const MetricsReport>(two).first(1)), DataError);
}

TEST(Aggregate, MatchesTwoPassReference) {
  std::mt19937_64 rng(44);
  std::vector<MetricsReport> folds(10);
  std::vector<double> dice;
  for (auto& f : folds) {
    f = compute_metrics({1000 + rng() % 500, 9000, rng() % 100, rng() % 100});
    dice.push_back(*f.dice);
  }
  double mean = 0;
  for (double d : dice) mean += d;
  mean /= dice.size();
  double ss = 0;
  for (double d : dice) ss += (d - mean) * (d - mean);
  const double sd = std::sqrt(ss / (dice.size() - 1));
  const FoldSummary s = aggregate_folds(folds);
  EXPECT_NEAR(*s["dice"].mean, mean, 1e-12);
  EXPECT_NEAR(*s["dice"].stddev, sd, 1e-12);
}

TEST(Wilcoxon, IdenticalSeriesDegenerate) {
  const std::vector<double> a = {0.9, 0.8, 0.7};
  const WilcoxonResult r = wilcoxon_signed_rank(a, a);
  EXPECT_TRUE(r.degenerate);
  EXPECT_EQ(r.n_effective, 0u);
  EXPECT_EQ(r.p_two_sided, 1.0);
}

TEST(Wilcoxon, FivePositive) {
  const std::vector<double> a = {1.1, 2.2, 3.3, 4.4, 5.5};
  const std::vector<double> b = {1.0, 2.0, 3.0, 4.0, 5.0};
  const std::vector<double> d = {0.1, 0.2, 0.3, 0.4, 0.5};
  const WilcoxonResult r = wilcoxon_signed_rank(a, b);
  EXPECT_EQ(r.w_statistic, 0.0);
  EXPECT_EQ(r.w_plus, 15.0);
  EXPECT_EQ(r.method, WilcoxonMethod::exact);
  EXPECT_NEAR(oracle::wilcoxon_exact_p(d), 2.0 / 32.0, 1e-15);
  EXPECT_NEAR(r.p_two_sided, 2.0 / 32.0, 1e-15);
}

TEST(Wilcoxon, TenOneSided) {
  std::vector<double> a, b;
  for (int i = 0; i < 10; ++i) {
    a.push_back(0.5 + 0.01 * (i + 1));
    b.push_back(0.5);
  }
  const WilcoxonResult r = wilcoxon_signed_rank(b, a);
  EXPECT_NEAR(r.p_two_sided, 2.0 / 1024.0, 1e-12);
  EXPECT_TRUE(r.significant());
}

TEST(Wilcoxon, MatchesSignEnumerationWithTies) {
  std::mt19937_64 rng(45);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng() % 12;
    std::vector<double> a(n), b(n, 0.0), d;
    for (auto& v : a) {
      // Small integer support forces ties and zeros.
      v = static_cast<double>(static_cast<int>(rng() % 9) - 4);
    }
    for (double v : a) {
      if (v != 0.0) d.push_back(v);
    }
    const WilcoxonResult r = wilcoxon_signed_rank(a, b);
    ASSERT_EQ(r.n_effective, d.size());
    if (d.empty()) continue;
    ASSERT_NEAR(r.p_two_sided, oracle::wilcoxon_exact_p(d), 1e-12) << "trial " << trial;
    ASSERT_EQ(r.p_two_sided, wilcoxon_signed_rank(b, a).p_two_sided);
  }
}

TEST(Wilcoxon, DistinctMagnitudePValuesAreLatticePoints) {
  std::mt19937_64 rng(46);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng() % 16;
    std::vector<double> a(n), b(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) a[i] = (rng() % 2 ? 1.0 : -1.0) * (i + 1);
    const WilcoxonResult r = wilcoxon_signed_rank(a, b);
    const double units = r.p_two_sided * std::ldexp(1.0, static_cast<int>(n)) / 2.0;
    ASSERT_GT(r.p_two_sided, 0.0);
    ASSERT_LE(r.p_two_sided, 1.0);
    ASSERT_EQ(units, std::round(units));
  }
}

TEST(Wilcoxon, NormalApproximationAboveExactLimit) {
  std::vector<double> a(40), b(40, 0.0);
  for (int i = 0; i < 40; ++i) a[i] = (i % 3 == 0 ? -1.0 : 1.0) * (i + 1);
  const WilcoxonResult r = wilcoxon_signed_rank(a, b);
  EXPECT_EQ(r.method, WilcoxonMethod::normal_approx);
  // W- = sum of ranks i+1 for i = 0,3,...,39 = 1+4+...+40 = 287
  EXPECT_EQ(r.w_statistic, 287.0);
  const double mean = 40.0 * 41 / 4;
  const double sd = std::sqrt(40.0 * 41 * 81 / 24);
  EXPECT_NEAR(r.p_two_sided, std::erfc(std::abs(287.0 - mean) / sd / std::sqrt(2.0)), 1e-12);

  // At the limit the two routes should agree roughly.
  std::vector<double> c(25), z(25, 0.0);
  for (int i = 0; i < 25; ++i) c[i] = (i % 2 ? -1.0 : 1.0) * (i + 1);
  const double exact = wilcoxon_signed_rank(c, z, 25).p_two_sided;
  const double approx = wilcoxon_signed_rank(c, z, 0).p_two_sided;
  EXPECT_NEAR(exact, approx, 0.02);
}

TEST(Wilcoxon, LengthMismatch) {
  const std::vector<double> a = {1, 2}, b = {1};
  EXPECT_THROW(wilcoxon_signed_rank(a, b), DataError);
  EXPECT_THROW(wilcoxon_signed_rank(std::span<const double>{}, std::span<const double>{}), DataError);
}

TEST(Report, JsonKeysAndNulls) {
  const auto j = report::to_json(compute_metrics({0, 100, 0, 0}));
  EXPECT_EQ(j.dump(), R"({"sensitivity":null,"specificity":1.0,"ppv":null,"npv":1.0,"jaccard":null,"dice":null})");
  EXPECT_EQ(report::csv_header(), "sensitivity,specificity,ppv,npv,jaccard,dice");
  EXPECT_EQ(report::csv_row(compute_metrics({0, 100, 0, 0})), ",1,,1,,");
}
