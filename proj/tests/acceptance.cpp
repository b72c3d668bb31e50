// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "instaseg/instaseg.hpp"
#include "oracles.hpp"

using namespace instaseg;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

Outcome fail(std::string why) { return {false, std::move(why)}; }

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

const StructuringElement kSe = StructuringElement::square(5);

bool pointwise_le(const GrayImage& a, const GrayImage& b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] > b[i]) return false;
  }
  return true;
}

Outcome morphology_oracle() {
  const auto start = Clock::now();
  std::mt19937_64 rng(1001);
  for (int trial = 0; trial < 200; ++trial) {
    const GrayImage img = trial % 2 ? oracle::random_gray(rng, 32, 32)
                                    : oracle::random_blocky(rng, 32, 32, 2 + trial % 5);
    if (erode(img, kSe) != oracle::erode(img, 5)) return fail(fmt("erode differs on image %d", trial));
    if (dilate(img, kSe) != oracle::dilate(img, 5)) return fail(fmt("dilate differs on image %d", trial));
    if (open(img, kSe) != oracle::open(img, 5)) return fail(fmt("open differs on image %d", trial));
  }
  const double t = seconds_since(start);
  if (t >= 10.0) return fail(fmt("took %.2f s", t));
  return {true, fmt("200 images, %.3f s", t)};
}

Outcome morphology_laws() {
  std::mt19937_64 rng(1002);
  for (int trial = 0; trial < 100; ++trial) {
    const GrayImage x = oracle::random_blocky(rng, 32, 32, 1 + trial % 6);
    GrayImage y = x;
    for (auto& v : y.pixels()) v = static_cast<std::uint8_t>(std::min<int>(255, v + rng() % 50));

    const GrayImage ex = erode(x, kSe);
    const GrayImage dx = dilate(x, kSe);
    const GrayImage ox = open(x, kSe);
    if (!pointwise_le(ex, x) || !pointwise_le(ox, x)) return fail(fmt("anti-extensivity, image %d", trial));
    if (!pointwise_le(x, dx)) return fail(fmt("extensivity, image %d", trial));
    if (!pointwise_le(ex, erode(y, kSe)) || !pointwise_le(dx, dilate(y, kSe)) ||
        !pointwise_le(ox, open(y, kSe))) {
      return fail(fmt("monotonicity, image %d", trial));
    }
    if (open(ox, kSe) != ox) return fail(fmt("open idempotence, image %d", trial));

    GrayImage inv = x;
    for (auto& v : inv.pixels()) v = static_cast<std::uint8_t>(255 - v);
    const GrayImage d_inv = dilate(inv, kSe);
    for (std::uint32_t r = 2; r + 2 < x.height(); ++r) {
      for (std::uint32_t c = 2; c + 2 < x.width(); ++c) {
        if (ex(c, r) != 255 - d_inv(c, r)) return fail(fmt("duality at (%u,%u), image %d", c, r, trial));
      }
    }

    const std::uint32_t sx = 1 + trial % 5;
    const std::uint32_t sy = 1 + trial % 3;
    GrayImage shifted(x.width(), x.height(), 0);
    for (std::uint32_t r = 0; r + sy < x.height(); ++r) {
      for (std::uint32_t c = 0; c + sx < x.width(); ++c) shifted(c + sx, r + sy) = x(c, r);
    }
    const GrayImage es = erode(shifted, kSe);
    const GrayImage ds = dilate(shifted, kSe);
    for (std::uint32_t r = 2; r + 2 + sy < x.height(); ++r) {
      for (std::uint32_t c = 2; c + 2 + sx < x.width(); ++c) {
        if (es(c + sx, r + sy) != ex(c, r) || ds(c + sx, r + sy) != dx(c, r)) {
          return fail(fmt("translation at (%u,%u), image %d", c, r, trial));
        }
      }
    }
  }
  return {true, "100 images, six laws"};
}

Histogram random_histogram(std::mt19937_64& rng, int trial) {
  Histogram h{};
  switch (trial % 4) {
    case 0: {  // sparse
      const int levels = 2 + static_cast<int>(rng() % 6);
      for (int i = 0; i < levels; ++i) h[rng() % 256] += 1 + rng() % 200;
      break;
    }
    case 1: {  // dense, small counts
      for (auto& c : h) c = rng() % 16;
      break;
    }
    case 2: {  // two symmetric spikes, forces ties
      const int a = static_cast<int>(rng() % 128);
      const int b = 128 + static_cast<int>(rng() % 128);
      h[a] = h[b] = 1 + rng() % 500;
      break;
    }
    default: {  // bimodal
      std::normal_distribution<double> lo(60, 15), hi(190, 20);
      for (int i = 0; i < 1500; ++i) {
        const double v = (rng() & 1) ? lo(rng) : hi(rng);
        ++h[std::clamp(static_cast<int>(std::lround(v)), 0, 255)];
      }
    }
  }
  return h;
}

Outcome otsu_oracle() {
  std::mt19937_64 rng(1003);
  int degenerate = 0;
  for (int trial = 0; trial < 500; ++trial) {
    Histogram h = random_histogram(rng, trial);
    if (trial % 50 == 49) h = Histogram{}, h[rng() % 256] = 37;
    const int expect = oracle::otsu(h);
    const OtsuResult got = otsu_threshold(h);
    if (expect < 0) {
      ++degenerate;
      if (!got.degenerate) return fail(fmt("histogram %d should be degenerate", trial));
      continue;
    }
    if (got.degenerate || got.threshold != expect) {
      return fail(fmt("histogram %d: got %d, oracle %d", trial, got.threshold, expect));
    }
  }
  return {true, fmt("500 histograms (%d single-level)", degenerate)};
}

Outcome components_oracle() {
  std::mt19937_64 rng(1004);
  for (int trial = 0; trial < 200; ++trial) {
    const BinaryMask m = oracle::random_mask(rng, 64, 64, 0.3 + 0.3 * (trial % 3) / 2.0);
    for (int conn : {4, 8}) {
      for (std::int64_t min_area : {std::int64_t{0}, std::int64_t{6}}) {
        const LabelMap got = label_components(m, min_area, connectivity_from_int(conn));
        const auto expect = oracle::flood_labels(m, min_area, conn);
        std::uint32_t count = 0;
        for (auto v : expect) count = std::max(count, v);
        if (got.n_labels() != count) {
          return fail(fmt("mask %d conn %d min_area %lld: %u vs %u labels", trial, conn,
                          static_cast<long long>(min_area), got.n_labels(), count));
        }
        for (std::size_t i = 0; i < expect.size(); ++i) {
          if (got[i] != expect[i]) return fail(fmt("mask %d conn %d: label differs at %zu", trial, conn, i));
        }
      }
    }
  }
  return {true, "200 masks x {4,8} x {0,6}"};
}

Outcome metric_arithmetic() {
  const MetricsReport r = compute_metrics({.tp = 3, .tn = 5, .fp = 1, .fn = 1});
  std::string detail = fmt("dice %.17g, jaccard %.17g", *r.dice, *r.jaccard);
  bool pass = true;
  if (std::abs(*r.jaccard - 3.0 / 5.0) > 1e-12) pass = false, detail += "; jaccard != 3/5";
  if (std::abs(*r.dice - 6.0 / 7.0) > 1e-12) pass = false, detail += "; dice != 6/7";

  std::mt19937_64 rng(1005);
  for (int i = 0; i < 1000; ++i) {
    const ConfusionCounts c{rng() % 50, rng() % 50, rng() % 50, rng() % 50};
    const MetricsReport q = compute_metrics(c);
    if (q.dice && q.jaccard && *q.dice < *q.jaccard) {
      pass = false;
      detail += fmt("; dice < jaccard at quadruple %d", i);
      break;
    }
  }
  return {pass, detail};
}

Outcome mape_arithmetic() {
  const std::vector<CountPair> a{{28, 28}};
  const std::vector<CountPair> b{{20, 23}};
  const std::vector<CountPair> c{{10, 9}, {20, 25}};
  const double ra = mape(a), rb = mape(b), rc = mape(c);
  const bool pass = std::abs(ra) <= 1e-12 && std::abs(rb - 15.0) <= 1e-12 && std::abs(rc - 17.5) <= 1e-12;
  return {pass, fmt("%.17g%%, %.17g%%, %.17g%%", ra, rb, rc)};
}

Outcome wilcoxon_exact() {
  std::vector<double> a, b;
  for (int i = 0; i < 10; ++i) {
    a.push_back(0.90 + 0.004 * i);
    b.push_back(0.88 + 0.001 * i);
  }
  const WilcoxonResult fwd = wilcoxon_signed_rank(a, b);
  const WilcoxonResult rev = wilcoxon_signed_rank(b, a);
  std::vector<double> diffs;
  for (int i = 0; i < 10; ++i) diffs.push_back(a[i] - b[i]);
  const double reference = oracle::wilcoxon_exact_p(diffs);

  std::string detail = fmt("p = %.17g (%.3f printed)", fwd.p_two_sided, fwd.p_two_sided);
  bool pass = fwd.method == WilcoxonMethod::exact;
  if (std::abs(fwd.p_two_sided - 2.0 / 1024.0) > 1e-12) pass = false, detail += "; != 2/1024";
  if (std::abs(reference - fwd.p_two_sided) > 1e-12) pass = false, detail += "; != enumeration";
  if (fmt("%.3f", fwd.p_two_sided) != "0.002") pass = false, detail += "; does not print as 0.002";
  if (rev.p_two_sided != fwd.p_two_sided || rev.w_statistic != fwd.w_statistic) {
    pass = false, detail += "; swap changes the result";
  }

  std::mt19937_64 rng(1006);
  std::uniform_real_distribution<double> u(0.8, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> x(2 + trial % 14), y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = u(rng), y[i] = trial % 3 ? u(rng) : x[i];
    if (wilcoxon_signed_rank(x, y).p_two_sided != wilcoxon_signed_rank(y, x).p_two_sided) {
      pass = false, detail += fmt("; swap asymmetry on series %d", trial);
      break;
    }
  }
  return {pass, detail};
}

// 512x256 phantom split at 1024x512; min_area 2000 scaled by the pixel ratio
// 1024*512 / (2048*1024).
PipelineConfig phantom_config() {
  PipelineConfig cfg;
  cfg.target_width = 1024;
  cfg.target_height = 512;
  cfg.min_area = 500;
  return cfg;
}

Outcome phantom_separation() {
  const auto start = Clock::now();
  const PipelineConfig cfg = phantom_config();
  std::vector<CountPair> pipeline, naive;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    PhantomSpec spec;
    spec.n_blobs = 14;
    spec.bridge_value = 0.4;
    spec.blob_peak = 0.95;
    spec.noise_amplitude = 0.02;
    spec.seed = seed;
    const PhantomPair p = generate_phantom(spec);
    pipeline.push_back({p.truth_count, split_instances(p.map, cfg).labels.n_labels()});
    naive.push_back({p.truth_count, split_fixed(p.map, cfg, kBaselineLevel).labels.n_labels()});
  }
  const double mp = mape(pipeline);
  const double mn = mape(naive);
  const double t = seconds_since(start);
  const bool pass = mp <= 5.0 && mn >= 20.0 && t < 60.0;
  return {pass, fmt("pipeline MAPE %.2f%%, fixed 0.2 MAPE %.2f%%, %.2f s", mp, mn, t)};
}

std::vector<std::vector<std::uint8_t>> trace_bytes(const std::vector<SplitResult>& results,
                                                   const fs::path& dir) {
  std::vector<std::vector<std::uint8_t>> out;
  for (std::size_t i = 0; i < results.size(); ++i) {
    for (const auto& f : write_trace(*results[i].trace, dir / std::to_string(i))) {
      out.push_back(io::read_file(f));
    }
  }
  return out;
}

Outcome pipeline_determinism() {
  std::vector<ProbMap> maps;
  for (std::uint64_t seed = 100; seed < 106; ++seed) {
    PhantomSpec spec;
    spec.seed = seed;
    maps.push_back(generate_phantom(spec).map);
  }
  const PipelineConfig cfg = phantom_config();
  const fs::path root = fs::temp_directory_path() / fmt("instaseg_accept_%d", static_cast<int>(::getpid()));
  fs::remove_all(root);

  const auto first = split_many(maps, cfg, 1, true);
  const auto second = split_many(maps, cfg, 1, true);
  const auto threaded = split_many(maps, cfg, 4, true);
  const auto bytes_first = trace_bytes(first, root / "a");
  const auto bytes_second = trace_bytes(second, root / "b");
  const auto bytes_threaded = trace_bytes(threaded, root / "c");
  fs::remove_all(root);

  for (std::size_t i = 0; i < maps.size(); ++i) {
    if (first[i].labels != second[i].labels) return fail(fmt("map %zu differs between runs", i));
    if (first[i].labels != threaded[i].labels) return fail(fmt("map %zu differs at 4 jobs", i));
  }
  if (bytes_first != bytes_second) return fail("trace files differ between runs");
  if (bytes_first != bytes_threaded) return fail("trace files differ at 4 jobs");
  return {true, fmt("%zu maps, %zu trace files, jobs 1 and 4", maps.size(), bytes_first.size())};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> checks = {
      {"morphology-oracle", morphology_oracle},
      {"morphology-laws", morphology_laws},
      {"otsu-oracle", otsu_oracle},
      {"components-oracle", components_oracle},
      {"metric-arithmetic", metric_arithmetic},
      {"mape-arithmetic", mape_arithmetic},
      {"wilcoxon-exact", wilcoxon_exact},
      {"phantom-separation", phantom_separation},
      {"pipeline-determinism", pipeline_determinism},
  };
  int failed = 0;
  for (const auto& [name, run] : checks) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = fail(std::string("exception: ") + e.what());
    }
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    failed += !o.pass;
  }
  std::printf("%zu checks, %d failed\n", checks.size(), failed);
  return failed ? 1 : 0;
}
