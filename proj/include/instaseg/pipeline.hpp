#pragma once

// Probability map -> instance labels.
//
//   resize (Lanczos) -> quantize -> open -> sharpen -> erode x N
//     -> Otsu binarization -> area-filtered connected components
//
// Bridges thinner than the structuring element are removed by the opening
// and the erosions shrink every remaining object before thresholding, which
// detaches objects that touch in the probability map.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "instaseg/components.hpp"
#include "instaseg/io.hpp"
#include "instaseg/lanczos.hpp"
#include "instaseg/morphology.hpp"
#include "instaseg/raster.hpp"
#include "instaseg/threshold.hpp"

namespace instaseg {

inline constexpr int kDefaultSeSize = 5;
inline constexpr int kDefaultErosionPasses = 2;
inline constexpr std::int64_t kDefaultMinArea = 2000;

struct PipelineConfig {
  int se_size = kDefaultSeSize;
  int erosion_passes = kDefaultErosionPasses;
  // Applies at the target resolution.
  std::int64_t min_area = kDefaultMinArea;
  Connectivity connectivity = Connectivity::eight;
  // Output size; 0 keeps the input size along that axis.
  std::uint32_t target_width = 0;
  std::uint32_t target_height = 0;

  void validate() const {
    StructuringElement::square(se_size);
    if (erosion_passes < 0) {
      throw ConfigError("erosion_passes must be >= 0, got " + std::to_string(erosion_passes));
    }
    if (min_area < 0) throw ConfigError("min_area must be >= 0, got " + std::to_string(min_area));
    if (connectivity != Connectivity::four && connectivity != Connectivity::eight) {
      throw ConfigError("connectivity must be 4 or 8");
    }
  }
};

// Intermediate images of one pipeline run.
struct StageTrace {
  GrayImage resized;
  GrayImage opened;
  GrayImage sharpened;
  std::vector<GrayImage> eroded;
  BinaryMask binary;
  LabelMap labels;
};

struct SplitResult {
  LabelMap labels;
  OtsuResult otsu;
  // Otsu found a single intensity level; labels are empty.
  bool degenerate = false;
  std::optional<StageTrace> trace;
};

namespace detail {

inline ProbMap resize_to_target(const ProbMap& map, const PipelineConfig& cfg) {
  const std::uint32_t w = cfg.target_width ? cfg.target_width : map.width();
  const std::uint32_t h = cfg.target_height ? cfg.target_height : map.height();
  return lanczos_resize(map, w, h);
}

}  // namespace detail

inline SplitResult split_instances(const ProbMap& map, const PipelineConfig& cfg = {},
                                   bool keep_trace = false) {
  cfg.validate();
  const auto se = StructuringElement::square(cfg.se_size);

  GrayImage resized = quantize(detail::resize_to_target(map, cfg));
  GrayImage opened = open(resized, se);
  GrayImage sharpened = sharpen(opened);
  std::vector<GrayImage> eroded;
  GrayImage current = sharpened;
  for (int i = 0; i < cfg.erosion_passes; ++i) {
    current = erode(current, se);
    if (keep_trace) eroded.push_back(current);
  }

  SplitResult result;
  result.otsu = otsu_threshold(current);
  result.degenerate = result.otsu.degenerate;
  BinaryMask binary = binarize_otsu(current, result.otsu);
  result.labels = label_components(binary, cfg.min_area, cfg.connectivity);

  if (keep_trace) {
    result.trace = StageTrace{std::move(resized), std::move(opened), std::move(sharpened),
                              std::move(eroded), std::move(binary), result.labels};
  }
  return result;
}

// Baseline without post-processing: resize, then a fixed probability cut.
inline SplitResult split_fixed(const ProbMap& map, const PipelineConfig& cfg, double level) {
  cfg.validate();
  SplitResult result;
  const ProbMap resized = detail::resize_to_target(map, cfg);
  result.labels = label_components(binarize_fixed(resized, level), cfg.min_area, cfg.connectivity);
  return result;
}

// Writes 01_resized.pgm, 02_opened.pgm, 03_sharpened.pgm, one NN_erodedK.pgm
// per erosion pass, then the binary mask and the labels. With the default two
// erosions the last two are 06_binary.pgm and 07_labels.pgm.
inline std::vector<std::filesystem::path> write_trace(const StageTrace& trace,
                                                      const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create trace directory '" + dir.string() + "': " + ec.message());

  std::vector<std::filesystem::path> written;
  int step = 0;
  auto name = [&](const std::string& stem) {
    ++step;
    std::string prefix = std::to_string(step);
    if (prefix.size() < 2) prefix.insert(0, "0");
    const auto path = dir / (prefix + "_" + stem + ".pgm");
    written.push_back(path);
    return path;
  };
  io::write_gray(trace.resized, name("resized"));
  io::write_gray(trace.opened, name("opened"));
  io::write_gray(trace.sharpened, name("sharpened"));
  for (std::size_t i = 0; i < trace.eroded.size(); ++i) {
    io::write_gray(trace.eroded[i], name("eroded" + std::to_string(i + 1)));
  }
  io::write_mask(trace.binary, name("binary"));
  io::write_label(trace.labels, name("labels"));
  return written;
}

// Runs `work(i)` for i in [0, count) on up to `jobs` threads. Exceptions are
// rethrown on the calling thread (the one from the lowest index wins).
template <typename Work>
void parallel_for(std::size_t count, unsigned jobs, Work work) {
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        work(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// Results are in input order regardless of `jobs`.
inline std::vector<SplitResult> split_many(std::span<const ProbMap> maps, const PipelineConfig& cfg,
                                           unsigned jobs, bool keep_trace = false) {
  std::vector<SplitResult> results(maps.size());
  parallel_for(maps.size(), jobs, [&](std::size_t i) { results[i] = split_instances(maps[i], cfg, keep_trace); });
  return results;
}

}  // namespace instaseg
