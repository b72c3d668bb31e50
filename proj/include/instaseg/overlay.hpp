#pragma once

#include <cstdint>
#include <string>

#include "instaseg/raster.hpp"

namespace instaseg {

// Gray level painted over instance `label` (>= 1). Distinct for the first
// 192 labels; all values lie in [64, 255].
inline std::uint8_t overlay_level(std::uint32_t label) noexcept {
  return static_cast<std::uint8_t>(255 - ((label - 1) * 67u) % 192u);
}

// Background where the label is 0, a per-label flat level elsewhere.
inline GrayImage overlay_labels(const GrayImage& background, const LabelMap& labels) {
  if (background.width() != labels.width() || background.height() != labels.height()) {
    throw DataError("overlay: background is " + std::to_string(background.width()) + "x" +
                    std::to_string(background.height()) + ", labels are " +
                    std::to_string(labels.width()) + "x" + std::to_string(labels.height()));
  }
  GrayImage out = background;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (labels[i] != 0) out[i] = overlay_level(labels[i]);
  }
  return out;
}

}  // namespace instaseg
