#pragma once

// Two-pass connected-component labeling with a union-find equivalence table
// (path halving, union by smaller root). Surviving components are numbered
// 1..K in the row-major order of their first pixel.

#include <cstdint>
#include <string>
#include <vector>

#include "instaseg/raster.hpp"

namespace instaseg {

enum class Connectivity : int { four = 4, eight = 8 };

inline Connectivity connectivity_from_int(int n) {
  if (n == 4) return Connectivity::four;
  if (n == 8) return Connectivity::eight;
  throw ConfigError("connectivity must be 4 or 8, got " + std::to_string(n));
}

namespace detail {

class DisjointSets {
 public:
  std::uint32_t make() {
    parent_.push_back(static_cast<std::uint32_t>(parent_.size()));
    return parent_.back();
  }

  std::uint32_t find(std::uint32_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  // The smaller root wins, so a root is always the provisional label that
  // appeared first in scan order.
  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a < b) parent_[b] = a;
    else parent_[a] = b;
  }

  std::size_t size() const noexcept { return parent_.size(); }

 private:
  std::vector<std::uint32_t> parent_;
};

}  // namespace detail

// Components with fewer than `min_area` pixels become background.
inline LabelMap label_components(const BinaryMask& mask, std::int64_t min_area,
                                 Connectivity connectivity = Connectivity::eight) {
  if (min_area < 0) throw ConfigError("min_area must be >= 0, got " + std::to_string(min_area));
  const std::size_t w = mask.width();
  const std::size_t h = mask.height();
  constexpr std::uint32_t kNone = 0xFFFFFFFFu;
  std::vector<std::uint32_t> provisional(mask.size(), kNone);
  detail::DisjointSets sets;

  const bool diagonal = connectivity == Connectivity::eight;
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      if (!mask(x, y)) continue;
      std::uint32_t label = kNone;
      auto join = [&](std::size_t nx, std::size_t ny) {
        const std::uint32_t n = provisional[ny * w + nx];
        if (n == kNone) return;
        if (label == kNone) label = n;
        else sets.unite(label, n);
      };
      if (x > 0) join(x - 1, y);
      if (y > 0) {
        join(x, y - 1);
        if (diagonal) {
          if (x > 0) join(x - 1, y - 1);
          if (x + 1 < w) join(x + 1, y - 1);
        }
      }
      provisional[y * w + x] = label == kNone ? sets.make() : label;
    }
  }

  std::vector<std::uint64_t> area(sets.size(), 0);
  for (auto& p : provisional) {
    if (p == kNone) continue;
    p = sets.find(p);
    ++area[p];
  }

  std::vector<std::uint32_t> final_label(sets.size(), 0);
  std::vector<bool> assigned(sets.size(), false);
  std::uint32_t next = 0;
  std::vector<std::uint32_t> out(mask.size(), 0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const std::uint32_t root = provisional[i];
    if (root == kNone) continue;
    if (!assigned[root]) {
      assigned[root] = true;
      if (area[root] >= static_cast<std::uint64_t>(min_area)) final_label[root] = ++next;
    }
    out[i] = final_label[root];
  }
  return LabelMap(mask.width(), mask.height(), std::move(out));
}

inline std::uint32_t count_instances(const LabelMap& labels) noexcept { return labels.n_labels(); }

}  // namespace instaseg
