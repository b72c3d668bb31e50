#pragma once

// Binary interchange formats.
//
//   PMAP   "PMAP" | width u32 LE | height u32 LE | width*height binary32 LE
//   gray   binary PGM (P5), maxval 255
//   label  binary PGM (P5), maxval 65535, big-endian samples
//
// Decoders work on byte spans so malformed inputs can be tested without
// touching the filesystem.

#include <bit>
#include <cctype>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <vector>

#include "instaseg/error.hpp"
#include "instaseg/raster.hpp"

namespace instaseg::io {

using Bytes = std::vector<std::uint8_t>;

inline constexpr std::uint64_t kMaxPixels = std::uint64_t{1} << 30;

inline Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  Bytes bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("failed reading '" + path.string() + "'");
  return bytes;
}

inline void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

namespace detail {

inline void put_u32_le(Bytes& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline std::uint32_t get_u32_le(std::span<const std::uint8_t> in, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in[at + i]) << (8 * i);
  return v;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// PMAP

inline Bytes encode_pmap(const ProbMap& map) {
  Bytes out;
  out.reserve(12 + 4 * map.size());
  for (char c : {'P', 'M', 'A', 'P'}) out.push_back(static_cast<std::uint8_t>(c));
  detail::put_u32_le(out, map.width());
  detail::put_u32_le(out, map.height());
  for (float v : map.pixels()) detail::put_u32_le(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

inline ProbMap decode_pmap(std::span<const std::uint8_t> in) {
  constexpr std::size_t header = 12;
  if (in.size() < 4 || std::memcmp(in.data(), "PMAP", 4) != 0) {
    throw FormatError(FormatErrorKind::bad_magic, 0);
  }
  if (in.size() < header) throw FormatError(FormatErrorKind::truncated, in.size(), "header");
  const std::uint32_t width = detail::get_u32_le(in, 4);
  const std::uint32_t height = detail::get_u32_le(in, 8);
  if (width == 0) throw FormatError(FormatErrorKind::malformed_header, 4, "zero width");
  if (height == 0) throw FormatError(FormatErrorKind::malformed_header, 8, "zero height");
  const std::uint64_t pixels = std::uint64_t{width} * height;
  if (pixels > kMaxPixels) {
    throw FormatError(FormatErrorKind::dimension_overflow, 4,
                      std::to_string(width) + "x" + std::to_string(height));
  }
  const std::uint64_t expected = header + 4 * pixels;
  if (in.size() < expected) {
    throw FormatError(FormatErrorKind::truncated, in.size(),
                      "expected " + std::to_string(expected) + " bytes");
  }
  if (in.size() > expected) throw FormatError(FormatErrorKind::trailing_data, expected);

  std::vector<float> values(pixels);
  for (std::size_t i = 0; i < pixels; ++i) {
    const std::size_t at = header + 4 * i;
    const float v = std::bit_cast<float>(detail::get_u32_le(in, at));
    if (!in_unit_range(v)) {
      throw FormatError(FormatErrorKind::value_out_of_range, at, std::to_string(v));
    }
    values[i] = v;
  }
  return ProbMap(width, height, std::move(values));
}

inline ProbMap read_pmap(const std::filesystem::path& path) { return decode_pmap(read_file(path)); }

inline void write_pmap(const ProbMap& map, const std::filesystem::path& path) {
  write_file(path, encode_pmap(map));
}

// ---------------------------------------------------------------------------
// PGM (P5)

struct Pgm {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::uint32_t maxval = 0;
  std::vector<std::uint16_t> samples;
};

inline Bytes encode_pgm(std::uint32_t width, std::uint32_t height, std::uint32_t maxval,
                        std::span<const std::uint16_t> samples) {
  const std::string header = "P5\n" + std::to_string(width) + " " + std::to_string(height) +
                             "\n" + std::to_string(maxval) + "\n";
  const bool wide = maxval > 255;
  Bytes out(header.begin(), header.end());
  out.reserve(header.size() + samples.size() * (wide ? 2 : 1));
  for (auto s : samples) {
    if (wide) out.push_back(static_cast<std::uint8_t>(s >> 8));
    out.push_back(static_cast<std::uint8_t>(s & 0xFF));
  }
  return out;
}

inline Pgm decode_pgm(std::span<const std::uint8_t> in) {
  if (in.size() < 2 || in[0] != 'P' || in[1] != '5') throw FormatError(FormatErrorKind::bad_magic, 0);
  std::size_t pos = 2;

  auto skip_space_and_comments = [&] {
    while (pos < in.size()) {
      if (std::isspace(in[pos])) {
        ++pos;
      } else if (in[pos] == '#') {
        while (pos < in.size() && in[pos] != '\n') ++pos;
      } else {
        break;
      }
    }
  };
  auto read_uint = [&](const char* what) -> std::uint32_t {
    skip_space_and_comments();
    const std::size_t start = pos;
    if (pos >= in.size()) throw FormatError(FormatErrorKind::truncated, pos, what);
    if (!std::isdigit(in[pos])) throw FormatError(FormatErrorKind::malformed_header, pos, what);
    std::uint64_t v = 0;
    while (pos < in.size() && std::isdigit(in[pos])) {
      v = v * 10 + (in[pos] - '0');
      if (v > 0xFFFFFFFFull) throw FormatError(FormatErrorKind::dimension_overflow, start, what);
      ++pos;
    }
    return static_cast<std::uint32_t>(v);
  };

  if (pos < in.size() && !std::isspace(in[pos]) && in[pos] != '#') {
    throw FormatError(FormatErrorKind::malformed_header, pos, "expected whitespace after magic");
  }

  Pgm pgm;
  const std::size_t width_at = pos;
  pgm.width = read_uint("width");
  pgm.height = read_uint("height");
  const std::size_t maxval_at = pos;
  pgm.maxval = read_uint("maxval");
  if (pgm.width == 0 || pgm.height == 0) {
    throw FormatError(FormatErrorKind::malformed_header, width_at, "zero dimension");
  }
  if (pgm.maxval == 0 || pgm.maxval > 65535) {
    throw FormatError(FormatErrorKind::malformed_header, maxval_at, "maxval must be in 1..65535");
  }
  if (pos >= in.size()) throw FormatError(FormatErrorKind::truncated, pos, "raster");
  if (!std::isspace(in[pos])) {
    throw FormatError(FormatErrorKind::malformed_header, pos, "expected whitespace before raster");
  }
  ++pos;

  const std::uint64_t pixels = std::uint64_t{pgm.width} * pgm.height;
  if (pixels > kMaxPixels) throw FormatError(FormatErrorKind::dimension_overflow, width_at);
  const std::size_t bytes_per_sample = pgm.maxval > 255 ? 2 : 1;
  const std::uint64_t expected = pos + pixels * bytes_per_sample;
  if (in.size() < expected) {
    throw FormatError(FormatErrorKind::truncated, in.size(),
                      "expected " + std::to_string(expected) + " bytes");
  }
  if (in.size() > expected) throw FormatError(FormatErrorKind::trailing_data, expected);

  pgm.samples.resize(pixels);
  for (std::size_t i = 0; i < pixels; ++i) {
    const std::size_t at = pos + i * bytes_per_sample;
    std::uint16_t s = in[at];
    if (bytes_per_sample == 2) s = static_cast<std::uint16_t>((s << 8) | in[at + 1]);
    if (s > pgm.maxval) {
      throw FormatError(FormatErrorKind::value_out_of_range, at, "sample exceeds maxval");
    }
    pgm.samples[i] = s;
  }
  return pgm;
}

inline Bytes encode_gray(const GrayImage& image) {
  const std::vector<std::uint16_t> samples(image.pixels().begin(), image.pixels().end());
  return encode_pgm(image.width(), image.height(), 255, samples);
}

inline GrayImage decode_gray(std::span<const std::uint8_t> in) {
  Pgm pgm = decode_pgm(in);
  if (pgm.maxval != 255) {
    throw FormatError(FormatErrorKind::maxval_mismatch, 0,
                      "gray image needs maxval 255, got " + std::to_string(pgm.maxval));
  }
  std::vector<std::uint8_t> data(pgm.samples.begin(), pgm.samples.end());
  return GrayImage(pgm.width, pgm.height, std::move(data));
}

// Masks are stored as gray images with foreground = 255.
inline Bytes encode_mask(const BinaryMask& mask) {
  std::vector<std::uint16_t> samples(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) samples[i] = mask[i] ? 255 : 0;
  return encode_pgm(mask.width(), mask.height(), 255, samples);
}

inline Bytes encode_label(const LabelMap& labels) {
  if (labels.n_labels() > 65535) {
    throw DataError("label map has " + std::to_string(labels.n_labels()) +
                    " labels, 16-bit PGM holds at most 65535");
  }
  const std::vector<std::uint16_t> samples(labels.pixels().begin(), labels.pixels().end());
  return encode_pgm(labels.width(), labels.height(), 65535, samples);
}

inline LabelMap decode_label(std::span<const std::uint8_t> in) {
  Pgm pgm = decode_pgm(in);
  if (pgm.maxval != 65535) {
    throw FormatError(FormatErrorKind::maxval_mismatch, 0,
                      "label map needs maxval 65535, got " + std::to_string(pgm.maxval));
  }
  std::vector<std::uint32_t> data(pgm.samples.begin(), pgm.samples.end());
  try {
    return LabelMap(pgm.width, pgm.height, std::move(data));
  } catch (const DataError& e) {
    throw FormatError(FormatErrorKind::non_contiguous_labels, 0, e.what());
  }
}

// Accepts either an 8-bit mask/gray image or a 16-bit label map; any nonzero
// sample is foreground.
inline BinaryMask decode_any_mask(std::span<const std::uint8_t> in) {
  const Pgm pgm = decode_pgm(in);
  if (pgm.maxval != 255 && pgm.maxval != 65535) {
    throw FormatError(FormatErrorKind::maxval_mismatch, 0,
                      "mask needs maxval 255 or 65535, got " + std::to_string(pgm.maxval));
  }
  BinaryMask mask(pgm.width, pgm.height);
  for (std::size_t i = 0; i < pgm.samples.size(); ++i) mask[i] = pgm.samples[i] != 0 ? 1 : 0;
  return mask;
}

inline GrayImage read_gray(const std::filesystem::path& path) { return decode_gray(read_file(path)); }
inline void write_gray(const GrayImage& image, const std::filesystem::path& path) {
  write_file(path, encode_gray(image));
}

inline LabelMap read_label(const std::filesystem::path& path) { return decode_label(read_file(path)); }
inline void write_label(const LabelMap& labels, const std::filesystem::path& path) {
  write_file(path, encode_label(labels));
}

inline BinaryMask read_mask(const std::filesystem::path& path) {
  return decode_any_mask(read_file(path));
}
inline void write_mask(const BinaryMask& mask, const std::filesystem::path& path) {
  write_file(path, encode_mask(mask));
}

}  // namespace instaseg::io
