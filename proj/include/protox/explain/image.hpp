#pragma once

#include <zlib.h>

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "protox/core/error.hpp"
#include "protox/env/corridor.hpp"

namespace protox::explain {

using env::Observation;

namespace detail {

inline void put_u32_be(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

inline void put_chunk(std::vector<std::uint8_t>& out, const char type[4],
                      const std::vector<std::uint8_t>& data) {
  put_u32_be(out, static_cast<std::uint32_t>(data.size()));
  const std::size_t crc_start = out.size();
  out.insert(out.end(), type, type + 4);
  out.insert(out.end(), data.begin(), data.end());
  const auto crc = crc32(0L, out.data() + crc_start, static_cast<uInt>(out.size() - crc_start));
  put_u32_be(out, static_cast<std::uint32_t>(crc));
}

}  // namespace detail

// Truecolor 8-bit PNG; scanlines use filter 0 and zlib level 6, so identical
// pixels produce identical bytes.
inline std::vector<std::uint8_t> encode_png(const Observation& img) {
  if (img.pixels.size() != static_cast<std::size_t>(img.h) * img.w * 3)
    throw ShapeError("encode_png: pixel buffer does not match declared size");
  std::vector<std::uint8_t> out = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};

  std::vector<std::uint8_t> ihdr;
  detail::put_u32_be(ihdr, static_cast<std::uint32_t>(img.w));
  detail::put_u32_be(ihdr, static_cast<std::uint32_t>(img.h));
  ihdr.push_back(8);   // bit depth
  ihdr.push_back(2);   // truecolor
  ihdr.push_back(0);   // compression
  ihdr.push_back(0);   // filter
  ihdr.push_back(0);   // interlace
  detail::put_chunk(out, "IHDR", ihdr);

  std::vector<std::uint8_t> raw;
  raw.reserve(static_cast<std::size_t>(img.h) * (static_cast<std::size_t>(img.w) * 3 + 1));
  for (int y = 0; y < img.h; ++y) {
    raw.push_back(0);  // filter none
    const auto* row = &img.pixels[static_cast<std::size_t>(y) * img.w * 3];
    raw.insert(raw.end(), row, row + static_cast<std::size_t>(img.w) * 3);
  }
  uLongf comp_len = compressBound(static_cast<uLong>(raw.size()));
  std::vector<std::uint8_t> comp(comp_len);
  if (compress2(comp.data(), &comp_len, raw.data(), static_cast<uLong>(raw.size()), 6) != Z_OK)
    throw IoError("encode_png: zlib compression failed");
  comp.resize(comp_len);
  detail::put_chunk(out, "IDAT", comp);
  detail::put_chunk(out, "IEND", {});
  return out;
}

inline void write_png(const Observation& img, const std::filesystem::path& path) {
  const auto bytes = encode_png(img);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("write_png: cannot open " + path.string());
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IoError("write_png: write failed for " + path.string());
}

// Equal-weight alpha blend; n copies of one image reproduce it exactly.
inline Observation overlay_blend(const std::vector<Observation>& images) {
  if (images.empty()) throw ConfigError("overlay_blend: need at least one image");
  const int h = images[0].h, w = images[0].w;
  std::vector<std::uint64_t> acc(static_cast<std::size_t>(h) * w * 3, 0);
  for (const auto& img : images) {
    if (img.h != h || img.w != w) throw ShapeError("overlay_blend: image sizes differ");
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += img.pixels[i];
  }
  Observation out;
  out.h = h;
  out.w = w;
  out.pixels.resize(acc.size());
  const std::uint64_t n = images.size();
  for (std::size_t i = 0; i < acc.size(); ++i)
    out.pixels[i] = static_cast<std::uint8_t>((acc[i] + n / 2) / n);
  return out;
}

// Red overlay with alpha proportional to the heatmap value.
inline Observation render_heatmap(const Observation& base, const std::vector<double>& heatmap) {
  if (heatmap.size() != static_cast<std::size_t>(base.h) * base.w)
    throw ShapeError("render_heatmap: map size does not match image");
  double mx = 0;
  for (double v : heatmap) mx = std::max(mx, v);
  Observation out = base;
  if (mx <= 0) return out;
  for (std::size_t i = 0; i < heatmap.size(); ++i) {
    const double a = 0.65 * heatmap[i] / mx;
    auto* p = &out.pixels[i * 3];
    p[0] = static_cast<std::uint8_t>(std::lround((1 - a) * p[0] + a * 255.0));
    p[1] = static_cast<std::uint8_t>(std::lround((1 - a) * p[1]));
    p[2] = static_cast<std::uint8_t>(std::lround((1 - a) * p[2]));
  }
  return out;
}

}  // namespace protox::explain
