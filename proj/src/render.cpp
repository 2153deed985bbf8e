// Copyright (C) 2026 specrec authors
// SPDX-License-Identifier: Apache-2.0
#include "specrec/render.hpp"

#include "specrec/errors.hpp"

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace specrec {

namespace {

struct Rgb {
  double r, g, b;
};

// viridis anchor points at t = 0, 0.25, 0.5, 0.75, 1
constexpr Rgb kAnchors[5] = {
    {0.267, 0.005, 0.329}, {0.229, 0.322, 0.546}, {0.128, 0.567, 0.551},
    {0.369, 0.789, 0.383}, {0.993, 0.906, 0.144},
};

Rgb colormap(double t) {
  t = std::clamp(t, 0.0, 1.0);
  const double pos = t * 4.0;
  const int lo = std::min(3, static_cast<int>(pos));
  const double f = pos - lo;
  return {kAnchors[lo].r + f * (kAnchors[lo + 1].r - kAnchors[lo].r),
          kAnchors[lo].g + f * (kAnchors[lo + 1].g - kAnchors[lo].g),
          kAnchors[lo].b + f * (kAnchors[lo + 1].b - kAnchors[lo].b)};
}

void put_u32(std::vector<std::uint8_t>& v, std::uint32_t x) {
  v.push_back(x & 0xff);
  v.push_back((x >> 8) & 0xff);
  v.push_back((x >> 16) & 0xff);
  v.push_back((x >> 24) & 0xff);
}

void put_u16(std::vector<std::uint8_t>& v, std::uint16_t x) {
  v.push_back(x & 0xff);
  v.push_back((x >> 8) & 0xff);
}

}  // namespace

void render_heatmap(const std::string& path, const GridF& values_dbm, const NormalizationSpec& range,
                    int scale) {
  if (scale < 1) throw std::invalid_argument("render_heatmap: scale must be >= 1");
  range.validate();
  const int width = values_dbm.cols() * scale;
  const int height = values_dbm.rows() * scale;
  const int row_bytes = ((width * 3 + 3) / 4) * 4;  // BMP rows pad to 4 bytes
  const std::uint32_t pixel_bytes = static_cast<std::uint32_t>(row_bytes) * height;

  std::vector<std::uint8_t> out;
  out.reserve(54 + pixel_bytes);
  // BITMAPFILEHEADER
  out.push_back('B');
  out.push_back('M');
  put_u32(out, 54 + pixel_bytes);
  put_u32(out, 0);
  put_u32(out, 54);
  // BITMAPINFOHEADER
  put_u32(out, 40);
  put_u32(out, static_cast<std::uint32_t>(width));
  put_u32(out, static_cast<std::uint32_t>(height));
  put_u16(out, 1);
  put_u16(out, 24);
  put_u32(out, 0);
  put_u32(out, pixel_bytes);
  put_u32(out, 2835);
  put_u32(out, 2835);
  put_u32(out, 0);
  put_u32(out, 0);

  const double span = range.max_dbm - range.min_dbm;
  std::vector<std::uint8_t> row(row_bytes, 0);
  // BMP stores rows bottom-up; emit the last grid row first so row 0
  // appears at the top of the image
  for (int y = height - 1; y >= 0; --y) {
    const int r = y / scale;
    std::fill(row.begin(), row.end(), 0);
    for (int x = 0; x < width; ++x) {
      const int c = x / scale;
      const Rgb rgb = colormap((values_dbm.at(r, c) - range.min_dbm) / span);
      row[x * 3 + 0] = static_cast<std::uint8_t>(std::clamp(rgb.b, 0.0, 1.0) * 255.0 + 0.5);
      row[x * 3 + 1] = static_cast<std::uint8_t>(std::clamp(rgb.g, 0.0, 1.0) * 255.0 + 0.5);
      row[x * 3 + 2] = static_cast<std::uint8_t>(std::clamp(rgb.r, 0.0, 1.0) * 255.0 + 0.5);
    }
    out.insert(out.end(), row.begin(), row.end());
  }

  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open image for writing: " + path);
  f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  if (!f) throw IoError("write failed for image: " + path);
}

}  // namespace specrec
