// License: Apache 2.0. See LICENSE file in root directory.
#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "censtereo/image.hpp"

namespace censtereo {

constexpr int kCensusRadius = 3;            // 7x7 window
constexpr int kCensusBits = 48;             // 7*7 - 1 neighbor comparisons

// Per-pixel 48-bit codes in 64-bit words. Codes within `margin` pixels of the
// border are unspecified (left at zero) and excluded by interior().
struct CensusImage {
  int width = 0;
  int height = 0;
  std::vector<uint64_t> codes;
  static constexpr int margin = kCensusRadius;

  CensusImage() = default;
  CensusImage(int w, int h) : width(w), height(h), codes(size_t(w) * h, 0) {}

  uint64_t at(int x, int y) const { return codes[size_t(y) * width + x]; }
  bool interior(int x, int y) const {
    return x >= margin && y >= margin && x < width - margin &&
           y < height - margin;
  }
};

// 7x7 Census: bit k is set when the k-th neighbor (row-major over the window,
// center skipped) is strictly darker than the center pixel.
inline CensusImage census_transform(const GrayImage& img) {
  if (img.width < 2 * kCensusRadius + 1 || img.height < 2 * kCensusRadius + 1)
    throw std::invalid_argument("census_transform: image smaller than 7x7");

  CensusImage out(img.width, img.height);
  const int w = img.width;
  const uint16_t* px = img.samples.data();
  for (int y = kCensusRadius; y < img.height - kCensusRadius; ++y) {
    for (int x = kCensusRadius; x < w - kCensusRadius; ++x) {
      const uint16_t center = px[size_t(y) * w + x];
      uint64_t code = 0;
      int bit = 0;
      for (int dy = -kCensusRadius; dy <= kCensusRadius; ++dy) {
        const uint16_t* row = px + size_t(y + dy) * w + x;
        for (int dx = -kCensusRadius; dx <= kCensusRadius; ++dx) {
          if (dy == 0 && dx == 0) continue;
          code |= uint64_t(row[dx] < center) << bit;
          ++bit;
        }
      }
      out.codes[size_t(y) * w + x] = code;
    }
  }
  return out;
}

}  // namespace censtereo
