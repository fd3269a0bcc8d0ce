// License: Apache 2.0. See LICENSE file in root directory.
#pragma once

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "censtereo/census.hpp"
#include "censtereo/image.hpp"

namespace censtereo {

constexpr int kAggRadius = 3;  // 7x7 box aggregation
constexpr uint16_t kCostOutOfRange = 65535;
// Census margin plus aggregation radius: pixels closer than this to the frame
// edge never get a fully-defined aggregated cost.
constexpr int kMatchBorder = kCensusRadius + kAggRadius;  // 6
constexpr uint16_t kMaxAggCost = kCensusBits * 49;        // 2352

// W x H x 64 aggregated Hamming costs, pixel-major ((y*W + x)*64 + d) so the
// per-pixel disparity scan is contiguous. Candidates whose 7x7 support would
// read an undefined Census code carry kCostOutOfRange.
struct CostVolume {
  int width = 0;
  int height = 0;
  static constexpr int num_disparities = kNumDisparities;
  std::vector<uint16_t> agg_costs;

  CostVolume() = default;
  CostVolume(int w, int h)
      : width(w),
        height(h),
        agg_costs(size_t(w) * h * num_disparities, kCostOutOfRange) {}

  uint16_t cost(int x, int y, int d) const {
    return agg_costs[(size_t(y) * width + x) * num_disparities + d];
  }
  const uint16_t* pixel_costs(int x, int y) const {
    return agg_costs.data() + (size_t(y) * width + x) * num_disparities;
  }
  bool in_range(int x, int y, int d) const {
    return x >= kMatchBorder + d && x < width - kMatchBorder &&
           y >= kMatchBorder && y < height - kMatchBorder;
  }
  // Largest candidate disparity with a fully-defined window at column x.
  int max_candidate(int x) const {
    int m = x - kMatchBorder;
    return m > num_disparities - 1 ? num_disparities - 1 : m;
  }
};

// Aggregated cost(x,y,d) = sum of Hamming(left(x+j, y+i), right(x+j-d, y+i))
// over the 7x7 window. Runs one disparity plane at a time with incremental
// column/row sums; the result is bit-identical to direct 49-term summation.
inline CostVolume build_cost_volume(const CensusImage& left,
                                    const CensusImage& right) {
  if (left.width != right.width || left.height != right.height)
    throw std::invalid_argument("build_cost_volume: dimension mismatch");
  const int w = left.width;
  const int h = left.height;
  CostVolume vol(w, h);
  if (w < 2 * kMatchBorder + 1 || h < 2 * kMatchBorder + 1) return vol;

  const int cr = kCensusRadius;
  const int y_lo = kMatchBorder, y_hi = h - kMatchBorder - 1;
  std::vector<uint8_t> raw(size_t(w) * h);        // per-pixel Hamming, <= 48
  std::vector<uint16_t> colsum(size_t(w) * h);    // 7-row column sums, <= 336

  const int d_max =
      CostVolume::num_disparities - 1 < w - 2 * kMatchBorder - 1
          ? CostVolume::num_disparities - 1
          : w - 2 * kMatchBorder - 1;
  for (int d = 0; d <= d_max; ++d) {
    const int x_lo = kMatchBorder + d, x_hi = w - kMatchBorder - 1;

    // Raw Hamming plane over the rows/columns this disparity can touch.
    for (int y = cr; y <= h - cr - 1; ++y) {
      const uint64_t* lrow = left.codes.data() + size_t(y) * w;
      const uint64_t* rrow = right.codes.data() + size_t(y) * w;
      uint8_t* out = raw.data() + size_t(y) * w;
      for (int x = x_lo - cr; x <= x_hi + cr; ++x)
        out[x] = uint8_t(std::popcount(lrow[x] ^ rrow[x - d]));
    }

    // Vertical 7-tap sums, rolled down the rows.
    {
      uint16_t* cs = colsum.data() + size_t(y_lo) * w;
      for (int x = x_lo - cr; x <= x_hi + cr; ++x) {
        uint16_t s = 0;
        for (int i = -cr; i <= cr; ++i) s += raw[size_t(y_lo + i) * w + x];
        cs[x] = s;
      }
      for (int y = y_lo + 1; y <= y_hi; ++y) {
        const uint8_t* up = raw.data() + size_t(y - cr - 1) * w;
        const uint8_t* dn = raw.data() + size_t(y + cr) * w;
        const uint16_t* prev = colsum.data() + size_t(y - 1) * w;
        uint16_t* cur = colsum.data() + size_t(y) * w;
        for (int x = x_lo - cr; x <= x_hi + cr; ++x)
          cur[x] = uint16_t(prev[x] + dn[x] - up[x]);
      }
    }

    // Horizontal 7-tap sums, rolled along each row, scattered into the volume.
    for (int y = y_lo; y <= y_hi; ++y) {
      const uint16_t* cs = colsum.data() + size_t(y) * w;
      uint16_t run = 0;
      for (int j = -cr; j <= cr; ++j) run += cs[x_lo + j];
      uint16_t* vrow = vol.agg_costs.data() + size_t(y) * w * 64;
      vrow[size_t(x_lo) * 64 + d] = run;
      for (int x = x_lo + 1; x <= x_hi; ++x) {
        run = uint16_t(run + cs[x + cr] - cs[x - cr - 1]);
        vrow[size_t(x) * 64 + d] = run;
      }
    }
  }
  return vol;
}

}  // namespace censtereo
