// License: Apache 2.0. See LICENSE file in root directory.
#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "censtereo/cost_volume.hpp"
#include "censtereo/image.hpp"

namespace censtereo {

// Winner statistics for one pixel. c2 is the best cost at least 2 disparities
// away from the winner; c_prev/c_next are the immediate neighbors. Absent
// entries hold kCostOutOfRange.
struct MatchStats {
  bool matched = false;
  int best_d = 0;
  uint16_t c1 = kCostOutOfRange;
  uint16_t c2 = kCostOutOfRange;
  uint16_t c_prev = kCostOutOfRange;
  uint16_t c_next = kCostOutOfRange;
  float subpixel_offset = 0.f;
};

struct MatchStatsImage {
  int width = 0;
  int height = 0;
  std::vector<MatchStats> stats;

  MatchStatsImage() = default;
  MatchStatsImage(int w, int h) : width(w), height(h), stats(size_t(w) * h) {}

  const MatchStats& at(int x, int y) const {
    return stats[size_t(y) * width + x];
  }
  MatchStats& at(int x, int y) { return stats[size_t(y) * width + x]; }
};

struct WtaResult {
  MatchStatsImage stats;
  DisparityMap disparity;  // raw output, before any interest operator
};

// Equal-cost candidates resolve to the smaller disparity (the farther
// surface). Subpixel offset from the parabola through the winner and its
// neighbors; degenerate fits (missing neighbor, non-positive curvature)
// fall back to the integer position.
inline WtaResult wta_subpixel(const CostVolume& vol) {
  WtaResult res{MatchStatsImage(vol.width, vol.height),
                DisparityMap(vol.width, vol.height)};
  const int y_lo = kMatchBorder, y_hi = vol.height - kMatchBorder - 1;
  const int x_hi = vol.width - kMatchBorder - 1;
  for (int y = y_lo; y <= y_hi; ++y) {
    for (int x = kMatchBorder; x <= x_hi; ++x) {
      const uint16_t* costs = vol.pixel_costs(x, y);
      const int d_max = vol.max_candidate(x);
      if (d_max < 0) continue;

      int best = 0;
      uint16_t c1 = costs[0];
      for (int d = 1; d <= d_max; ++d)
        if (costs[d] < c1) {
          c1 = costs[d];
          best = d;
        }
      if (c1 == kCostOutOfRange) continue;  // no usable candidate at all

      uint16_t c2 = kCostOutOfRange;
      for (int d = 0; d <= d_max; ++d) {
        if (d >= best - 1 && d <= best + 1) continue;
        if (costs[d] < c2) c2 = costs[d];
      }
      const uint16_t c_prev = best > 0 ? costs[best - 1] : kCostOutOfRange;
      const uint16_t c_next = best < d_max ? costs[best + 1] : kCostOutOfRange;

      double delta = 0.0;
      if (c_prev != kCostOutOfRange && c_next != kCostOutOfRange) {
        const int denom = 2 * (int(c_prev) - 2 * int(c1) + int(c_next));
        if (denom > 0) {
          delta = double(int(c_prev) - int(c_next)) / denom;
          if (delta < -0.5) delta = -0.5;
          if (delta > 0.5) delta = 0.5;
        }
      }

      MatchStats& s = res.stats.at(x, y);
      s.matched = true;
      s.best_d = best;
      s.c1 = c1;
      s.c2 = c2;
      s.c_prev = c_prev;
      s.c_next = c_next;
      s.subpixel_offset = float(delta);
      res.disparity.at(x, y) = float_to_fixed(best + delta);
    }
  }
  return res;
}

// Right-view winner-take-all over the same volume: at right column x the
// candidate left pixel for disparity d is x + d. Integer precision, encoded
// in the usual 1/32 fixed point (d = 0 stores 1, the smallest valid value).
inline DisparityMap right_disparity(const CostVolume& vol) {
  DisparityMap out(vol.width, vol.height);
  const int y_lo = kMatchBorder, y_hi = vol.height - kMatchBorder - 1;
  const int x_hi = vol.width - kMatchBorder - 1;
  for (int y = y_lo; y <= y_hi; ++y) {
    for (int x = kMatchBorder; x <= x_hi; ++x) {
      int d_max = x_hi - x;
      if (d_max > CostVolume::num_disparities - 1)
        d_max = CostVolume::num_disparities - 1;
      int best = -1;
      uint16_t best_cost = kCostOutOfRange;
      for (int d = 0; d <= d_max; ++d) {
        const uint16_t c = vol.cost(x + d, y, d);
        if (c < best_cost) {
          best_cost = c;
          best = d;
        }
      }
      if (best >= 0) out.at(x, y) = float_to_fixed(double(best));
    }
  }
  return out;
}

// Decodes a right_disparity() entry back to its integer disparity.
inline int decoded_right_disparity(uint16_t stored) {
  return int((stored + kDisparityScale / 2) / kDisparityScale);
}

}  // namespace censtereo
