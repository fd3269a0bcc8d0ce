// License: Apache 2.0. See LICENSE file in root directory.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "censtereo/image.hpp"
#include "censtereo/matcher.hpp"

namespace censtereo {

// The seven per-pixel confidence tests. A pixel must pass every enabled test
// to stay valid; the filters only remove matches, they never add any.
struct Thresholds {
  // (a) minimum matching score: reject c1 < min_score (flags windows where
  //     everything matches everything, e.g. a blank wall with no texture).
  bool min_score_enabled = false;
  int min_score = 0;
  // (b) maximum matching score: reject c1 > max_score.
  bool max_score_enabled = false;
  int max_score = kMaxAggCost;
  // (c) left-right threshold, in 1/32-pixel units.
  bool lr_enabled = false;
  int lr_max = 2 * kDisparityScale;
  // (d) neighbor threshold: min(c_prev, c_next) - c1 must reach this.
  bool neighbor_enabled = false;
  int neighbor_min = 0;
  // (e) second-peak threshold: c2 - c1 must reach this.
  bool second_peak_enabled = false;
  int second_peak_min = 0;
  // (f) texture threshold: at least N window pixels differing from the
  //     center by more than texture_diff.
  bool texture_enabled = false;
  int texture_count_min = 0;
  int texture_diff = 0;
  // (g) median threshold: reject c1 above a stochastic percentile estimate
  //     of the frame's winning costs plus median_offset.
  bool median_enabled = false;
  int median_offset = 0;
  double median_percentile = 0.5;
  double median_step = 16.0;

  void validate() const {
    if (min_score > max_score)
      throw std::invalid_argument("Thresholds: min_score > max_score");
    if (min_score < 0 || lr_max < 0 || neighbor_min < 0 ||
        second_peak_min < 0 || texture_count_min < 0 || texture_diff < 0 ||
        median_offset < 0)
      throw std::invalid_argument("Thresholds: negative threshold");
    if (!(median_percentile > 0.0 && median_percentile < 1.0))
      throw std::invalid_argument("Thresholds: percentile outside (0,1)");
    if (median_step <= 0.0)
      throw std::invalid_argument("Thresholds: non-positive median step");
  }
};

// One step of the stochastic percentile tracker (Robbins-Monro): the estimate
// moves up by eta*p when the observation exceeds it and down by eta*(1-p)
// otherwise; ties count as not-greater.
inline double median_tracker_update(double m, double c, double p, double eta) {
  return m + eta * ((c > m ? 1.0 : 0.0) - (1.0 - p));
}

// Applies every enabled test. The base mask is the set of pixels the
// winner-take-all stage matched at all; with all operators disabled the
// output equals that set.
//
// The percentile tracker runs over matched pixels in raster order, starting
// from zero each frame; each pixel is tested against the estimate before its
// own cost is folded in, and the estimate is floored at zero (costs are
// nonnegative, so the tracked percentile is too).
inline ValidityMask evaluate_validity(const MatchStatsImage& stats,
                                      const GrayImage& left_img,
                                      const DisparityMap& right_map,
                                      const Thresholds& th) {
  if (stats.width != left_img.width || stats.height != left_img.height)
    throw std::invalid_argument("evaluate_validity: image dimension mismatch");
  if (th.lr_enabled &&
      (right_map.width != stats.width || right_map.height != stats.height))
    throw std::invalid_argument("evaluate_validity: right map dimension mismatch");
  th.validate();

  ValidityMask mask(stats.width, stats.height, false);
  double median_est = 0.0;

  for (int y = 0; y < stats.height; ++y) {
    for (int x = 0; x < stats.width; ++x) {
      const MatchStats& s = stats.at(x, y);
      if (!s.matched) continue;

      bool ok = true;
      if (th.min_score_enabled && s.c1 < th.min_score) ok = false;
      if (ok && th.max_score_enabled && s.c1 > th.max_score) ok = false;

      if (ok && th.lr_enabled) {
        const int xr = x - s.best_d;
        const uint16_t rv = xr >= 0 ? right_map.at(xr, y) : kInvalidDisparity;
        if (rv == kInvalidDisparity) {
          ok = false;
        } else {
          const int rd = decoded_right_disparity(rv);
          if (std::abs(s.best_d - rd) * kDisparityScale > th.lr_max) ok = false;
        }
      }

      if (ok && th.neighbor_enabled) {
        int nb = kCostOutOfRange;
        if (s.c_prev != kCostOutOfRange) nb = s.c_prev;
        if (s.c_next != kCostOutOfRange && s.c_next < nb) nb = s.c_next;
        if (nb == kCostOutOfRange || nb - int(s.c1) < th.neighbor_min)
          ok = false;
      }

      if (ok && th.second_peak_enabled &&
          (s.c2 == kCostOutOfRange || int(s.c2) - int(s.c1) < th.second_peak_min))
        ok = false;

      if (ok && th.texture_enabled) {
        const int center = left_img.at(x, y);
        int count = 0;
        // window clipped at the frame; matched pixels always have the full
        // 7x7 available, but hand-built stats may not
        const int dy0 = std::max(-kCensusRadius, -y);
        const int dy1 = std::min(kCensusRadius, stats.height - 1 - y);
        const int dx0 = std::max(-kCensusRadius, -x);
        const int dx1 = std::min(kCensusRadius, stats.width - 1 - x);
        for (int dy = dy0; dy <= dy1; ++dy)
          for (int dx = dx0; dx <= dx1; ++dx) {
            if (dy == 0 && dx == 0) continue;
            if (std::abs(int(left_img.at(x + dx, y + dy)) - center) >
                th.texture_diff)
              ++count;
          }
        if (count < th.texture_count_min) ok = false;
      }

      if (th.median_enabled) {
        if (ok && s.c1 > median_est + th.median_offset) ok = false;
        median_est = median_tracker_update(median_est, s.c1,
                                           th.median_percentile, th.median_step);
        if (median_est < 0.0) median_est = 0.0;
      }

      if (ok) mask.set(x, y, true);
    }
  }
  return mask;
}

// ---------------------------------------------------------------------------
// Presets. Off returns everything the correlator matched; Low/Medium/High
// enable progressively more operators with progressively stricter values,
// trading data density for fewer false matches. The numbers are tuned on the
// synthetic test scenes shipped with this project.
// ---------------------------------------------------------------------------

enum class PresetName { Off, Low, Medium, High };

inline Thresholds preset_thresholds(PresetName name) {
  Thresholds t;
  switch (name) {
    case PresetName::Off:
      return t;
    case PresetName::Low:
      t.max_score_enabled = true;
      t.max_score = 2000;
      t.lr_enabled = true;
      t.lr_max = 48;  // winner within +-1 integer disparity
      t.second_peak_enabled = true;
      t.second_peak_min = 4;
      return t;
    case PresetName::Medium:
      t.max_score_enabled = true;
      t.max_score = 1000;
      t.lr_enabled = true;
      t.lr_max = 32;
      t.second_peak_enabled = true;
      t.second_peak_min = 96;
      t.texture_enabled = true;
      t.texture_count_min = 3;
      t.texture_diff = 3;
      t.median_enabled = true;
      t.median_offset = 640;
      return t;
    case PresetName::High:
      t.min_score_enabled = true;
      t.min_score = 1;
      t.max_score_enabled = true;
      t.max_score = 800;
      t.lr_enabled = true;
      t.lr_max = 16;  // exact integer agreement
      t.neighbor_enabled = true;
      t.neighbor_min = 2;
      t.second_peak_enabled = true;
      t.second_peak_min = 256;
      t.texture_enabled = true;
      t.texture_count_min = 6;
      t.texture_diff = 6;
      t.median_enabled = true;
      t.median_offset = 448;
      return t;
  }
  throw std::invalid_argument("preset_thresholds: unknown preset");
}

inline PresetName preset_from_string(const std::string& s) {
  if (s == "off" || s == "Off") return PresetName::Off;
  if (s == "low" || s == "Low") return PresetName::Low;
  if (s == "medium" || s == "Medium") return PresetName::Medium;
  if (s == "high" || s == "High") return PresetName::High;
  throw std::invalid_argument("unknown preset: " + s);
}

inline const char* preset_to_string(PresetName p) {
  switch (p) {
    case PresetName::Off: return "off";
    case PresetName::Low: return "low";
    case PresetName::Medium: return "medium";
    case PresetName::High: return "high";
  }
  return "?";
}

}  // namespace censtereo
