// License: Apache 2.0. See LICENSE file in root directory.
#pragma once

#include <stdexcept>
#include <utility>

#include "censtereo/census.hpp"
#include "censtereo/cost_volume.hpp"
#include "censtereo/image.hpp"
#include "censtereo/interest.hpp"
#include "censtereo/matcher.hpp"

namespace censtereo {

// Full correlation result: the masked disparity map plus the intermediate
// products, for callers that want to inspect scores or the pre-filter map.
struct MatchResult {
  DisparityMap disparity;       // validity-filtered, 1/32-pixel units
  DisparityMap raw_disparity;   // before confidence filtering
  ValidityMask validity;
  MatchStatsImage stats;
};

// The whole pipeline: census transform both views, build the aggregated
// Hamming cost volume, pick winners with subpixel interpolation, then strike
// out pixels that fail the enabled confidence tests.
inline MatchResult match_stereo(const GrayImage& left, const GrayImage& right,
                                const Thresholds& th) {
  if (left.width != right.width || left.height != right.height)
    throw std::invalid_argument("match_stereo: image dimension mismatch");
  if (left.width < 16 || left.height < 16)
    throw std::invalid_argument("match_stereo: images must be at least 16x16");
  th.validate();

  const CensusImage cl = census_transform(left);
  const CensusImage cr = census_transform(right);
  const CostVolume vol = build_cost_volume(cl, cr);

  WtaResult wta = wta_subpixel(vol);

  // The right-view map is only needed by the left-right check.
  DisparityMap right_map(left.width, left.height);
  if (th.lr_enabled) right_map = right_disparity(vol);

  ValidityMask mask = evaluate_validity(wta.stats, left, right_map, th);

  DisparityMap filtered = wta.disparity;
  for (int y = 0; y < filtered.height; ++y)
    for (int x = 0; x < filtered.width; ++x)
      if (!mask.at(x, y)) filtered.at(x, y) = kInvalidDisparity;

  return MatchResult{std::move(filtered), std::move(wta.disparity),
                     std::move(mask), std::move(wta.stats)};
}

inline MatchResult match_stereo(const GrayImage& left, const GrayImage& right,
                                PresetName preset) {
  return match_stereo(left, right, preset_thresholds(preset));
}

}  // namespace censtereo
