// License: Apache 2.0. See LICENSE file in root directory.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "censtereo/image.hpp"

namespace censtereo {

// All three filters only remove or move values between existing valid
// pixels; none of them ever fabricates a disparity where there was none.

struct SpeckleParams {
  int max_region_size = 50;      // components smaller than this are dropped
  double similarity_tol = 1.0;   // adjacency tolerance, pixels of disparity

  void validate() const {
    if (max_region_size <= 0 || !(similarity_tol > 0.0))
      throw std::invalid_argument("SpeckleParams: values must be positive");
  }
};

// Removes small connected components: valid pixels are 4-connected when
// their disparities differ by at most the tolerance; components with fewer
// than max_region_size pixels are invalidated, the rest pass unchanged.
inline DisparityMap speckle_filter(const DisparityMap& d,
                                   const SpeckleParams& p) {
  p.validate();
  const int w = d.width, h = d.height;
  const int tol = int(std::lround(p.similarity_tol * kDisparityScale));
  DisparityMap out = d;
  std::vector<int32_t> label(size_t(w) * h, -1);
  std::vector<size_t> stack;

  int32_t next_label = 0;
  for (int sy = 0; sy < h; ++sy)
    for (int sx = 0; sx < w; ++sx) {
      const size_t seed = size_t(sy) * w + sx;
      if (d.values[seed] == kInvalidDisparity || label[seed] >= 0) continue;
      const int32_t cur = next_label++;
      label[seed] = cur;
      stack.assign(1, seed);
      std::vector<size_t> members;
      while (!stack.empty()) {
        const size_t i = stack.back();
        stack.pop_back();
        members.push_back(i);
        const int x = int(i % w), y = int(i / w);
        const int dv = d.values[i];
        const int nx[4] = {x - 1, x + 1, x, x};
        const int ny[4] = {y, y, y - 1, y + 1};
        for (int k = 0; k < 4; ++k) {
          if (nx[k] < 0 || nx[k] >= w || ny[k] < 0 || ny[k] >= h) continue;
          const size_t j = size_t(ny[k]) * w + nx[k];
          if (label[j] >= 0 || d.values[j] == kInvalidDisparity) continue;
          if (std::abs(int(d.values[j]) - dv) > tol) continue;
          label[j] = cur;
          stack.push_back(j);
        }
      }
      if ((int)members.size() < p.max_region_size)
        for (size_t i : members) out.values[i] = kInvalidDisparity;
    }
  return out;
}

// Median filter over valid neighbors only; invalid pixels are left invalid
// rather than inpainted. Even-sized candidate sets take the lower median.
inline DisparityMap median_filter(const DisparityMap& d, int k) {
  if (k < 1 || k % 2 == 0)
    throw std::invalid_argument("median_filter: window must be odd and >= 1");
  if (k == 1) return d;
  const int r = k / 2;
  DisparityMap out = d;
  std::vector<uint16_t> vals;
  vals.reserve(size_t(k) * k);
  for (int y = 0; y < d.height; ++y)
    for (int x = 0; x < d.width; ++x) {
      if (d.at(x, y) == kInvalidDisparity) continue;
      vals.clear();
      for (int dy = -r; dy <= r; ++dy) {
        if (y + dy < 0 || y + dy >= d.height) continue;
        for (int dx = -r; dx <= r; ++dx) {
          if (x + dx < 0 || x + dx >= d.width) continue;
          const uint16_t v = d.at(x + dx, y + dy);
          if (v != kInvalidDisparity) vals.push_back(v);
        }
      }
      auto mid = vals.begin() + (vals.size() - 1) / 2;  // lower median
      std::nth_element(vals.begin(), mid, vals.end());
      out.at(x, y) = *mid;
    }
  return out;
}

// Rounds valid disparities to the nearest multiple of eps_q, which must lie
// in (0, 1] px and be representable on the 1/32-px grid. Results snap to at
// least one step so a valid pixel can never round into the invalid code.
inline DisparityMap quantize_disparity(const DisparityMap& d, double eps_q) {
  const int q = int(std::lround(eps_q * kDisparityScale));
  if (!(eps_q > 0.0) || eps_q > 1.0 ||
      std::abs(eps_q * kDisparityScale - q) > 1e-9 || q < 1)
    throw std::invalid_argument(
        "quantize_disparity: eps_q must be n/32 within (0, 1]");
  DisparityMap out = d;
  for (uint16_t& v : out.values) {
    if (v == kInvalidDisparity) continue;
    long long m = std::llround(double(v) / q) * q;
    m = std::clamp(m, (long long)q, (long long)kMaxStoredDisparity);
    v = uint16_t(m);
  }
  return out;
}

}  // namespace censtereo
