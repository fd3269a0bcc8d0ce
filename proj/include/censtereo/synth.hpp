// License: Apache 2.0. See LICENSE file in root directory.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "censtereo/camera.hpp"
#include "censtereo/image.hpp"
#include "censtereo/rng.hpp"

namespace censtereo {

namespace detail {

// Continuous random-dot texture: a sum of Gaussian bumps with random centers
// and signed amplitudes, evaluated analytically so both views sample the
// exact same function. Dots are truncated at 4 sigma (the tail is far below
// one quantization step) and binned into a grid for lookup.
class DotField {
 public:
  DotField(double u0, double u1, double v0, double v1,
           double density_per_100px2, double sigma, double contrast,
           uint64_t seed)
      : u0_(u0), v0_(v0), sigma_(sigma), cutoff_(4.0 * sigma) {
    const double area = (u1 - u0) * (v1 - v0);
    const long long n_dots = std::llround(density_per_100px2 * area / 100.0);
    cell_ = cutoff_;
    cols_ = std::max(1, int(std::ceil((u1 - u0) / cell_)));
    rows_ = std::max(1, int(std::ceil((v1 - v0) / cell_)));
    grid_.resize(size_t(cols_) * rows_);

    Rng rng(seed);
    dots_.reserve(size_t(n_dots));
    for (long long i = 0; i < n_dots; ++i) {
      Dot d;
      d.u = u0 + rng.uniform() * (u1 - u0);
      d.v = v0 + rng.uniform() * (v1 - v0);
      // amplitude in +-[0.5, 1.0] * contrast: every dot carries real signal
      const double mag = contrast * (0.5 + 0.5 * rng.uniform());
      d.amp = rng.uniform() < 0.5 ? -mag : mag;
      dots_.push_back(d);
      grid_[cell_index(d.u, d.v)].push_back(uint32_t(dots_.size() - 1));
    }
  }

  double operator()(double u, double v) const {
    const int ci_lo = cell_col(u - cutoff_), ci_hi = cell_col(u + cutoff_);
    const int cj_lo = cell_row(v - cutoff_), cj_hi = cell_row(v + cutoff_);
    const double inv2s2 = 1.0 / (2.0 * sigma_ * sigma_);
    const double c2 = cutoff_ * cutoff_;
    double acc = 0.0;
    for (int cj = cj_lo; cj <= cj_hi; ++cj)
      for (int ci = ci_lo; ci <= ci_hi; ++ci)
        for (uint32_t idx : grid_[size_t(cj) * cols_ + ci]) {
          const Dot& d = dots_[idx];
          const double du = u - d.u, dv = v - d.v;
          const double r2 = du * du + dv * dv;
          if (r2 > c2) continue;
          acc += d.amp * std::exp(-r2 * inv2s2);
        }
    return acc;
  }

 private:
  struct Dot {
    double u, v, amp;
  };

  int cell_col(double u) const {
    return std::clamp(int(std::floor((u - u0_) / cell_)), 0, cols_ - 1);
  }
  int cell_row(double v) const {
    return std::clamp(int(std::floor((v - v0_) / cell_)), 0, rows_ - 1);
  }
  size_t cell_index(double u, double v) const {
    return size_t(cell_row(v)) * cols_ + cell_col(u);
  }

  double u0_, v0_, sigma_, cutoff_, cell_;
  int cols_, rows_;
  std::vector<Dot> dots_;
  std::vector<std::vector<uint32_t>> grid_;
};

}  // namespace detail

// A planar scene: either a fronto-parallel plane at depth z0 (converted to a
// constant disparity through the rig) or an explicit disparity ramp
// d(x,y) = a + b*x + c*y in left-image coordinates.
struct PlaneScene {
  StereoRig rig;
  int width = 480;
  int height = 360;
  int bit_depth = 10;
  bool use_depth = false;
  double z0 = 1.0;  // meters, used when use_depth
  double a = 20.0;  // ramp coefficients, pixels
  double b = 0.0;
  double c = 0.0;
  double dot_density = 8.0;  // dots per 100 px^2
  double dot_radius = 1.2;   // Gaussian sigma, pixels
  double contrast = 120.0;   // digital numbers
  uint64_t seed = 1;

  // Ramp coefficients in the left frame (resolving z0 if requested).
  void ramp(double& ra, double& rb, double& rc) const {
    if (use_depth) {
      ra = depth_to_disparity(z0, rig);
      rb = rc = 0.0;
    } else {
      ra = a;
      rb = b;
      rc = c;
    }
  }

  void validate() const {
    if (width < 16 || height < 16)
      throw std::invalid_argument("PlaneScene: resolution below 16x16");
    if (bit_depth != 8 && bit_depth != 10 && bit_depth != 16)
      throw std::invalid_argument("PlaneScene: unsupported bit depth");
    if (!(dot_density > 0.0) || !(dot_radius > 0.0) || !(contrast > 0.0))
      throw std::invalid_argument("PlaneScene: dot parameters must be positive");
    if (use_depth) {
      rig.validate();
      if (!(z0 > 0.0)) throw std::invalid_argument("PlaneScene: z0 must be positive");
      return;
    }
    if (!(b < 1.0))
      throw std::invalid_argument("PlaneScene: ramp slope b must be < 1");
    double ra, rb, rc;
    ramp(ra, rb, rc);
    // linear in x and y: checking the corners bounds the whole image
    const double corners[4] = {ra, ra + rb * (width - 1), ra + rc * (height - 1),
                               ra + rb * (width - 1) + rc * (height - 1)};
    for (double d : corners)
      if (!(d >= 0.0) || !std::isfinite(d))
        throw std::invalid_argument("PlaneScene: disparity must be finite and >= 0");
  }
};

struct ScenePair {
  GrayImage left;
  GrayImage right;
  RealMap gt;        // left-frame disparity, exact
  bool below_min_z;  // true when the scene exceeds the search range
};

// Renders the pair by sampling one continuous texture from both viewpoints.
// The texture is parameterized by left-image coordinates, so the left view is
// T(x,y) directly and the right view samples T at x plus the disparity seen
// from the right frame; for the ramp d(x,y) = a + b*x + c*y that is
// (a + b*x + c*y)/(1 - b), which makes the left-frame ground truth the ramp
// itself with zero resampling error (for constant d the two frames agree).
inline ScenePair render_plane_pair(const PlaneScene& s) {
  s.validate();
  double a, b, c;
  s.ramp(a, b, c);

  const int w = s.width, h = s.height;
  const double inv1mb = 1.0 / (1.0 - b);
  double dr_max = 0.0;
  for (int cy = 0; cy <= 1; ++cy)
    for (int cx = 0; cx <= 1; ++cx) {
      const double dr =
          (a + b * (cx * (w - 1)) + c * (cy * (h - 1))) * inv1mb;
      dr_max = std::max(dr_max, dr);
    }

  const double pad = 4.0 * s.dot_radius + 1.0;
  const detail::DotField field(-pad, w - 1 + dr_max + pad, -pad, h - 1 + pad,
                               s.dot_density, s.dot_radius, s.contrast, s.seed);

  const double maxval = double((1u << s.bit_depth) - 1);
  const double base = 0.5 * maxval;
  auto sample = [&](double u, double v) -> uint16_t {
    double val = base + field(u, v);
    if (val < 0.0) val = 0.0;
    if (val > maxval) val = maxval;
    return uint16_t(std::llround(val));
  };

  ScenePair out{GrayImage(w, h, s.bit_depth), GrayImage(w, h, s.bit_depth),
                RealMap(w, h), false};
  double d_max = 0.0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      out.left.at(x, y) = sample(x, y);
      out.right.at(x, y) = sample(x + (a + b * x + c * y) * inv1mb, y);
      const double d = a + b * x + c * y;
      out.gt.at(x, y) = float(d);
      d_max = std::max(d_max, d);
    }
  out.below_min_z = d_max > fixed_to_float(kMaxStoredDisparity);
  return out;
}

}  // namespace censtereo
