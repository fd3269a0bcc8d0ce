// License: Apache 2.0. See LICENSE file in root directory.
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "censtereo/image.hpp"

namespace censtereo {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

enum class DistortionModel { None, ModifiedBrownConrady };

// Rectified pinhole camera with an optional Brown-Conrady distortion variant
// whose tangential terms act on the radially-corrected coordinates.
struct Intrinsics {
  double fx = 0.0;  // focal lengths, pixels
  double fy = 0.0;
  double cx = 0.0;  // principal point, pixels
  double cy = 0.0;
  double k1 = 0.0;  // radial coefficients (r^2, r^4, r^6)
  double k2 = 0.0;
  double k3 = 0.0;
  double p1 = 0.0;  // tangential coefficients
  double p2 = 0.0;
  DistortionModel model = DistortionModel::None;

  void validate() const {
    if (!(fx > 0.0) || !(fy > 0.0))
      throw std::invalid_argument("Intrinsics: focal lengths must be positive");
  }
};

struct StereoRig {
  Intrinsics intrinsics;  // rectified left camera
  double baseline = 0.0;  // meters
  static constexpr int kNumDisparitiesRig = kNumDisparities;
  static constexpr int kSubpixelBits = 5;

  void validate() const {
    intrinsics.validate();
    if (!(baseline > 0.0))
      throw std::invalid_argument("StereoRig: baseline must be positive");
  }
};

// z = fx * B / d. Disparity is horizontal, so the horizontal focal length is
// the one that matters. Non-positive disparity has no depth: returns +inf.
inline double disparity_to_depth(double d, const StereoRig& rig) {
  if (!(d > 0.0)) return std::numeric_limits<double>::infinity();
  return rig.intrinsics.fx * rig.baseline / d;
}

inline double depth_to_disparity(double z, const StereoRig& rig) {
  if (!(z > 0.0)) return std::numeric_limits<double>::infinity();
  return rig.intrinsics.fx * rig.baseline / z;
}

// Back-projects a rectified pixel with known depth to camera space.
inline Point3 deproject(double x, double y, double z, const Intrinsics& intr) {
  return Point3{(x - intr.cx) * z / intr.fx, (y - intr.cy) * z / intr.fy, z};
}

// Forward distortion on normalized coordinates: even-powered radial factor
// first, then tangential terms evaluated at the radially-corrected point.
inline Vec2 distort_point(const Vec2& p, const Intrinsics& intr) {
  if (intr.model == DistortionModel::None) return p;
  const double r2 = p.x * p.x + p.y * p.y;
  const double rho = 1.0 + r2 * (intr.k1 + r2 * (intr.k2 + r2 * intr.k3));
  const double xr = p.x * rho;
  const double yr = p.y * rho;
  const double rr2 = xr * xr + yr * yr;
  return Vec2{xr + 2.0 * intr.p1 * xr * yr + intr.p2 * (rr2 + 2.0 * xr * xr),
              yr + intr.p1 * (rr2 + 2.0 * yr * yr) + 2.0 * intr.p2 * xr * yr};
}

// Inverse distortion by fixed-point iteration: repeatedly subtract the
// current distortion residual. Ten iterations are plenty for lens-grade
// coefficients; the residual is covered by tests rather than asserted here.
inline Vec2 undistort_point(const Vec2& d, const Intrinsics& intr) {
  Vec2 u = d;
  for (int i = 0; i < 10; ++i) {
    const Vec2 f = distort_point(u, intr);
    u.x -= f.x - d.x;
    u.y -= f.y - d.y;
  }
  return u;
}

// Depth limits implied by the 64-disparity search and 5 fractional bits:
// the largest representable disparity is 63 + 31/32 and the smallest
// non-zero one is 1/32.
inline void operating_range(const StereoRig& rig, double& z_min,
                            double& z_max) {
  rig.validate();
  const double fb = rig.intrinsics.fx * rig.baseline;
  z_min = fb / (kNumDisparities - 1 + 31.0 / 32.0);
  z_max = fb * kDisparityScale;
}

// Deprojects every valid pixel of a fixed-point disparity map.
inline std::vector<Point3> deproject_disparity_map(const DisparityMap& map,
                                                   const StereoRig& rig) {
  rig.validate();
  std::vector<Point3> points;
  points.reserve(size_t(map.width) * map.height);
  for (int y = 0; y < map.height; ++y)
    for (int x = 0; x < map.width; ++x) {
      const uint16_t v = map.at(x, y);
      if (v == kInvalidDisparity) continue;
      const double z = disparity_to_depth(fixed_to_float(v), rig);
      points.push_back(deproject(x, y, z, rig.intrinsics));
    }
  return points;
}

}  // namespace censtereo
