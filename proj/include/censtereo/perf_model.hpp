// License: Apache 2.0. See LICENSE file in root directory.
#pragma once

#include <cmath>
#include <stdexcept>

namespace censtereo {

// Closed-form predictors for stereo depth error and usable range. All angles
// cross the API in degrees.

struct ErrorModel {
  double eps_d = 0.08;  // disparity RMS, pixels
  double fB = 0.0;      // focal length * baseline, meter*pixels

  void validate() const {
    if (!(eps_d > 0.0) || !(fB > 0.0))
      throw std::invalid_argument("ErrorModel: eps_d and fB must be positive");
  }
};

struct RangeScenario {
  double r95 = 0.0;           // white-wall 95%-fill range, meters
  double albedo = 1.0;        // reflectance fraction (0,1]
  double theta_target = 0.0;  // target tilt, degrees
  double theta_fov = 0.0;     // off-axis angle, degrees

  void validate() const {
    if (!(r95 > 0.0)) throw std::invalid_argument("RangeScenario: r95 must be positive");
    if (!(albedo > 0.0 && albedo <= 1.0))
      throw std::invalid_argument("RangeScenario: albedo outside (0,1]");
    if (theta_target < 0.0 || theta_target >= 90.0 || theta_fov < 0.0 ||
        theta_fov >= 90.0)
      throw std::invalid_argument("RangeScenario: angles outside [0, 90)");
  }
};

inline double deg_to_rad(double deg) { return deg * (M_PI / 180.0); }

struct DepthRms {
  double eps_mm;   // absolute depth RMS at z, meters
  double eps_pct;  // same as a fraction of z
};

// Propagating a constant disparity RMS through z = fB/d gives a depth error
// quadratic in distance (and linear as a fraction of distance).
inline DepthRms depth_rms(double z, const ErrorModel& m) {
  m.validate();
  if (!(z > 0.0)) throw std::invalid_argument("depth_rms: z must be positive");
  const double eps_mm = z * z * m.eps_d / m.fB;
  return DepthRms{eps_mm, eps_mm / z};
}

// Systematic disparity underestimate of the parabola refinement on slanted
// surfaces; defined for d > sqrt(2) where the denominator is positive.
inline double planar_bias(double d) {
  if (!(d > std::sqrt(2.0)))
    throw std::domain_error("planar_bias: requires d > sqrt(2)");
  return -d / (2.0 * d * d - 1.0);
}

// Scales the white-wall range by target reflectance, target tilt, and
// off-axis lens falloff (cos^4 vignetting on the way out and back, minus one
// geometric cosine, hence the seventh power). Square root because range
// enters the photon budget quadratically.
inline double expected_range(const RangeScenario& s) {
  s.validate();
  const double ct = std::cos(deg_to_rad(s.theta_target));
  const double cf = std::cos(deg_to_rad(s.theta_fov));
  return s.r95 * std::sqrt(ct * s.albedo * std::pow(cf, 7.0));
}

// Photon-limited range scaling with exposure time: halving the frame time
// costs sqrt(2) in range.
inline double framerate_range_scale(double r95_ref, double fps_ref, double fps) {
  if (!(r95_ref > 0.0) || !(fps_ref > 0.0) || !(fps > 0.0))
    throw std::invalid_argument("framerate_range_scale: arguments must be positive");
  return r95_ref * std::sqrt(fps_ref / fps);
}

}  // namespace censtereo
