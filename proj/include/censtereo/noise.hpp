// License: Apache 2.0. See LICENSE file in root directory.
#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "censtereo/image.hpp"
#include "censtereo/rng.hpp"

namespace censtereo {

// Sensor-noise model: optical blur (MTF), photon shot noise at a given
// full-well capacity, and additive Gaussian read noise.
struct NoiseParams {
  bool blur_enabled = true;
  bool photon_enabled = true;
  bool read_enabled = true;
  double blur_sigma = 0.6;    // Gaussian kernel std, pixels
  double full_well = 1500.0;  // electrons at saturation
  double read_sigma = 2.0;    // read-noise std, digital numbers
  uint64_t seed = 1;

  void validate() const {
    if (blur_sigma < 0.0 || read_sigma < 0.0 || !(full_well > 0.0))
      throw std::invalid_argument("NoiseParams: negative magnitude");
  }
};

namespace detail {

// Separable Gaussian blur, kernel truncated at 3 sigma, edges replicated.
inline void gaussian_blur(std::vector<double>& img, int w, int h,
                          double sigma) {
  const int radius = int(std::floor(3.0 * sigma));
  if (radius < 1) return;
  std::vector<double> kernel(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    kernel[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
    sum += kernel[i + radius];
  }
  for (double& k : kernel) k /= sum;

  std::vector<double> tmp(img.size());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        int xs = x + i;
        if (xs < 0) xs = 0;
        if (xs >= w) xs = w - 1;
        acc += kernel[i + radius] * img[size_t(y) * w + xs];
      }
      tmp[size_t(y) * w + x] = acc;
    }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        int ys = y + i;
        if (ys < 0) ys = 0;
        if (ys >= h) ys = h - 1;
        acc += kernel[i + radius] * tmp[size_t(ys) * w + x];
      }
      img[size_t(y) * w + x] = acc;
    }
}

}  // namespace detail

// Applies, in order: Gaussian blur, photon noise (intensity scaled to
// electrons, Poisson-sampled, scaled back), additive read noise, then clamp
// and round to the image's bit depth.
//
// Each pixel draws from its own generator seeded with seed XOR pixel index,
// so the result is independent of traversal order and thread count.
inline GrayImage add_sensor_noise(const GrayImage& img, const NoiseParams& p) {
  p.validate();
  const int w = img.width, h = img.height;
  const double maxval = double((1u << img.bit_depth) - 1);

  std::vector<double> work(img.samples.begin(), img.samples.end());
  if (p.blur_enabled && p.blur_sigma > 0.0)
    detail::gaussian_blur(work, w, h, p.blur_sigma);

  GrayImage out(w, h, img.bit_depth);
  for (size_t i = 0; i < work.size(); ++i) {
    Rng rng = pixel_rng(p.seed, uint64_t(i));
    double v = work[i];
    if (p.photon_enabled) {
      const double electrons = v / maxval * p.full_well;
      v = double(rng.poisson(electrons)) / p.full_well * maxval;
    }
    if (p.read_enabled && p.read_sigma > 0.0) v += rng.normal() * p.read_sigma;
    if (v < 0.0) v = 0.0;
    if (v > maxval) v = maxval;
    out.samples[i] = uint16_t(std::llround(v));
  }
  return out;
}

}  // namespace censtereo
