// License: Apache 2.0. See LICENSE file in root directory.
#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace censtereo {

// Disparities are stored as unsigned 16-bit fixed point in 1/32 pixel steps.
// 0 is reserved as the invalid sentinel, so the representable output range
// is [1/32, 63.5] pixels, i.e. stored values [1, 2032].
constexpr int kDisparityFractionBits = 5;
constexpr int kDisparityScale = 1 << kDisparityFractionBits;  // 32
constexpr int kNumDisparities = 64;
constexpr uint16_t kInvalidDisparity = 0;
constexpr uint16_t kMaxStoredDisparity =
    (kNumDisparities - 1) * kDisparityScale + kDisparityScale / 2;  // 2032

inline double fixed_to_float(uint16_t v) {
  return static_cast<double>(v) / kDisparityScale;
}

// Rounds to the nearest 1/32 pixel. A result of 0 is clamped to 1 so that a
// true (tiny) disparity is never confused with the invalid sentinel.
inline uint16_t float_to_fixed(double d) {
  long v = std::lround(d * kDisparityScale);
  if (v < 1) v = 1;
  if (v > kMaxStoredDisparity) v = kMaxStoredDisparity;
  return static_cast<uint16_t>(v);
}

namespace detail {
// Validates dimensions before any allocation can run away on negatives.
inline size_t checked_pixel_count(int w, int h, const char* what) {
  if (w <= 0 || h <= 0)
    throw std::invalid_argument(std::string(what) + ": non-positive dimensions");
  return size_t(w) * size_t(h);
}
}  // namespace detail

// Rectified monochrome raster. 8/10/16-bit samples live in uint16 containers;
// 10-bit data is kept unshifted since the matcher only compares sample order.
struct GrayImage {
  int width = 0;
  int height = 0;
  int bit_depth = 8;
  std::vector<uint16_t> samples;

  GrayImage() = default;
  GrayImage(int w, int h, int depth, uint16_t fill = 0)
      : width(w), height(h), bit_depth(depth),
        samples(detail::checked_pixel_count(w, h, "GrayImage"), fill) {
    check_shape();
    if (fill > max_value())
      throw std::invalid_argument("GrayImage: fill exceeds bit depth");
  }
  GrayImage(int w, int h, int depth, std::vector<uint16_t> data)
      : width(w), height(h), bit_depth(depth), samples(std::move(data)) {
    detail::checked_pixel_count(w, h, "GrayImage");
    check_shape();
    validate();
  }

  // Re-checks sample count and range; for callers that mutate `samples`.
  void validate() const {
    if (samples.size() != size_t(width) * height)
      throw std::invalid_argument("GrayImage: sample count != width*height");
    const uint16_t mv = max_value();
    for (uint16_t s : samples)
      if (s > mv) throw std::invalid_argument("GrayImage: sample exceeds bit depth");
  }

  uint16_t max_value() const {
    return static_cast<uint16_t>((1u << bit_depth) - 1);
  }
  uint16_t at(int x, int y) const { return samples[size_t(y) * width + x]; }
  uint16_t& at(int x, int y) { return samples[size_t(y) * width + x]; }
  size_t size() const { return samples.size(); }

 private:
  void check_shape() const {
    if (width <= 0 || height <= 0)
      throw std::invalid_argument("GrayImage: non-positive dimensions");
    if (bit_depth != 8 && bit_depth != 10 && bit_depth != 16)
      throw std::invalid_argument("GrayImage: bit depth must be 8, 10 or 16");
  }
};

// Fixed-point disparity raster, 1/32 pixel units, 0 = invalid.
struct DisparityMap {
  int width = 0;
  int height = 0;
  std::vector<uint16_t> values;

  DisparityMap() = default;
  DisparityMap(int w, int h, uint16_t fill = kInvalidDisparity)
      : width(w), height(h),
        values(detail::checked_pixel_count(w, h, "DisparityMap"), fill) {}

  uint16_t at(int x, int y) const { return values[size_t(y) * width + x]; }
  uint16_t& at(int x, int y) { return values[size_t(y) * width + x]; }
  bool valid(int x, int y) const { return at(x, y) != kInvalidDisparity; }
  double pixels(int x, int y) const { return fixed_to_float(at(x, y)); }
  size_t size() const { return values.size(); }
};

// Real-valued disparity raster used for ground truth; +inf marks invalid.
struct RealMap {
  int width = 0;
  int height = 0;
  std::vector<float> values;

  RealMap() = default;
  RealMap(int w, int h, float fill = 0.f)
      : width(w), height(h),
        values(detail::checked_pixel_count(w, h, "RealMap"), fill) {}

  float at(int x, int y) const { return values[size_t(y) * width + x]; }
  float& at(int x, int y) { return values[size_t(y) * width + x]; }
  size_t size() const { return values.size(); }
};

// One boolean per pixel. Byte-backed for cheap random access.
struct ValidityMask {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> bits;

  ValidityMask() = default;
  ValidityMask(int w, int h, bool fill = false)
      : width(w), height(h),
        bits(detail::checked_pixel_count(w, h, "ValidityMask"), fill ? 1 : 0) {}

  bool at(int x, int y) const { return bits[size_t(y) * width + x] != 0; }
  void set(int x, int y, bool v) { bits[size_t(y) * width + x] = v ? 1 : 0; }
  size_t count() const {
    size_t n = 0;
    for (uint8_t b : bits) n += b;
    return n;
  }
};

}  // namespace censtereo
