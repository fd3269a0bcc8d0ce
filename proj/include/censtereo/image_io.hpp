// License: Apache 2.0. See LICENSE file in root directory.
#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "censtereo/image.hpp"

namespace censtereo {

// Parse failure for PGM/PFM payloads. `offset` is the byte position in the
// stream where the problem was detected.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, size_t offset)
      : std::runtime_error(what + " (at byte " + std::to_string(offset) + ")"),
        offset_(offset) {}
  size_t offset() const { return offset_; }

 private:
  size_t offset_;
};

namespace detail {

inline void skip_pnm_whitespace(const std::string& buf, size_t& pos) {
  while (pos < buf.size()) {
    char c = buf[pos];
    if (c == '#') {
      while (pos < buf.size() && buf[pos] != '\n') ++pos;
    } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      ++pos;
    } else {
      break;
    }
  }
}

inline long parse_pnm_int(const std::string& buf, size_t& pos, const char* what) {
  skip_pnm_whitespace(buf, pos);
  size_t start = pos;
  long v = 0;
  while (pos < buf.size() && buf[pos] >= '0' && buf[pos] <= '9') {
    v = v * 10 + (buf[pos] - '0');
    if (v > std::numeric_limits<int>::max())
      throw ParseError(std::string(what) + " out of range", start);
    ++pos;
  }
  if (pos == start)
    throw ParseError(std::string("expected ") + what, pos);
  return v;
}

inline std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw std::runtime_error("short write to " + path);
}

inline bool host_is_little_endian() {
  const uint16_t probe = 1;
  uint8_t b;
  std::memcpy(&b, &probe, 1);
  return b == 1;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// PGM (P5). Samples are 1 byte for maxval <= 255, otherwise 2 bytes
// big-endian. maxval maps to bit depth: <=255 -> 8, <=1023 -> 10, else 16.
// ---------------------------------------------------------------------------

inline GrayImage decode_pgm(const std::string& buf,
                            std::optional<int> expect_depth = std::nullopt) {
  size_t pos = 0;
  if (buf.size() < 2 || buf[0] != 'P' || buf[1] != '5')
    throw ParseError("not a P5 PGM", 0);
  pos = 2;
  long w = detail::parse_pnm_int(buf, pos, "width");
  long h = detail::parse_pnm_int(buf, pos, "height");
  long maxval = detail::parse_pnm_int(buf, pos, "maxval");
  if (w <= 0 || h <= 0) throw ParseError("non-positive dimensions", pos);
  if (maxval <= 0 || maxval > 65535) throw ParseError("bad maxval", pos);
  if (pos >= buf.size()) throw ParseError("truncated header", pos);
  ++pos;  // single whitespace byte before the payload

  int depth = maxval <= 255 ? 8 : (maxval <= 1023 ? 10 : 16);
  if (expect_depth && *expect_depth != depth)
    throw std::runtime_error("PGM bit depth mismatch: file has " +
                             std::to_string(depth) + "-bit data, expected " +
                             std::to_string(*expect_depth));

  const size_t n = size_t(w) * size_t(h);
  const int bytes_per = maxval <= 255 ? 1 : 2;
  if (buf.size() - pos < n * bytes_per)
    throw ParseError("truncated payload", buf.size());

  GrayImage img(int(w), int(h), depth);
  const uint8_t* p = reinterpret_cast<const uint8_t*>(buf.data()) + pos;
  if (bytes_per == 1) {
    for (size_t i = 0; i < n; ++i) img.samples[i] = p[i];
  } else {
    for (size_t i = 0; i < n; ++i)
      img.samples[i] = uint16_t((p[2 * i] << 8) | p[2 * i + 1]);
  }
  const uint16_t mv = img.max_value();
  for (size_t i = 0; i < n; ++i)
    if (img.samples[i] > mv)
      throw ParseError("sample exceeds maxval", pos + i * bytes_per);
  return img;
}

inline std::string encode_pgm(const GrayImage& img) {
  std::string out = "P5\n" + std::to_string(img.width) + " " +
                    std::to_string(img.height) + "\n" +
                    std::to_string(int(img.max_value())) + "\n";
  if (img.bit_depth == 8) {
    for (uint16_t s : img.samples) out.push_back(char(s & 0xff));
  } else {
    for (uint16_t s : img.samples) {
      out.push_back(char(s >> 8));
      out.push_back(char(s & 0xff));
    }
  }
  return out;
}

inline GrayImage read_pgm(const std::string& path,
                          std::optional<int> expect_depth = std::nullopt) {
  return decode_pgm(detail::read_file(path), expect_depth);
}

inline void write_pgm(const std::string& path, const GrayImage& img) {
  detail::write_file(path, encode_pgm(img));
}

// Disparity maps round-trip through 16-bit PGM as raw 1/32-px fixed point.
inline void write_disparity_pgm(const std::string& path, const DisparityMap& d) {
  GrayImage img(d.width, d.height, 16);
  img.samples.assign(d.values.begin(), d.values.end());
  write_pgm(path, img);
}

inline DisparityMap read_disparity_pgm(const std::string& path) {
  GrayImage img = read_pgm(path, 16);
  DisparityMap d(img.width, img.height);
  d.values.assign(img.samples.begin(), img.samples.end());
  return d;
}

// ---------------------------------------------------------------------------
// PFM (grayscale "Pf"). Header "Pf\n{w} {h}\n{scale}\n"; negative scale means
// little-endian floats. Rows are stored bottom-to-top.
// ---------------------------------------------------------------------------

inline RealMap decode_pfm(const std::string& buf) {
  if (buf.size() < 2 || buf[0] != 'P' || buf[1] != 'f')
    throw ParseError("not a Pf PFM", 0);
  size_t pos = 2;
  long w = detail::parse_pnm_int(buf, pos, "width");
  long h = detail::parse_pnm_int(buf, pos, "height");
  detail::skip_pnm_whitespace(buf, pos);
  size_t scale_start = pos;
  while (pos < buf.size() && buf[pos] != '\n' && buf[pos] != '\r' &&
         buf[pos] != ' ' && buf[pos] != '\t')
    ++pos;
  if (pos == scale_start) throw ParseError("expected scale", pos);
  double scale = 0;
  try {
    scale = std::stod(buf.substr(scale_start, pos - scale_start));
  } catch (const std::exception&) {
    throw ParseError("bad scale", scale_start);
  }
  if (scale == 0) throw ParseError("zero scale", scale_start);
  if (pos >= buf.size()) throw ParseError("truncated header", pos);
  ++pos;  // single whitespace byte before the payload

  if (w <= 0 || h <= 0) throw ParseError("non-positive dimensions", pos);
  const size_t n = size_t(w) * size_t(h);
  if (buf.size() - pos < n * 4) throw ParseError("truncated payload", buf.size());

  const bool file_le = scale < 0;
  const bool host_le = detail::host_is_little_endian();
  RealMap m{int(w), int(h)};
  const uint8_t* p = reinterpret_cast<const uint8_t*>(buf.data()) + pos;
  for (long row = 0; row < h; ++row) {
    long img_row = h - 1 - row;
    for (long x = 0; x < w; ++x) {
      uint8_t b[4];
      std::memcpy(b, p + (size_t(row) * w + x) * 4, 4);
      if (file_le != host_le) std::swap(b[0], b[3]), std::swap(b[1], b[2]);
      float v;
      std::memcpy(&v, b, 4);
      m.at(int(x), int(img_row)) = v;
    }
  }
  return m;
}

inline std::string encode_pfm(const RealMap& m) {
  std::string out = "Pf\n" + std::to_string(m.width) + " " +
                    std::to_string(m.height) + "\n-1.0\n";
  const bool host_le = detail::host_is_little_endian();
  out.reserve(out.size() + m.size() * 4);
  for (int row = m.height - 1; row >= 0; --row) {
    for (int x = 0; x < m.width; ++x) {
      float v = m.at(x, row);
      uint8_t b[4];
      std::memcpy(b, &v, 4);
      if (!host_le) std::swap(b[0], b[3]), std::swap(b[1], b[2]);
      out.append(reinterpret_cast<char*>(b), 4);
    }
  }
  return out;
}

inline RealMap read_pfm(const std::string& path) {
  return decode_pfm(detail::read_file(path));
}

inline void write_pfm(const std::string& path, const RealMap& m) {
  detail::write_file(path, encode_pfm(m));
}

// Disparity <-> PFM: values in pixels, +inf where invalid.
inline RealMap disparity_to_real(const DisparityMap& d) {
  RealMap m(d.width, d.height);
  for (size_t i = 0; i < d.values.size(); ++i)
    m.values[i] = d.values[i] == kInvalidDisparity
                      ? std::numeric_limits<float>::infinity()
                      : float(d.values[i]) / kDisparityScale;
  return m;
}

inline DisparityMap real_to_disparity(const RealMap& m) {
  DisparityMap d(m.width, m.height);
  for (size_t i = 0; i < m.values.size(); ++i) {
    float v = m.values[i];
    d.values[i] = std::isfinite(v) && v >= 0.f ? float_to_fixed(v)
                                               : kInvalidDisparity;
  }
  return d;
}

inline void write_disparity_pfm(const std::string& path, const DisparityMap& d) {
  write_pfm(path, disparity_to_real(d));
}

}  // namespace censtereo
