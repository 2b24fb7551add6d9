/*
 * Image representation, deterministic PPM/PGM I/O and raster operations.
 *
 * Licensed under the terms of the Apache 2.0 License.
 * See LICENSE file in the project root for terms.
 */
#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>
#include <vector>

#include "ganbench/errors.hpp"

namespace ganbench {

/// Real-valued raster. Samples are row-major and channel-interleaved,
/// nominally in [0,255]; intermediate results of filters may leave that
/// range and are clamped only where an operation's contract says so.
struct ImageBuffer {
  int width = 0;
  int height = 0;
  int channels = 1;  // 1 (gray) or 3 (RGB)
  std::vector<double> samples;

  ImageBuffer() = default;
  ImageBuffer(int w, int h, int c, double fill = 0.0)
      : width(w), height(h), channels(c),
        samples(static_cast<std::size_t>(w) * h * c, fill) {
    if (w <= 0 || h <= 0 || (c != 1 && c != 3))
      throw InvalidInput("ImageBuffer: bad shape " + std::to_string(w) + "x" +
                         std::to_string(h) + "x" + std::to_string(c));
  }

  double& at(int x, int y, int c) {
    return samples[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  double at(int x, int y, int c) const {
    return samples[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }

  bool same_shape(const ImageBuffer& o) const {
    return width == o.width && height == o.height && channels == o.channels;
  }
};

// ---------------------------------------------------------------------------
// PPM (P6) / PGM (P5) I/O, maxval 255, binary payload.
// ---------------------------------------------------------------------------

namespace detail {

inline std::string next_header_token(const std::string& data, std::size_t& pos) {
  while (pos < data.size() && std::isspace(static_cast<unsigned char>(data[pos])))
    ++pos;
  std::size_t start = pos;
  while (pos < data.size() && !std::isspace(static_cast<unsigned char>(data[pos])))
    ++pos;
  if (start == pos) throw FormatError("image header: truncated before token");
  return data.substr(start, pos - start);
}

inline int parse_header_int(const std::string& tok, const char* what) {
  std::size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(tok, &used);
  } catch (const std::exception&) {
    throw FormatError(std::string("image header: ") + what + " is not a number: '" + tok + "'");
  }
  if (used != tok.size() || v <= 0)
    throw FormatError(std::string("image header: bad ") + what + " '" + tok + "'");
  return v;
}

}  // namespace detail

/// Loads a binary PGM (P5, one channel) or PPM (P6, three channels).
/// Byte value v becomes sample v.0. Maxval must be exactly 255.
inline ImageBuffer load_image(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open image file: " + path);
  std::string data((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  std::size_t pos = 0;
  const std::string magic = detail::next_header_token(data, pos);
  int channels = 0;
  if (magic == "P5")
    channels = 1;
  else if (magic == "P6")
    channels = 3;
  else
    throw FormatError("image header: magic '" + magic + "' is not P5 or P6");
  const int w = detail::parse_header_int(detail::next_header_token(data, pos), "width");
  const int h = detail::parse_header_int(detail::next_header_token(data, pos), "height");
  const std::string maxval = detail::next_header_token(data, pos);
  if (maxval != "255")
    throw FormatError("image header: maxval must be 255, got '" + maxval + "'");
  // Exactly one whitespace byte separates the header from the payload.
  if (pos >= data.size() || !std::isspace(static_cast<unsigned char>(data[pos])))
    throw FormatError("image header: missing separator before pixel data");
  ++pos;
  const std::size_t need = static_cast<std::size_t>(w) * h * channels;
  if (data.size() - pos < need)
    throw FormatError("image payload: truncated, need " + std::to_string(need) +
                      " bytes, have " + std::to_string(data.size() - pos));
  ImageBuffer img(w, h, channels);
  for (std::size_t i = 0; i < need; ++i)
    img.samples[i] = static_cast<double>(static_cast<unsigned char>(data[pos + i]));
  return img;
}

/// Rounds half away from zero; samples outside [0,255] are clamped.
inline unsigned char sample_to_byte(double v) {
  const double c = std::clamp(v, 0.0, 255.0);
  return static_cast<unsigned char>(std::llround(c));
}

/// Writes P5 (1 channel) or P6 (3 channels), maxval 255.
/// Loading the result of a save reproduces integer-valued buffers exactly.
inline void save_image(const ImageBuffer& img, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open image file for writing: " + path);
  out << (img.channels == 1 ? "P5" : "P6") << "\n"
      << img.width << " " << img.height << "\n255\n";
  std::string payload(img.samples.size(), '\0');
  for (std::size_t i = 0; i < img.samples.size(); ++i)
    payload[i] = static_cast<char>(sample_to_byte(img.samples[i]));
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (!out) throw IoError("short write to image file: " + path);
}

// ---------------------------------------------------------------------------
// Color and geometry
// ---------------------------------------------------------------------------

/// BT.601 full-range luma; result is unclamped.
inline ImageBuffer to_luma(const ImageBuffer& img) {
  if (img.channels != 3) throw InvalidInput("to_luma: input must have 3 channels");
  ImageBuffer out(img.width, img.height, 1);
  const std::size_t n = static_cast<std::size_t>(img.width) * img.height;
  for (std::size_t i = 0; i < n; ++i) {
    const double* p = &img.samples[i * 3];
    out.samples[i] = 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2];
  }
  return out;
}

inline ImageBuffer center_crop(const ImageBuffer& img, int w, int h) {
  if (w <= 0 || h <= 0 || w > img.width || h > img.height)
    throw InvalidInput("center_crop: requested " + std::to_string(w) + "x" +
                       std::to_string(h) + " from " + std::to_string(img.width) +
                       "x" + std::to_string(img.height));
  const int x0 = (img.width - w) / 2;
  const int y0 = (img.height - h) / 2;
  ImageBuffer out(w, h, img.channels);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < img.channels; ++c)
        out.at(x, y, c) = img.at(x0 + x, y0 + y, c);
  return out;
}

/// Bilinear resize with the half-pixel convention
/// src = (dst + 0.5)/scale - 0.5, source coordinates clamped to the raster.
/// scale 1.0 reproduces the input exactly.
inline ImageBuffer resize_bilinear(const ImageBuffer& img, double scale) {
  if (!std::isfinite(scale) || scale <= 0.0)
    throw InvalidInput("resize_bilinear: scale must be finite and > 0");
  const int ow = static_cast<int>(std::llround(img.width * scale));
  const int oh = static_cast<int>(std::llround(img.height * scale));
  if (ow < 1 || oh < 1)
    throw InvalidInput("resize_bilinear: output would be empty at scale " +
                       std::to_string(scale));
  ImageBuffer out(ow, oh, img.channels);
  for (int y = 0; y < oh; ++y) {
    const double sy = (y + 0.5) / scale - 0.5;
    const int y0 = static_cast<int>(std::floor(sy));
    const double fy = sy - y0;
    const int ya = std::clamp(y0, 0, img.height - 1);
    const int yb = std::clamp(y0 + 1, 0, img.height - 1);
    for (int x = 0; x < ow; ++x) {
      const double sx = (x + 0.5) / scale - 0.5;
      const int x0 = static_cast<int>(std::floor(sx));
      const double fx = sx - x0;
      const int xa = std::clamp(x0, 0, img.width - 1);
      const int xb = std::clamp(x0 + 1, 0, img.width - 1);
      for (int c = 0; c < img.channels; ++c) {
        const double top = (1.0 - fx) * img.at(xa, ya, c) + fx * img.at(xb, ya, c);
        const double bot = (1.0 - fx) * img.at(xa, yb, c) + fx * img.at(xb, yb, c);
        out.at(x, y, c) = (1.0 - fy) * top + fy * bot;
      }
    }
  }
  return out;
}

namespace detail {

// Anchor sequence 0, stride, 2*stride, ... with a final anchor pinned to
// dim - patch so the image edge is always covered.
inline std::vector<int> patch_anchors(int dim, int patch, int stride) {
  std::vector<int> anchors;
  for (int a = 0; a + patch <= dim; a += stride) anchors.push_back(a);
  if (anchors.empty() || anchors.back() != dim - patch)
    anchors.push_back(dim - patch);
  return anchors;
}

}  // namespace detail

/// Square patches in top-left raster order; the last row/column of patches
/// is anchored to the image edge.
inline std::vector<ImageBuffer> extract_patches(const ImageBuffer& img, int patch,
                                                int stride) {
  if (patch <= 0 || patch > std::min(img.width, img.height))
    throw InvalidInput("extract_patches: patch " + std::to_string(patch) +
                       " exceeds image " + std::to_string(img.width) + "x" +
                       std::to_string(img.height));
  if (stride < 1) throw InvalidInput("extract_patches: stride must be >= 1");
  const auto xs = detail::patch_anchors(img.width, patch, stride);
  const auto ys = detail::patch_anchors(img.height, patch, stride);
  std::vector<ImageBuffer> patches;
  patches.reserve(xs.size() * ys.size());
  for (int y : ys)
    for (int x : xs) {
      ImageBuffer p(patch, patch, img.channels);
      for (int py = 0; py < patch; ++py)
        for (int px = 0; px < patch; ++px)
          for (int c = 0; c < img.channels; ++c)
            p.at(px, py, c) = img.at(x + px, y + py, c);
      patches.push_back(std::move(p));
    }
  return patches;
}

inline ImageBuffer flip_horizontal(const ImageBuffer& img) {
  ImageBuffer out(img.width, img.height, img.channels);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < img.channels; ++c)
        out.at(x, y, c) = img.at(img.width - 1 - x, y, c);
  return out;
}

/// Peak signal-to-noise ratio in dB against a 255 peak.
inline double psnr(const ImageBuffer& a, const ImageBuffer& b) {
  if (!a.same_shape(b)) throw InvalidInput("psnr: shape mismatch");
  double mse = 0.0;
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    const double d = a.samples[i] - b.samples[i];
    mse += d * d;
  }
  mse /= static_cast<double>(a.samples.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

// ---------------------------------------------------------------------------
// BT.601 YCbCr, JPEG convention (full range, chroma centered at 128).
// Shared by the JPEG simulator and the chrominance feature extractors.
// ---------------------------------------------------------------------------

inline void rgb_to_ycbcr(double r, double g, double b, double& y, double& cb,
                         double& cr) {
  y = 0.299 * r + 0.587 * g + 0.114 * b;
  cb = -0.168735892 * r - 0.331264108 * g + 0.5 * b + 128.0;
  cr = 0.5 * r - 0.418687589 * g - 0.081312411 * b + 128.0;
}

inline void ycbcr_to_rgb(double y, double cb, double cr, double& r, double& g,
                         double& b) {
  const double u = cb - 128.0;
  const double v = cr - 128.0;
  r = y + 1.402 * v;
  g = y - 0.344136286 * u - 0.714136286 * v;
  b = y + 1.772 * u;
}

}  // namespace ganbench
