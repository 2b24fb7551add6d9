/*
 * In-memory JPEG round-trip simulator: BT.601 color transform, 4:2:0
 * subsampling, blockwise DCT and Annex-K quantization. No entropy coding,
 * no file format; the point is the deterministic loss, not the bytes.
 *
 * Licensed under the terms of the Apache 2.0 License.
 * See LICENSE file in the project root for terms.
 */
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "ganbench/errors.hpp"
#include "ganbench/image.hpp"

namespace ganbench {
namespace jpegsim {

inline constexpr std::array<int, 64> kBaseLuminance = {
    16, 11, 10, 16, 24,  40,  51,  61,
    12, 12, 14, 19, 26,  58,  60,  55,
    14, 13, 16, 24, 40,  57,  69,  56,
    14, 17, 22, 29, 51,  87,  80,  62,
    18, 22, 37, 56, 68,  109, 103, 77,
    24, 35, 55, 64, 81,  104, 113, 92,
    49, 64, 78, 87, 103, 121, 120, 101,
    72, 92, 95, 98, 112, 100, 103, 99};

inline constexpr std::array<int, 64> kBaseChrominance = {
    17, 18, 24, 47, 99, 99, 99, 99,
    18, 21, 26, 66, 99, 99, 99, 99,
    24, 26, 56, 99, 99, 99, 99, 99,
    47, 66, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99};

/// Quality-scaled table: S = 5000/q below 50 else 200 - 2q (integer
/// arithmetic), entries clamped to [1, 255]. Quality 50 reproduces the base
/// table exactly.
inline std::array<int, 64> scaled_table(const std::array<int, 64>& base,
                                        int quality) {
  const int s = quality < 50 ? 5000 / quality : 200 - 2 * quality;
  std::array<int, 64> out{};
  for (int i = 0; i < 64; ++i)
    out[i] = std::clamp((base[i] * s + 50) / 100, 1, 255);
  return out;
}

namespace detail {

struct Plane {
  int w = 0, h = 0;
  std::vector<double> v;
  Plane() = default;
  Plane(int w_, int h_) : w(w_), h(h_), v(static_cast<std::size_t>(w_) * h_) {}
  double& at(int x, int y) { return v[static_cast<std::size_t>(y) * w + x]; }
  double at(int x, int y) const { return v[static_cast<std::size_t>(y) * w + x]; }
};

// Orthonormal 8-point DCT-II basis, C[u][i] = a(u) cos((2i+1)u pi / 16).
struct DctBasis {
  double c[8][8];
  DctBasis() {
    for (int u = 0; u < 8; ++u)
      for (int i = 0; i < 8; ++i)
        c[u][i] = (u == 0 ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0)) *
                  std::cos((2 * i + 1) * u * std::numbers::pi / 16.0);
  }
};

inline const DctBasis& dct_basis() {
  static const DctBasis basis;
  return basis;
}

inline void dct8x8(const double in[64], double out[64]) {
  const auto& C = dct_basis().c;
  double tmp[64];
  for (int u = 0; u < 8; ++u)  // rows: tmp = in * C^T
    for (int j = 0; j < 8; ++j) {
      double s = 0.0;
      for (int i = 0; i < 8; ++i) s += in[j * 8 + i] * C[u][i];
      tmp[j * 8 + u] = s;
    }
  for (int v = 0; v < 8; ++v)  // columns: out = C * tmp
    for (int u = 0; u < 8; ++u) {
      double s = 0.0;
      for (int j = 0; j < 8; ++j) s += tmp[j * 8 + u] * C[v][j];
      out[v * 8 + u] = s;
    }
}

inline void idct8x8(const double in[64], double out[64]) {
  const auto& C = dct_basis().c;
  double tmp[64];
  for (int j = 0; j < 8; ++j)
    for (int u = 0; u < 8; ++u) {
      double s = 0.0;
      for (int v = 0; v < 8; ++v) s += in[v * 8 + u] * C[v][j];
      tmp[j * 8 + u] = s;
    }
  for (int j = 0; j < 8; ++j)
    for (int i = 0; i < 8; ++i) {
      double s = 0.0;
      for (int u = 0; u < 8; ++u) s += tmp[j * 8 + u] * C[u][i];
      out[j * 8 + i] = s;
    }
}

inline Plane pad_to_multiple_of_8(const Plane& p) {
  const int pw = (p.w + 7) / 8 * 8;
  const int ph = (p.h + 7) / 8 * 8;
  Plane out(pw, ph);
  for (int y = 0; y < ph; ++y)
    for (int x = 0; x < pw; ++x)
      out.at(x, y) = p.at(std::min(x, p.w - 1), std::min(y, p.h - 1));
  return out;
}

inline Plane crop_plane(const Plane& p, int w, int h) {
  Plane out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) out.at(x, y) = p.at(x, y);
  return out;
}

/// Level shift, DCT, quantize/dequantize, inverse DCT per 8x8 block.
inline Plane transform_plane(const Plane& plane, const std::array<int, 64>& table) {
  Plane padded = pad_to_multiple_of_8(plane);
  double block[64], coef[64], rec[64];
  for (int by = 0; by < padded.h; by += 8)
    for (int bx = 0; bx < padded.w; bx += 8) {
      for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x)
          block[y * 8 + x] = padded.at(bx + x, by + y) - 128.0;
      dct8x8(block, coef);
      for (int i = 0; i < 64; ++i)
        coef[i] = static_cast<double>(std::llround(coef[i] / table[i])) * table[i];
      idct8x8(coef, rec);
      for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x)
          padded.at(bx + x, by + y) = rec[y * 8 + x] + 128.0;
    }
  return crop_plane(padded, plane.w, plane.h);
}

/// 2x2 box average; odd edges average the clamped (replicated) samples.
inline Plane subsample_420(const Plane& p) {
  Plane out((p.w + 1) / 2, (p.h + 1) / 2);
  for (int y = 0; y < out.h; ++y)
    for (int x = 0; x < out.w; ++x) {
      double s = 0.0;
      for (int dy = 0; dy < 2; ++dy)
        for (int dx = 0; dx < 2; ++dx)
          s += p.at(std::min(2 * x + dx, p.w - 1), std::min(2 * y + dy, p.h - 1));
      out.at(x, y) = s / 4.0;
    }
  return out;
}

inline Plane upsample_nearest(const Plane& p, int w, int h) {
  Plane out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) out.at(x, y) = p.at(x / 2, y / 2);
  return out;
}

}  // namespace detail
}  // namespace jpegsim

/// Simulated JPEG compression and decompression at the given quality.
/// Three-channel images run the full color pipeline with 4:2:0 chroma;
/// single-channel images use the luminance table only.
inline ImageBuffer jpeg_roundtrip(const ImageBuffer& img, int quality) {
  using namespace jpegsim;
  using jpegsim::detail::Plane;
  if (quality < 1 || quality > 100)
    throw InvalidInput("jpeg_roundtrip: quality must be in [1,100], got " +
                       std::to_string(quality));
  const auto luma_table = scaled_table(kBaseLuminance, quality);
  if (img.channels == 1) {
    Plane y(img.width, img.height);
    y.v = img.samples;
    const Plane rec = jpegsim::detail::transform_plane(y, luma_table);
    ImageBuffer out(img.width, img.height, 1);
    for (std::size_t i = 0; i < rec.v.size(); ++i)
      out.samples[i] = std::clamp(rec.v[i], 0.0, 255.0);
    return out;
  }
  const auto chroma_table = scaled_table(kBaseChrominance, quality);
  Plane y(img.width, img.height), cb(img.width, img.height), cr(img.width, img.height);
  for (int py = 0; py < img.height; ++py)
    for (int px = 0; px < img.width; ++px)
      rgb_to_ycbcr(img.at(px, py, 0), img.at(px, py, 1), img.at(px, py, 2),
                   y.at(px, py), cb.at(px, py), cr.at(px, py));
  const Plane y_rec = jpegsim::detail::transform_plane(y, luma_table);
  const Plane cb_rec = jpegsim::detail::upsample_nearest(
      jpegsim::detail::transform_plane(jpegsim::detail::subsample_420(cb), chroma_table),
      img.width, img.height);
  const Plane cr_rec = jpegsim::detail::upsample_nearest(
      jpegsim::detail::transform_plane(jpegsim::detail::subsample_420(cr), chroma_table),
      img.width, img.height);
  ImageBuffer out(img.width, img.height, 3);
  for (int py = 0; py < img.height; ++py)
    for (int px = 0; px < img.width; ++px) {
      double r, g, b;
      ycbcr_to_rgb(y_rec.at(px, py), cb_rec.at(px, py), cr_rec.at(px, py), r, g, b);
      out.at(px, py, 0) = std::clamp(r, 0.0, 255.0);
      out.at(px, py, 1) = std::clamp(g, 0.0, 255.0);
      out.at(px, py, 2) = std::clamp(b, 0.0, 255.0);
    }
  return out;
}

}  // namespace ganbench
