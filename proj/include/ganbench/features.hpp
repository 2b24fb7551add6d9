/*
 * Hand-crafted forensic feature sets: residual and color co-occurrence
 * statistics plus per-channel saturation summaries.
 *
 * Licensed under the terms of the Apache 2.0 License.
 * See LICENSE file in the project root for terms.
 */
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "ganbench/errors.hpp"
#include "ganbench/image.hpp"
#include "ganbench/residual.hpp"

namespace ganbench {

/// Normalized joint histogram of quantized value pairs; cells sum to 1
/// whenever at least one pair was counted.
struct CooccurrenceMatrix {
  int bins = 0;
  std::size_t pairs = 0;
  std::vector<double> cells;  // row-major, row = first plane's bin

  double at(int a, int b) const { return cells[static_cast<std::size_t>(a) * bins + b]; }
};

/// Counts pairs (first[x,y], second[x+dx,y+dy]) over all positions where
/// both samples exist. Planes hold bin indices in [0,bins).
inline CooccurrenceMatrix cooccurrence(const std::vector<int>& first,
                                       const std::vector<int>& second,
                                       int width, int height, int dx, int dy,
                                       int bins) {
  if (bins <= 0) throw InvalidInput("cooccurrence: bins must be positive");
  if (dx < 0 || dy < 0) throw InvalidInput("cooccurrence: offsets must be non-negative");
  const std::size_t n = static_cast<std::size_t>(width) * height;
  if (first.size() != n || second.size() != n)
    throw InvalidInput("cooccurrence: plane size does not match width*height");
  if (width <= dx || height <= dy)
    throw InvalidInput("cooccurrence: offset leaves no overlapping pairs");
  CooccurrenceMatrix m;
  m.bins = bins;
  m.cells.assign(static_cast<std::size_t>(bins) * bins, 0.0);
  for (int y = 0; y < height - dy; ++y)
    for (int x = 0; x < width - dx; ++x) {
      const int a = first[static_cast<std::size_t>(y) * width + x];
      const int b = second[static_cast<std::size_t>(y + dy) * width + (x + dx)];
      if (a < 0 || a >= bins || b < 0 || b >= bins)
        throw InvalidInput("cooccurrence: bin index out of range");
      m.cells[static_cast<std::size_t>(a) * bins + b] += 1.0;
      ++m.pairs;
    }
  const double inv = 1.0 / static_cast<double>(m.pairs);
  for (auto& c : m.cells) c *= inv;
  return m;
}

namespace detail {

inline ImageBuffer extract_channel(const ImageBuffer& img, int c) {
  ImageBuffer plane(img.width, img.height, 1);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      plane.at(x, y, 0) = img.at(x, y, c);
  return plane;
}

/// Y, Cb, Cr planes of a 3-channel image (BT.601, chroma centered at 128).
inline std::array<ImageBuffer, 3> ycbcr_planes(const ImageBuffer& img) {
  std::array<ImageBuffer, 3> planes{ImageBuffer(img.width, img.height, 1),
                                    ImageBuffer(img.width, img.height, 1),
                                    ImageBuffer(img.width, img.height, 1)};
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      rgb_to_ycbcr(img.at(x, y, 0), img.at(x, y, 1), img.at(x, y, 2),
                   planes[0].at(x, y, 0), planes[1].at(x, y, 0),
                   planes[2].at(x, y, 0));
  return planes;
}

inline std::vector<int> quantize_residual(const ImageBuffer& res) {
  std::vector<int> q(res.samples.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    const long long b = std::llround(res.samples[i] / 2.0);
    q[i] = static_cast<int>(std::clamp(b, -2LL, 2LL)) + 2;
  }
  return q;
}

inline std::vector<int> quantize_intensity(const ImageBuffer& plane, int bins) {
  std::vector<int> q(plane.samples.size());
  const double step = 256.0 / bins;
  for (std::size_t i = 0; i < q.size(); ++i)
    q[i] = std::clamp(static_cast<int>(std::floor(plane.samples[i] / step)), 0, bins - 1);
  return q;
}

}  // namespace detail

/// 300 values: per YCbCr plane (Y, Cb, Cr), per highpass direction
/// (horizontal, vertical), per co-occurrence offset ((1,0) then (0,1)), the
/// flattened 5x5 co-occurrence of residuals quantized by
/// clamp(round(v/2),-2,2).
inline std::vector<double> residual_cooc_features(const ImageBuffer& img) {
  if (img.channels != 3)
    throw InvalidInput("residual_cooc_features: input must be 3-channel");
  std::vector<double> out;
  out.reserve(300);
  const auto planes = detail::ycbcr_planes(img);
  for (const ImageBuffer& plane : planes) {
    for (FilterDirection dir : {FilterDirection::kHorizontal, FilterDirection::kVertical}) {
      const ImageBuffer res = highpass_residual(plane, dir);
      const std::vector<int> q = detail::quantize_residual(res);
      for (auto [dx, dy] : {std::pair{1, 0}, std::pair{0, 1}}) {
        const CooccurrenceMatrix m =
            cooccurrence(q, q, res.width, res.height, dx, dy, 5);
        out.insert(out.end(), m.cells.begin(), m.cells.end());
      }
    }
  }
  return out;
}

/// 384 values: per channel an 8x8 within-band co-occurrence at offset (1,0),
/// then for the pairs (R,G), (G,B), (R,B) an 8x8 cross-band co-occurrence at
/// offset (0,0). Intensities are binned uniformly over [0,256).
inline std::vector<double> rgb_cross_cooc_features(const ImageBuffer& img) {
  if (img.channels != 3)
    throw InvalidInput("rgb_cross_cooc_features: input must be 3-channel");
  constexpr int kBins = 8;
  std::vector<std::vector<int>> q;
  for (int c = 0; c < 3; ++c)
    q.push_back(detail::quantize_intensity(detail::extract_channel(img, c), kBins));
  std::vector<double> out;
  out.reserve(384);
  for (int c = 0; c < 3; ++c) {
    const CooccurrenceMatrix m =
        cooccurrence(q[c], q[c], img.width, img.height, 1, 0, kBins);
    out.insert(out.end(), m.cells.begin(), m.cells.end());
  }
  for (auto [a, b] : {std::pair{0, 1}, std::pair{1, 2}, std::pair{0, 2}}) {
    const CooccurrenceMatrix m =
        cooccurrence(q[a], q[b], img.width, img.height, 0, 0, kBins);
    out.insert(out.end(), m.cells.begin(), m.cells.end());
  }
  return out;
}

namespace detail {

/// Linearly interpolated percentile of a sorted vector, p in [0,100].
inline double percentile_sorted(const std::vector<double>& sorted, double p) {
  const double pos = p / 100.0 * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac;
}

}  // namespace detail

/// 15 values, 5 per channel in R,G,B order: fraction of samples >= 250,
/// fraction <= 5, min/255, max/255, and (p90-p10)/255 with linearly
/// interpolated percentiles.
inline std::vector<double> saturation_features(const ImageBuffer& img) {
  if (img.channels != 3)
    throw InvalidInput("saturation_features: input must be 3-channel");
  std::vector<double> out;
  out.reserve(15);
  const std::size_t n = static_cast<std::size_t>(img.width) * img.height;
  std::vector<double> vals(n);
  for (int c = 0; c < 3; ++c) {
    std::size_t hi = 0, lo = 0;
    for (std::size_t i = 0; i < n; ++i) {
      vals[i] = img.samples[i * img.channels + c];
      if (vals[i] >= 250.0) ++hi;
      if (vals[i] <= 5.0) ++lo;
    }
    std::sort(vals.begin(), vals.end());
    out.push_back(static_cast<double>(hi) / static_cast<double>(n));
    out.push_back(static_cast<double>(lo) / static_cast<double>(n));
    out.push_back(vals.front() / 255.0);
    out.push_back(vals.back() / 255.0);
    out.push_back((detail::percentile_sorted(vals, 90.0) -
                   detail::percentile_sorted(vals, 10.0)) / 255.0);
  }
  return out;
}

enum class FeatureSetKind { kResidualCooc, kRgbCrossCooc, kSaturation };

inline std::vector<double> extract_features(const ImageBuffer& img, FeatureSetKind kind) {
  switch (kind) {
    case FeatureSetKind::kResidualCooc: return residual_cooc_features(img);
    case FeatureSetKind::kRgbCrossCooc: return rgb_cross_cooc_features(img);
    case FeatureSetKind::kSaturation: return saturation_features(img);
  }
  throw InvalidInput("extract_features: unknown feature set");
}

inline std::size_t feature_dimension(FeatureSetKind kind) {
  switch (kind) {
    case FeatureSetKind::kResidualCooc: return 300;
    case FeatureSetKind::kRgbCrossCooc: return 384;
    case FeatureSetKind::kSaturation: return 15;
  }
  throw InvalidInput("feature_dimension: unknown feature set");
}

struct FeatureRow {
  int label = 0;
  std::vector<double> values;
};

/// Writes "label,f0,...,fD-1" header plus one row per sample; values use
/// round-trippable %.17g formatting.
inline void write_features_csv(const std::string& path,
                               const std::vector<FeatureRow>& rows) {
  if (rows.empty()) throw InvalidInput("write_features_csv: no rows");
  const std::size_t dim = rows[0].values.size();
  std::ofstream out(path);
  if (!out) throw IoError("cannot open feature csv for writing: " + path);
  out << "label";
  for (std::size_t i = 0; i < dim; ++i) out << ",f" << i;
  out << "\n";
  char buf[40];
  for (const auto& row : rows) {
    if (row.values.size() != dim)
      throw InvalidInput("write_features_csv: inconsistent feature dimensions");
    out << row.label;
    for (double v : row.values) {
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      out << ',' << buf;
    }
    out << "\n";
  }
  if (!out) throw IoError("failed while writing feature csv: " + path);
}

}  // namespace ganbench
