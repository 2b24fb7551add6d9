/*
 * Noise residual extraction, generator fingerprint estimation and
 * correlation-based source attribution.
 *
 * Licensed under the terms of the Apache 2.0 License.
 * See LICENSE file in the project root for terms.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "ganbench/errors.hpp"
#include "ganbench/image.hpp"

namespace ganbench {

/// Stable residual pattern of one generator: the zero-mean average of
/// denoised residuals over `count` images.
struct Fingerprint {
  int width = 0;
  int height = 0;
  std::vector<double> values;  // zero mean
  std::size_t count = 0;
  std::string source;
};

enum class FilterDirection { kHorizontal, kVertical };

/// Third-order derivative [1,-3,3,-1] along rows (or columns), i.e. the
/// third forward difference. Output is signed and shrinks by 3 samples in
/// the filtered direction; degree-1 ramps map to zero.
inline ImageBuffer highpass_residual(const ImageBuffer& img,
                                     FilterDirection dir = FilterDirection::kHorizontal) {
  if (img.channels != 1)
    throw InvalidInput("highpass_residual: input must be single-channel");
  if (img.width < 4 || img.height < 4)
    throw InvalidInput("highpass_residual: image must be at least 4x4");
  if (dir == FilterDirection::kHorizontal) {
    ImageBuffer out(img.width - 3, img.height, 1);
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < out.width; ++x)
        out.at(x, y, 0) = img.at(x + 3, y, 0) - 3.0 * img.at(x + 2, y, 0) +
                          3.0 * img.at(x + 1, y, 0) - img.at(x, y, 0);
    return out;
  }
  ImageBuffer out(img.width, img.height - 3, 1);
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < img.width; ++x)
      out.at(x, y, 0) = img.at(x, y + 3, 0) - 3.0 * img.at(x, y + 2, 0) +
                        3.0 * img.at(x, y + 1, 0) - img.at(x, y, 0);
  return out;
}

/// img minus its 3x3 median with edge replication; signed output.
inline ImageBuffer denoise_residual(const ImageBuffer& img) {
  if (img.channels != 1)
    throw InvalidInput("denoise_residual: input must be single-channel");
  if (img.width < 3 || img.height < 3)
    throw InvalidInput("denoise_residual: image must be at least 3x3");
  ImageBuffer out(img.width, img.height, 1);
  double window[9];
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      int n = 0;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx)
          window[n++] = img.at(std::clamp(x + dx, 0, img.width - 1),
                               std::clamp(y + dy, 0, img.height - 1), 0);
      std::nth_element(window, window + 4, window + 9);
      out.at(x, y, 0) = img.at(x, y, 0) - window[4];
    }
  return out;
}

/// Mean of denoised residuals over at least 8 same-size images, with the
/// global mean subtracted. 3-channel inputs are reduced to luma first.
/// The reduction runs in ascending image-index order.
inline Fingerprint estimate_fingerprint(const std::vector<ImageBuffer>& imgs,
                                        const std::string& source) {
  if (imgs.size() < 8)
    throw InvalidInput("estimate_fingerprint: need at least 8 images, got " +
                       std::to_string(imgs.size()));
  const int w = imgs[0].width, h = imgs[0].height;
  Fingerprint fp;
  fp.width = w;
  fp.height = h;
  fp.source = source;
  fp.count = imgs.size();
  fp.values.assign(static_cast<std::size_t>(w) * h, 0.0);
  for (const auto& img : imgs) {
    if (img.width != w || img.height != h)
      throw InvalidInput("estimate_fingerprint: image size mismatch");
    const ImageBuffer res =
        denoise_residual(img.channels == 3 ? to_luma(img) : img);
    for (std::size_t i = 0; i < fp.values.size(); ++i)
      fp.values[i] += res.samples[i];
  }
  const double inv = 1.0 / static_cast<double>(imgs.size());
  double mean = 0.0;
  for (auto& v : fp.values) {
    v *= inv;
    mean += v;
  }
  mean /= static_cast<double>(fp.values.size());
  for (auto& v : fp.values) v -= mean;
  return fp;
}

/// Normalized cross-correlation in [-1,1]; both sides are zero-meaned.
/// Returns 0 when either side has zero norm.
inline double correlate(const std::vector<double>& residual, const Fingerprint& fp) {
  if (residual.size() != fp.values.size())
    throw InvalidInput("correlate: size mismatch, residual has " +
                       std::to_string(residual.size()) + " values, fingerprint " +
                       std::to_string(fp.values.size()));
  double mean_r = 0.0;
  for (double v : residual) mean_r += v;
  mean_r /= static_cast<double>(residual.size());
  double dot = 0.0, nr = 0.0, nf = 0.0;
  for (std::size_t i = 0; i < residual.size(); ++i) {
    const double r = residual[i] - mean_r;
    const double f = fp.values[i];  // already zero mean
    dot += r * f;
    nr += r * r;
    nf += f * f;
  }
  if (nr == 0.0 || nf == 0.0) return 0.0;
  return dot / (std::sqrt(nr) * std::sqrt(nf));
}

inline double correlate(const ImageBuffer& residual, const Fingerprint& fp) {
  return correlate(residual.samples, fp);
}

struct Attribution {
  std::size_t index = 0;
  double score = 0.0;
};

/// argmax over fingerprints of the correlation with the image's denoised
/// residual; ties break to the lowest index.
inline Attribution attribute(const ImageBuffer& img,
                             const std::vector<Fingerprint>& fps) {
  if (fps.empty()) throw InvalidInput("attribute: empty fingerprint list");
  const ImageBuffer res = denoise_residual(img.channels == 3 ? to_luma(img) : img);
  Attribution best{0, correlate(res, fps[0])};
  for (std::size_t i = 1; i < fps.size(); ++i) {
    const double s = correlate(res, fps[i]);
    if (s > best.score) best = {i, s};
  }
  return best;
}

/// Exports a fingerprint as a PGM after linear rescale to [0,255], with a
/// text sidecar carrying the metadata needed to undo the rescale.
inline void export_fingerprint(const Fingerprint& fp, const std::string& pgm_path) {
  const auto [mn, mx] = std::minmax_element(fp.values.begin(), fp.values.end());
  ImageBuffer img(fp.width, fp.height, 1);
  const double scale = (*mx > *mn) ? 255.0 / (*mx - *mn) : 0.0;
  for (std::size_t i = 0; i < fp.values.size(); ++i)
    img.samples[i] = (fp.values[i] - *mn) * scale;
  save_image(img, pgm_path);
  std::ofstream side(pgm_path + ".txt");
  if (!side) throw IoError("cannot write fingerprint sidecar: " + pgm_path + ".txt");
  side << "source " << fp.source << "\n"
       << "count " << fp.count << "\n"
       << "min " << *mn << "\n"
       << "max " << *mx << "\n";
}

}  // namespace ganbench
