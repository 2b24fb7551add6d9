/*
 * Degradation and augmentation pipeline: blur, noise, cut-out, brightness
 * and contrast, horizontal flip, JPEG, and composed policies.
 *
 * Licensed under the terms of the Apache 2.0 License.
 * See LICENSE file in the project root for terms.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "ganbench/errors.hpp"
#include "ganbench/image.hpp"
#include "ganbench/jpeg.hpp"
#include "ganbench/rng.hpp"

namespace ganbench {

/// One training-time corruption policy. Stages fire independently with
/// their probabilities; the brightness/contrast stage always fires and is
/// the identity when its ranges are [0,0] and [1,1].
struct AugmentPolicy {
  double jpeg_prob = 0.0;
  int jpeg_quality_lo = 30, jpeg_quality_hi = 95;
  double blur_prob = 0.0;
  double blur_sigma_lo = 0.0, blur_sigma_hi = 2.0;
  double noise_prob = 0.0;
  double noise_sigma_lo = 0.0, noise_sigma_hi = 5.0;
  double flip_prob = 0.0;
  double cutout_prob = 0.0;
  double cutout_frac = 0.25;
  double brightness_lo = 0.0, brightness_hi = 0.0;
  double contrast_lo = 1.0, contrast_hi = 1.0;

  void validate() const {
    auto prob_ok = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (!prob_ok(jpeg_prob) || !prob_ok(blur_prob) || !prob_ok(noise_prob) ||
        !prob_ok(flip_prob) || !prob_ok(cutout_prob))
      throw InvalidInput("AugmentPolicy: probabilities must be in [0,1]");
    if (jpeg_quality_lo > jpeg_quality_hi || jpeg_quality_lo < 1 || jpeg_quality_hi > 100)
      throw InvalidInput("AugmentPolicy: jpeg quality range must be ordered within [1,100]");
    if (blur_sigma_lo > blur_sigma_hi || blur_sigma_lo < 0.0)
      throw InvalidInput("AugmentPolicy: blur sigma range must be ordered and non-negative");
    if (noise_sigma_lo > noise_sigma_hi || noise_sigma_lo < 0.0)
      throw InvalidInput("AugmentPolicy: noise sigma range must be ordered and non-negative");
    if (cutout_frac <= 0.0 || cutout_frac >= 1.0)
      throw InvalidInput("AugmentPolicy: cutout fraction must be in (0,1)");
    if (brightness_lo > brightness_hi)
      throw InvalidInput("AugmentPolicy: brightness range must be ordered");
    if (contrast_lo > contrast_hi || contrast_lo <= 0.0)
      throw InvalidInput("AugmentPolicy: contrast range must be ordered and positive");
  }
};

/// Compression-and-blurring policy used when a detector asks for the
/// standard robustness-oriented training corruption.
inline AugmentPolicy blur_jpeg_policy() {
  AugmentPolicy p;
  p.jpeg_prob = 0.5;
  p.jpeg_quality_lo = 50;
  p.jpeg_quality_hi = 95;
  p.blur_prob = 0.5;
  p.blur_sigma_lo = 0.0;
  p.blur_sigma_hi = 1.0;
  return p;
}

/// Everything at once: flips, brightness/contrast, cut-out, noise, blur
/// and JPEG.
inline AugmentPolicy strong_policy() {
  AugmentPolicy p = blur_jpeg_policy();
  p.flip_prob = 0.5;
  p.noise_prob = 0.3;
  p.noise_sigma_lo = 0.0;
  p.noise_sigma_hi = 5.0;
  p.cutout_prob = 0.3;
  p.cutout_frac = 0.25;
  p.brightness_lo = -20.0;
  p.brightness_hi = 20.0;
  p.contrast_lo = 0.8;
  p.contrast_hi = 1.2;
  return p;
}

/// Separable Gaussian blur, kernel radius ceil(3*sigma), edge replication.
/// sigma 0 is the identity.
inline ImageBuffer gaussian_blur(const ImageBuffer& img, double sigma) {
  if (!std::isfinite(sigma) || sigma < 0.0)
    throw InvalidInput("gaussian_blur: sigma must be finite and >= 0");
  if (sigma == 0.0) return img;
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    kernel[static_cast<std::size_t>(i + radius)] =
        std::exp(-0.5 * (static_cast<double>(i) * i) / (sigma * sigma));
    sum += kernel[static_cast<std::size_t>(i + radius)];
  }
  for (auto& k : kernel) k /= sum;

  ImageBuffer horiz(img.width, img.height, img.channels);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < img.channels; ++c) {
        double acc = 0.0;
        for (int i = -radius; i <= radius; ++i)
          acc += kernel[static_cast<std::size_t>(i + radius)] *
                 img.at(std::clamp(x + i, 0, img.width - 1), y, c);
        horiz.at(x, y, c) = acc;
      }
  ImageBuffer out(img.width, img.height, img.channels);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < img.channels; ++c) {
        double acc = 0.0;
        for (int i = -radius; i <= radius; ++i)
          acc += kernel[static_cast<std::size_t>(i + radius)] *
                 horiz.at(x, std::clamp(y + i, 0, img.height - 1), c);
        out.at(x, y, c) = acc;
      }
  return out;
}

/// i.i.d. N(0, sigma^2) per sample in raster order, clamped to [0,255].
inline ImageBuffer add_gaussian_noise(const ImageBuffer& img, double sigma, Rng& rng) {
  if (!std::isfinite(sigma) || sigma < 0.0)
    throw InvalidInput("add_gaussian_noise: sigma must be finite and >= 0");
  if (sigma == 0.0) return img;
  ImageBuffer out = img;
  for (auto& s : out.samples)
    s = std::clamp(s + sigma * rng.normal(), 0.0, 255.0);
  return out;
}

/// Mid-gray square of side round(frac * min(w,h)) at an rng-chosen position
/// fully inside the image.
inline ImageBuffer cutout(const ImageBuffer& img, double frac, Rng& rng) {
  const int side = std::min(img.width, img.height);
  const int s = static_cast<int>(std::llround(frac * side));
  if (s < 1)
    throw InvalidInput("cutout: fraction too small, square would be empty");
  const int sq = std::min(s, side);
  const int x0 = static_cast<int>(rng.uniform_int(0, img.width - sq));
  const int y0 = static_cast<int>(rng.uniform_int(0, img.height - sq));
  ImageBuffer out = img;
  for (int y = y0; y < y0 + sq; ++y)
    for (int x = x0; x < x0 + sq; ++x)
      for (int c = 0; c < img.channels; ++c) out.at(x, y, c) = 128.0;
  return out;
}

/// out = clamp(c*(in-128) + 128 + b, 0, 255).
inline ImageBuffer brightness_contrast(const ImageBuffer& img, double b, double c) {
  if (!std::isfinite(c) || c <= 0.0)
    throw InvalidInput("brightness_contrast: contrast must be finite and > 0");
  if (!std::isfinite(b))
    throw InvalidInput("brightness_contrast: brightness must be finite");
  ImageBuffer out = img;
  for (auto& s : out.samples) s = std::clamp(c * (s - 128.0) + 128.0 + b, 0.0, 255.0);
  return out;
}

/// Applies a policy in the fixed stage order: flip, brightness/contrast,
/// cut-out, noise, blur, JPEG. Fully determined by the rng stream.
inline ImageBuffer apply_policy(const ImageBuffer& img, const AugmentPolicy& policy,
                                Rng& rng) {
  policy.validate();
  ImageBuffer out = img;
  if (rng.uniform() < policy.flip_prob) out = flip_horizontal(out);
  {
    const double b = rng.uniform(policy.brightness_lo, policy.brightness_hi);
    const double c = rng.uniform(policy.contrast_lo, policy.contrast_hi);
    if (b != 0.0 || c != 1.0) out = brightness_contrast(out, b, c);
  }
  if (rng.uniform() < policy.cutout_prob) out = cutout(out, policy.cutout_frac, rng);
  if (rng.uniform() < policy.noise_prob) {
    const double sigma = rng.uniform(policy.noise_sigma_lo, policy.noise_sigma_hi);
    out = add_gaussian_noise(out, sigma, rng);
  }
  if (rng.uniform() < policy.blur_prob) {
    const double sigma = rng.uniform(policy.blur_sigma_lo, policy.blur_sigma_hi);
    out = gaussian_blur(out, sigma);
  }
  if (rng.uniform() < policy.jpeg_prob) {
    const int q = static_cast<int>(
        rng.uniform_int(policy.jpeg_quality_lo, policy.jpeg_quality_hi));
    out = jpeg_roundtrip(out, q);
  }
  return out;
}

}  // namespace ganbench
