/*
 * Fourier-domain analysis: magnitude displays, averaged spectra, azimuthal
 * power profiles and spectral feature vectors.
 *
 * Licensed under the terms of the Apache 2.0 License.
 * See LICENSE file in the project root for terms.
 */
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "ganbench/errors.hpp"
#include "ganbench/fft.hpp"
#include "ganbench/image.hpp"

namespace ganbench {

/// Mean power per integer frequency radius. bins[k] is the mean of |F|^2
/// over radii in [k, k+1); corner frequencies beyond N/2 fold into the last
/// bin. Bins are divided by the DC bin when it is nonzero.
struct RadialProfile {
  std::vector<double> bins;
  double total_power = 0.0;
};

enum class SpectralFeatureKind { kRadial, kPeakGrid };

inline SpectralFeatureKind spectral_kind_from_string(const std::string& s) {
  if (s == "radial") return SpectralFeatureKind::kRadial;
  if (s == "peak-grid") return SpectralFeatureKind::kPeakGrid;
  throw InvalidInput("spectral feature kind must be 'radial' or 'peak-grid', got '" + s + "'");
}

namespace detail {

// Display grid of log(1+|F|) with DC shifted to the center.
inline std::vector<double> log_magnitude_grid(const std::vector<double>& mag,
                                              int w, int h) {
  std::vector<double> grid(mag.size());
  for (int v = 0; v < h; ++v)
    for (int u = 0; u < w; ++u) {
      const int du = (u + w / 2) % w;
      const int dv = (v + h / 2) % h;
      grid[static_cast<std::size_t>(dv) * w + du] =
          std::log1p(mag[static_cast<std::size_t>(v) * w + u]);
    }
  return grid;
}

inline ImageBuffer rescale_to_display(const std::vector<double>& grid, int w, int h) {
  ImageBuffer out(w, h, 1);
  const auto [mn, mx] = std::minmax_element(grid.begin(), grid.end());
  if (*mx > *mn) {
    const double scale = 255.0 / (*mx - *mn);
    for (std::size_t i = 0; i < grid.size(); ++i)
      out.samples[i] = (grid[i] - *mn) * scale;
  }
  return out;
}

}  // namespace detail

/// log(1+|F|) display with DC centered, linearly rescaled to [0,255].
/// A constant spectrum maps to an all-zero image.
inline ImageBuffer log_magnitude(const Spectrum& spec) {
  std::vector<double> mag(spec.coefficients.size());
  for (std::size_t i = 0; i < mag.size(); ++i) mag[i] = std::abs(spec.coefficients[i]);
  const auto grid = detail::log_magnitude_grid(mag, spec.width, spec.height);
  return detail::rescale_to_display(grid, spec.width, spec.height);
}

/// Mean of |F| per bin over a set of equally sized images, shown with the
/// log-magnitude display mapping. 3-channel inputs are reduced to luma.
/// The reduction runs in ascending image-index order.
inline ImageBuffer average_spectrum(const std::vector<ImageBuffer>& imgs) {
  if (imgs.empty()) throw InvalidInput("average_spectrum: empty image list");
  const int w = imgs[0].width, h = imgs[0].height;
  std::vector<double> acc(static_cast<std::size_t>(w) * h, 0.0);
  for (const auto& img : imgs) {
    if (img.width != w || img.height != h)
      throw InvalidInput("average_spectrum: image size mismatch");
    const Spectrum s = fft2d(img.channels == 3 ? to_luma(img) : img);
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += std::abs(s.coefficients[i]);
  }
  const double inv = 1.0 / static_cast<double>(imgs.size());
  for (auto& a : acc) a *= inv;
  const auto grid = detail::log_magnitude_grid(acc, w, h);
  return detail::rescale_to_display(grid, w, h);
}

/// Power accumulated into integer-radius annuli around DC, frequencies
/// folded to signed coordinates. Every bin of the spectrum contributes to
/// exactly one annulus.
inline RadialProfile azimuthal_average(const Spectrum& spec) {
  const int n = spec.width;
  const int half = n / 2;
  RadialProfile profile;
  profile.bins.assign(static_cast<std::size_t>(half), 0.0);
  std::vector<std::size_t> counts(static_cast<std::size_t>(half), 0);
  for (int v = 0; v < spec.height; ++v) {
    const int sv = (v <= spec.height / 2) ? v : v - spec.height;
    for (int u = 0; u < n; ++u) {
      const int su = (u <= half) ? u : u - n;
      const double r = std::sqrt(static_cast<double>(su) * su +
                                 static_cast<double>(sv) * sv);
      const int k = std::min(static_cast<int>(r), half - 1);
      const double p = std::norm(spec.at(u, v));
      profile.bins[static_cast<std::size_t>(k)] += p;
      counts[static_cast<std::size_t>(k)] += 1;
      profile.total_power += p;
    }
  }
  for (std::size_t k = 0; k < profile.bins.size(); ++k)
    if (counts[k] > 0) profile.bins[k] /= static_cast<double>(counts[k]);
  if (profile.bins[0] != 0.0) {
    const double dc = profile.bins[0];
    for (auto& b : profile.bins) b /= dc;
  }
  return profile;
}

/// The 8 non-DC sub-band centers probed by the peak-grid features: the
/// half-band corners of {0, N/2}^2 and the remaining quarter-band points of
/// {0, N/4, N/2}^2, in this fixed order.
inline std::vector<std::pair<int, int>> peak_grid_centers(int n) {
  const int h = n / 2, q = n / 4;
  return {{h, 0}, {0, h}, {h, h}, {q, 0}, {0, q}, {q, q}, {q, h}, {h, q}};
}

/// Mean power in the 3x3 window at (cu,cv) over the median power in the
/// surrounding 11x11 annulus, with periodic indexing. Zero when the window
/// itself carries no power.
inline double peak_ratio(const Spectrum& spec, int cu, int cv) {
  double window = 0.0;
  for (int dv = -1; dv <= 1; ++dv)
    for (int du = -1; du <= 1; ++du)
      window += std::norm(spec.at_wrapped(cu + du, cv + dv));
  window /= 9.0;
  std::vector<double> annulus;
  annulus.reserve(112);
  for (int dv = -5; dv <= 5; ++dv)
    for (int du = -5; du <= 5; ++du) {
      if (std::abs(du) <= 1 && std::abs(dv) <= 1) continue;
      annulus.push_back(std::norm(spec.at_wrapped(cu + du, cv + dv)));
    }
  std::nth_element(annulus.begin(), annulus.begin() + annulus.size() / 2,
                   annulus.end());
  const double med = annulus[annulus.size() / 2];
  if (window == 0.0) return 0.0;
  return window / std::max(med, 1e-30);
}

/// Spectral feature vector of a single-channel power-of-two image:
/// kRadial yields the N/2 azimuthal profile bins, kPeakGrid the 8 sub-band
/// peak-to-neighborhood ratios.
inline std::vector<double> spectral_features(const ImageBuffer& img,
                                             SpectralFeatureKind kind) {
  const Spectrum spec = fft2d(img);
  if (kind == SpectralFeatureKind::kRadial) return azimuthal_average(spec).bins;
  std::vector<double> feats;
  for (const auto& [cu, cv] : peak_grid_centers(spec.width))
    feats.push_back(peak_ratio(spec, cu, cv));
  return feats;
}

}  // namespace ganbench
