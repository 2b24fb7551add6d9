/*
 * Radix-2 FFT and the 2D spectrum type.
 *
 * Licensed under the terms of the Apache 2.0 License.
 * See LICENSE file in the project root for terms.
 */
#pragma once

#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include "ganbench/errors.hpp"
#include "ganbench/image.hpp"

namespace ganbench {

/// Complex 2D frequency representation of one channel, DC at (0,0).
/// Forward transform carries no normalization; the inverse divides by N^2.
struct Spectrum {
  int width = 0;
  int height = 0;
  std::vector<std::complex<double>> coefficients;
  std::string provenance;

  std::complex<double>& at(int u, int v) {
    return coefficients[static_cast<std::size_t>(v) * width + u];
  }
  const std::complex<double>& at(int u, int v) const {
    return coefficients[static_cast<std::size_t>(v) * width + u];
  }
  /// Periodic (wrapping) lookup, for windows straddling the spectrum edge.
  const std::complex<double>& at_wrapped(int u, int v) const {
    const int uu = ((u % width) + width) % width;
    const int vv = ((v % height) + height) % height;
    return at(uu, vv);
  }
};

namespace detail {

inline bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

// Iterative in-place radix-2 decimation-in-time transform.
inline void fft_radix2(std::complex<double>* a, int n, bool inverse) {
  for (int i = 1, j = 0; i < n; ++i) {
    int bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (int len = 2; len <= n; len <<= 1) {
    const double ang = (inverse ? 2.0 : -2.0) * std::numbers::pi / len;
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (int i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (int k = 0; k < len / 2; ++k) {
        const std::complex<double> u = a[i + k];
        const std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

/// Row-column 2D transform over a row-major w x h grid. The inverse
/// includes the 1/(w*h) factor.
inline void fft_2d(std::vector<std::complex<double>>& data, int w, int h,
                   bool inverse) {
  if (!is_pow2(w) || !is_pow2(h))
    throw InvalidInput("fft_2d: dimensions must be powers of two, got " +
                       std::to_string(w) + "x" + std::to_string(h));
  if (data.size() != static_cast<std::size_t>(w) * h)
    throw InvalidInput("fft_2d: data size does not match dimensions");
  for (int y = 0; y < h; ++y) fft_radix2(data.data() + static_cast<std::size_t>(y) * w, w, inverse);
  std::vector<std::complex<double>> col(h);
  for (int x = 0; x < w; ++x) {
    for (int y = 0; y < h; ++y) col[y] = data[static_cast<std::size_t>(y) * w + x];
    fft_radix2(col.data(), h, inverse);
    for (int y = 0; y < h; ++y) data[static_cast<std::size_t>(y) * w + x] = col[y];
  }
  if (inverse) {
    const double norm = 1.0 / (static_cast<double>(w) * h);
    for (auto& c : data) c *= norm;
  }
}

}  // namespace detail

/// Exact 2D DFT of a square power-of-two single-channel image.
inline Spectrum fft2d(const ImageBuffer& img, std::string provenance = {}) {
  if (img.channels != 1) throw InvalidInput("fft2d: input must be single-channel");
  if (img.width != img.height || !detail::is_pow2(img.width))
    throw InvalidInput("fft2d: image must be square with power-of-two side, got " +
                       std::to_string(img.width) + "x" + std::to_string(img.height));
  Spectrum s;
  s.width = img.width;
  s.height = img.height;
  s.provenance = std::move(provenance);
  s.coefficients.resize(img.samples.size());
  for (std::size_t i = 0; i < img.samples.size(); ++i)
    s.coefficients[i] = std::complex<double>(img.samples[i], 0.0);
  detail::fft_2d(s.coefficients, s.width, s.height, /*inverse=*/false);
  return s;
}

/// Inverse transform back to the spatial domain (real part).
inline ImageBuffer ifft2d(const Spectrum& spec) {
  auto data = spec.coefficients;
  detail::fft_2d(data, spec.width, spec.height, /*inverse=*/true);
  ImageBuffer img(spec.width, spec.height, 1);
  for (std::size_t i = 0; i < data.size(); ++i) img.samples[i] = data[i].real();
  return img;
}

}  // namespace ganbench
