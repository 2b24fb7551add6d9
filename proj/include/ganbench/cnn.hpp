/*
 * Tiny three-conv CNN detector trained from scratch, with the first-layer
 * variants under study: stride-2 entry (down-first), stride-1 entry
 * (no-down), and a fixed high-pass residual layer before a stride-1 entry
 * (residual-first). Convolutions are 3x3, zero-padded by 1, and run as
 * im2col + GEMM.
 *
 * Licensed under the terms of the Apache 2.0 License.
 * See LICENSE file in the project root for terms.
 */
#pragma once

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ganbench/degrade.hpp"
#include "ganbench/errors.hpp"
#include "ganbench/gemm.hpp"
#include "ganbench/image.hpp"
#include "ganbench/manifest.hpp"
#include "ganbench/parallel.hpp"
#include "ganbench/rng.hpp"
#include "ganbench/trainconfig.hpp"

namespace ganbench {

enum class CnnVariant { kDownFirst, kNoDown, kResidualFirst };

inline std::string cnn_variant_name(CnnVariant v) {
  switch (v) {
    case CnnVariant::kDownFirst: return "down-first";
    case CnnVariant::kNoDown: return "no-down";
    case CnnVariant::kResidualFirst: return "residual-first";
  }
  throw InvalidInput("cnn_variant_name: unknown variant");
}

inline CnnVariant cnn_variant_from_string(const std::string& s) {
  if (s == "down-first") return CnnVariant::kDownFirst;
  if (s == "no-down") return CnnVariant::kNoDown;
  if (s == "residual-first") return CnnVariant::kResidualFirst;
  throw InvalidInput("unknown cnn variant: '" + s +
                     "' (expected down-first, no-down or residual-first)");
}

struct ConvParams {
  int in_c = 0, out_c = 0, stride = 1;
  std::vector<double> w;  // [out_c][in_c*9], kernel row-major ky,kx
  std::vector<double> b;  // [out_c]
};

struct TinyCnnParams {
  CnnVariant variant = CnnVariant::kNoDown;
  int input_side = 64;
  ConvParams conv1, conv2, conv3;
  std::vector<double> affine_w;  // [64]
  double affine_b = 0.0;

  /// Trainable tensors in serialization and gradient order.
  std::vector<std::span<double>> trainable_views() {
    return {std::span<double>(conv1.w), std::span<double>(conv1.b),
            std::span<double>(conv2.w), std::span<double>(conv2.b),
            std::span<double>(conv3.w), std::span<double>(conv3.b),
            std::span<double>(affine_w), std::span<double>(&affine_b, 1)};
  }
  std::vector<std::span<const double>> trainable_views() const {
    return {std::span<const double>(conv1.w), std::span<const double>(conv1.b),
            std::span<const double>(conv2.w), std::span<const double>(conv2.b),
            std::span<const double>(conv3.w), std::span<const double>(conv3.b),
            std::span<const double>(affine_w), std::span<const double>(&affine_b, 1)};
  }
  std::size_t trainable_count() const {
    std::size_t n = 0;
    for (const auto& v : trainable_views()) n += v.size();
    return n;
  }
};

namespace detail {

constexpr double kFixedHighpass[9] = {0, -1, 0, -1, 4, -1, 0, -1, 0};

inline int conv_out_side(int in, int stride) { return (in + 2 - 3) / stride + 1; }

/// Depthwise 3x3 with the fixed high-pass kernel, zero padding, stride 1.
inline void fixed_residual_layer(const std::vector<double>& in, int channels,
                                 int side, std::vector<double>& out) {
  out.assign(in.size(), 0.0);
  for (int c = 0; c < channels; ++c) {
    const double* src = &in[static_cast<std::size_t>(c) * side * side];
    double* dst = &out[static_cast<std::size_t>(c) * side * side];
    for (int y = 0; y < side; ++y)
      for (int x = 0; x < side; ++x) {
        double acc = 0.0;
        for (int ky = 0; ky < 3; ++ky)
          for (int kx = 0; kx < 3; ++kx) {
            const int sy = y + ky - 1, sx = x + kx - 1;
            if (sy < 0 || sy >= side || sx < 0 || sx >= side) continue;
            acc += kFixedHighpass[ky * 3 + kx] * src[sy * side + sx];
          }
        dst[y * side + x] = acc;
      }
  }
}

inline void im2col(const double* in, int channels, int in_h, int in_w, int stride,
                   double* col, int out_h, int out_w) {
  const std::size_t patch = static_cast<std::size_t>(out_h) * out_w;
  for (int c = 0; c < channels; ++c)
    for (int ky = 0; ky < 3; ++ky)
      for (int kx = 0; kx < 3; ++kx) {
        double* row = col + (static_cast<std::size_t>(c) * 9 + ky * 3 + kx) * patch;
        for (int oy = 0; oy < out_h; ++oy) {
          const int sy = oy * stride + ky - 1;
          for (int ox = 0; ox < out_w; ++ox) {
            const int sx = ox * stride + kx - 1;
            row[oy * out_w + ox] =
                (sy < 0 || sy >= in_h || sx < 0 || sx >= in_w)
                    ? 0.0
                    : in[(static_cast<std::size_t>(c) * in_h + sy) * in_w + sx];
          }
        }
      }
}

inline void col2im_add(const double* dcol, int channels, int in_h, int in_w,
                       int stride, double* din, int out_h, int out_w) {
  const std::size_t patch = static_cast<std::size_t>(out_h) * out_w;
  for (int c = 0; c < channels; ++c)
    for (int ky = 0; ky < 3; ++ky)
      for (int kx = 0; kx < 3; ++kx) {
        const double* row = dcol + (static_cast<std::size_t>(c) * 9 + ky * 3 + kx) * patch;
        for (int oy = 0; oy < out_h; ++oy) {
          const int sy = oy * stride + ky - 1;
          if (sy < 0 || sy >= in_h) continue;
          for (int ox = 0; ox < out_w; ++ox) {
            const int sx = ox * stride + kx - 1;
            if (sx < 0 || sx >= in_w) continue;
            din[(static_cast<std::size_t>(c) * in_h + sy) * in_w + sx] +=
                row[oy * out_w + ox];
          }
        }
      }
}

struct ConvTrace {
  std::vector<double> col, z, a;
  int out_h = 0, out_w = 0;
};

inline void conv_forward(const ConvParams& p, const std::vector<double>& in,
                         int in_h, int in_w, ConvTrace& tr) {
  tr.out_h = conv_out_side(in_h, p.stride);
  tr.out_w = conv_out_side(in_w, p.stride);
  const std::size_t patch = static_cast<std::size_t>(tr.out_h) * tr.out_w;
  const std::size_t kdim = static_cast<std::size_t>(p.in_c) * 9;
  tr.col.resize(kdim * patch);
  im2col(in.data(), p.in_c, in_h, in_w, p.stride, tr.col.data(), tr.out_h, tr.out_w);
  tr.z.resize(static_cast<std::size_t>(p.out_c) * patch);
  gemm(false, false, p.out_c, patch, kdim, 1.0, p.w.data(), kdim, tr.col.data(),
       patch, 0.0, tr.z.data(), patch);
  tr.a.resize(tr.z.size());
  for (int oc = 0; oc < p.out_c; ++oc)
    for (std::size_t i = 0; i < patch; ++i) {
      const double v = tr.z[oc * patch + i] + p.b[oc];
      tr.z[oc * patch + i] = v;
      tr.a[oc * patch + i] = v > 0.0 ? v : 0.0;
    }
}

struct CnnTrace {
  std::vector<double> x0, residual;
  ConvTrace s1, s2, s3;
  std::vector<double> gap;
  double logit = 0.0;
};

inline double cnn_forward_planar(const TinyCnnParams& p, const std::vector<double>& chw,
                                 CnnTrace& tr) {
  const int side = p.input_side;
  const std::vector<double>* in = &chw;
  if (p.variant == CnnVariant::kResidualFirst) {
    fixed_residual_layer(chw, 3, side, tr.residual);
    in = &tr.residual;
  }
  conv_forward(p.conv1, *in, side, side, tr.s1);
  conv_forward(p.conv2, tr.s1.a, tr.s1.out_h, tr.s1.out_w, tr.s2);
  conv_forward(p.conv3, tr.s2.a, tr.s2.out_h, tr.s2.out_w, tr.s3);
  const std::size_t patch = static_cast<std::size_t>(tr.s3.out_h) * tr.s3.out_w;
  tr.gap.assign(p.conv3.out_c, 0.0);
  for (int c = 0; c < p.conv3.out_c; ++c) {
    double acc = 0.0;
    for (std::size_t i = 0; i < patch; ++i) acc += tr.s3.a[c * patch + i];
    tr.gap[c] = acc / static_cast<double>(patch);
  }
  double z = p.affine_b;
  for (int c = 0; c < p.conv3.out_c; ++c) z += p.affine_w[c] * tr.gap[c];
  tr.logit = z;
  return z;
}

inline std::vector<double> to_planar_unit(const ImageBuffer& img) {
  std::vector<double> chw(img.samples.size());
  const std::size_t plane = static_cast<std::size_t>(img.width) * img.height;
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < img.channels; ++c)
        chw[c * plane + static_cast<std::size_t>(y) * img.width + x] =
            img.at(x, y, c) / 255.0;
  return chw;
}

inline void check_cnn_input(const TinyCnnParams& p, const ImageBuffer& img) {
  if (img.channels != 3)
    throw InvalidInput("cnn input must be 3-channel, got " +
                       std::to_string(img.channels));
  if (img.width != p.input_side || img.height != p.input_side)
    throw InvalidInput("cnn input must be " + std::to_string(p.input_side) + "x" +
                       std::to_string(p.input_side) + ", got " +
                       std::to_string(img.width) + "x" + std::to_string(img.height));
}

}  // namespace detail

/// Fresh network with He-uniform weights and zero biases; the draw order is
/// conv1, conv2, conv3, affine so a given seed fixes every parameter.
inline TinyCnnParams make_cnn(CnnVariant variant, int input_side, Rng rng) {
  if (input_side < 8 || (input_side & (input_side - 1)) != 0)
    throw InvalidInput("make_cnn: input side must be a power of two, at least 8");
  TinyCnnParams p;
  p.variant = variant;
  p.input_side = input_side;
  const int s1 = variant == CnnVariant::kDownFirst ? 2 : 1;
  p.conv1 = {3, 16, s1, {}, {}};
  p.conv2 = {16, 32, 2, {}, {}};
  p.conv3 = {32, 64, 2, {}, {}};
  for (ConvParams* conv : {&p.conv1, &p.conv2, &p.conv3}) {
    const std::size_t fan_in = static_cast<std::size_t>(conv->in_c) * 9;
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
    conv->w.resize(static_cast<std::size_t>(conv->out_c) * fan_in);
    for (auto& v : conv->w) v = rng.uniform(-limit, limit);
    conv->b.assign(conv->out_c, 0.0);
  }
  const double limit = std::sqrt(6.0 / 64.0);
  p.affine_w.resize(64);
  for (auto& v : p.affine_w) v = rng.uniform(-limit, limit);
  p.affine_b = 0.0;
  return p;
}

/// Pre-sigmoid logit for one image; samples are scaled by 1/255 internally.
inline double cnn_forward(const TinyCnnParams& p, const ImageBuffer& img) {
  detail::check_cnn_input(p, img);
  detail::CnnTrace tr;
  return detail::cnn_forward_planar(p, detail::to_planar_unit(img), tr);
}

/// Exact reverse-mode gradient of binary cross-entropy at the logit with
/// respect to every trainable parameter, flattened in trainable_views
/// order. Returns the loss; optionally reports the logit.
inline double cnn_gradient(const TinyCnnParams& p, const ImageBuffer& img, int label,
                           std::vector<double>& grad, double* logit_out = nullptr) {
  detail::check_cnn_input(p, img);
  if (label != 0 && label != 1)
    throw InvalidInput("cnn_gradient: label must be 0 or 1");
  detail::CnnTrace tr;
  const std::vector<double> chw = detail::to_planar_unit(img);
  const double logit = detail::cnn_forward_planar(p, chw, tr);
  if (logit_out) *logit_out = logit;
  const double y = static_cast<double>(label);
  const double loss = bce_with_logits(logit, y);

  grad.assign(p.trainable_count(), 0.0);
  auto views = p.trainable_views();
  // Slices of the flat gradient, in the same order as trainable_views.
  std::vector<double*> slice(views.size());
  {
    std::size_t off = 0;
    for (std::size_t i = 0; i < views.size(); ++i) {
      slice[i] = grad.data() + off;
      off += views[i].size();
    }
  }
  double* d_conv1_w = slice[0];
  double* d_conv1_b = slice[1];
  double* d_conv2_w = slice[2];
  double* d_conv2_b = slice[3];
  double* d_conv3_w = slice[4];
  double* d_conv3_b = slice[5];
  double* d_affine_w = slice[6];
  double* d_affine_b = slice[7];

  const double dlogit = sigmoid(logit) - y;
  const std::size_t patch3 = static_cast<std::size_t>(tr.s3.out_h) * tr.s3.out_w;
  for (int c = 0; c < p.conv3.out_c; ++c) d_affine_w[c] = dlogit * tr.gap[c];
  *d_affine_b = dlogit;

  // Through global average pooling and conv3's ReLU.
  std::vector<double> dz3(static_cast<std::size_t>(p.conv3.out_c) * patch3);
  for (int c = 0; c < p.conv3.out_c; ++c) {
    const double da = dlogit * p.affine_w[c] / static_cast<double>(patch3);
    for (std::size_t i = 0; i < patch3; ++i)
      dz3[c * patch3 + i] = tr.s3.z[c * patch3 + i] > 0.0 ? da : 0.0;
  }

  const auto conv_backward = [](const ConvParams& cp, const detail::ConvTrace& trc,
                                const std::vector<double>& dz, double* dw, double* db,
                                std::vector<double>* dcol) {
    const std::size_t patch = static_cast<std::size_t>(trc.out_h) * trc.out_w;
    const std::size_t kdim = static_cast<std::size_t>(cp.in_c) * 9;
    gemm(false, true, cp.out_c, kdim, patch, 1.0, dz.data(), patch, trc.col.data(),
         patch, 0.0, dw, kdim);
    for (int oc = 0; oc < cp.out_c; ++oc) {
      double acc = 0.0;
      for (std::size_t i = 0; i < patch; ++i) acc += dz[oc * patch + i];
      db[oc] = acc;
    }
    if (dcol) {
      dcol->resize(kdim * patch);
      gemm(true, false, kdim, patch, cp.out_c, 1.0, cp.w.data(), kdim, dz.data(),
           patch, 0.0, dcol->data(), patch);
    }
  };

  std::vector<double> dcol;
  conv_backward(p.conv3, tr.s3, dz3, d_conv3_w, d_conv3_b, &dcol);
  std::vector<double> da2(tr.s2.a.size(), 0.0);
  detail::col2im_add(dcol.data(), p.conv3.in_c, tr.s2.out_h, tr.s2.out_w,
                     p.conv3.stride, da2.data(), tr.s3.out_h, tr.s3.out_w);
  const std::size_t patch2 = static_cast<std::size_t>(tr.s2.out_h) * tr.s2.out_w;
  std::vector<double> dz2(static_cast<std::size_t>(p.conv2.out_c) * patch2);
  for (std::size_t i = 0; i < dz2.size(); ++i)
    dz2[i] = tr.s2.z[i] > 0.0 ? da2[i] : 0.0;

  conv_backward(p.conv2, tr.s2, dz2, d_conv2_w, d_conv2_b, &dcol);
  std::vector<double> da1(tr.s1.a.size(), 0.0);
  detail::col2im_add(dcol.data(), p.conv2.in_c, tr.s1.out_h, tr.s1.out_w,
                     p.conv2.stride, da1.data(), tr.s2.out_h, tr.s2.out_w);
  const std::size_t patch1 = static_cast<std::size_t>(tr.s1.out_h) * tr.s1.out_w;
  std::vector<double> dz1(static_cast<std::size_t>(p.conv1.out_c) * patch1);
  for (std::size_t i = 0; i < dz1.size(); ++i)
    dz1[i] = tr.s1.z[i] > 0.0 ? da1[i] : 0.0;

  // The image is not a parameter, so conv1 needs no input gradient.
  conv_backward(p.conv1, tr.s1, dz1, d_conv1_w, d_conv1_b, nullptr);
  return loss;
}

/// Mean logit over a sliding grid of training-size patches.
inline double patch_score(const TinyCnnParams& p, const ImageBuffer& img, int patch,
                          int stride) {
  if (patch != p.input_side)
    throw InvalidInput("patch_score: patch " + std::to_string(patch) +
                       " does not match model input side " +
                       std::to_string(p.input_side));
  const std::vector<ImageBuffer> patches = extract_patches(img, patch, stride);
  double acc = 0.0;
  for (const auto& pb : patches) acc += cnn_forward(p, pb);
  return acc / static_cast<double>(patches.size());
}

/// Byte-quantized image held in memory; datasets are cached in this form
/// so repeated epochs do not reread files.
struct CachedImage {
  int width = 0, height = 0, channels = 0;
  std::vector<unsigned char> bytes;

  static CachedImage from(const ImageBuffer& img) {
    CachedImage c;
    c.width = img.width;
    c.height = img.height;
    c.channels = img.channels;
    c.bytes.resize(img.samples.size());
    for (std::size_t i = 0; i < img.samples.size(); ++i)
      c.bytes[i] = sample_to_byte(img.samples[i]);
    return c;
  }
  ImageBuffer to_buffer() const {
    ImageBuffer img(width, height, channels);
    for (std::size_t i = 0; i < bytes.size(); ++i)
      img.samples[i] = static_cast<double>(bytes[i]);
    return img;
  }
};

/// SGD with momentum over an in-memory dataset. Shuffling, initialization
/// and per-sample augmentation draw from independent child streams of
/// cfg.seed, and per-sample gradients are reduced in batch order, so the
/// parameter trajectory depends only on (data, cfg) and not on the worker
/// count.
inline TinyCnnParams train_cnn_images(const std::vector<CachedImage>& images,
                                      const std::vector<int>& labels,
                                      CnnVariant variant, const TrainConfig& cfg,
                                      std::vector<double>* epoch_loss = nullptr) {
  cfg.validate();
  if (images.size() != labels.size())
    throw InvalidInput("train_cnn: image/label count mismatch");
  if (images.size() < 2) throw InvalidInput("train_cnn: need at least 2 images");
  std::size_t pos = 0;
  for (int y : labels) {
    if (y != 0 && y != 1) throw InvalidInput("train_cnn: labels must be 0 or 1");
    pos += static_cast<std::size_t>(y);
  }
  if (pos == 0 || pos == labels.size())
    throw DegenerateData("train_cnn: training set contains a single class");
  for (const auto& img : images)
    if (img.channels != 3 || img.width != cfg.input_side || img.height != cfg.input_side)
      throw InvalidInput("train_cnn: every image must be 3-channel " +
                         std::to_string(cfg.input_side) + "x" +
                         std::to_string(cfg.input_side));

  Rng root(cfg.seed);
  TinyCnnParams params = make_cnn(variant, cfg.input_side, root.child("init"));
  const std::size_t n = images.size();
  const std::size_t nparam = params.trainable_count();
  std::vector<double> velocity(nparam, 0.0), batch_grad(nparam);
  const std::size_t max_batch = static_cast<std::size_t>(cfg.batch_size);
  std::vector<std::vector<double>> sample_grad(max_batch);
  std::vector<double> sample_loss(max_batch);
  if (epoch_loss) epoch_loss->clear();

  Rng shuffle_root = root.child("shuffle");
  Rng augment_root = root.child("augment");
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const std::vector<std::size_t> order =
        shuffle_root.child(static_cast<std::uint64_t>(epoch)).permutation(n);
    Rng epoch_aug = augment_root.child(static_cast<std::uint64_t>(epoch));
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < n; start += max_batch) {
      const std::size_t batch_n = std::min(max_batch, n - start);
      parallel_for(batch_n, [&](std::size_t j) {
        const std::size_t idx = order[start + j];
        ImageBuffer img = images[idx].to_buffer();
        if (cfg.augment) {
          Rng aug = epoch_aug.child(static_cast<std::uint64_t>(idx));
          img = apply_policy(img, *cfg.augment, aug);
        }
        sample_loss[j] = cnn_gradient(params, img, labels[idx], sample_grad[j]);
      });
      std::fill(batch_grad.begin(), batch_grad.end(), 0.0);
      for (std::size_t j = 0; j < batch_n; ++j) {
        loss_sum += sample_loss[j];
        const std::vector<double>& g = sample_grad[j];
        for (std::size_t k = 0; k < nparam; ++k) batch_grad[k] += g[k];
      }
      const double inv_b = 1.0 / static_cast<double>(batch_n);
      auto views = params.trainable_views();
      std::size_t off = 0;
      for (auto& view : views)
        for (double& w : view) {
          const double g = batch_grad[off] * inv_b;
          velocity[off] = cfg.momentum * velocity[off] + g;
          w -= cfg.learning_rate * velocity[off];
          ++off;
        }
    }
    if (epoch_loss) epoch_loss->push_back(loss_sum / static_cast<double>(n));
  }
  return params;
}

/// Loads every manifest entry (paths resolved against base_dir when given)
/// and trains on the cached images.
inline TinyCnnParams train_cnn(const DatasetManifest& manifest, CnnVariant variant,
                               const TrainConfig& cfg,
                               const std::string& base_dir = "",
                               std::vector<double>* epoch_loss = nullptr) {
  std::vector<CachedImage> images;
  std::vector<int> labels;
  images.reserve(manifest.entries.size());
  labels.reserve(manifest.entries.size());
  for (const auto& entry : manifest.entries) {
    const std::string path =
        base_dir.empty() ? entry.path
                         : (std::filesystem::path(base_dir) / entry.path).string();
    try {
      images.push_back(CachedImage::from(load_image(path)));
    } catch (const Error& e) {
      throw IoError("train_cnn: cannot load '" + path + "': " + e.what());
    }
    labels.push_back(entry.label);
  }
  return train_cnn_images(images, labels, variant, cfg, epoch_loss);
}

}  // namespace ganbench
