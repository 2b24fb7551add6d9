/*
 * Deterministic synthetic corpus: "real" images drawn from a 1/f spectral
 * model, and "fake" images produced by an upsampling generator stack whose
 * zero-insertion lattice, post-kernel and constant bias imprint periodic
 * artifacts of controllable strength.
 *
 * Licensed under the terms of the Apache 2.0 License.
 * See LICENSE file in the project root for terms.
 */
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ganbench/errors.hpp"
#include "ganbench/fft.hpp"
#include "ganbench/image.hpp"
#include "ganbench/manifest.hpp"
#include "ganbench/parallel.hpp"
#include "ganbench/rng.hpp"

namespace ganbench {

enum class Upsampler { kZeroInsertion, kNearest, kBilinear };

inline std::string upsampler_name(Upsampler u) {
  switch (u) {
    case Upsampler::kZeroInsertion: return "zero-insertion";
    case Upsampler::kNearest: return "nearest";
    case Upsampler::kBilinear: return "bilinear";
  }
  throw InvalidInput("upsampler_name: unknown upsampler");
}

inline Upsampler upsampler_from_string(const std::string& s) {
  if (s == "zero-insertion") return Upsampler::kZeroInsertion;
  if (s == "nearest") return Upsampler::kNearest;
  if (s == "bilinear") return Upsampler::kBilinear;
  throw InvalidInput("unknown upsampler: '" + s +
                     "' (expected zero-insertion, nearest or bilinear)");
}

// Two stock post-kernels with distinct periodic responses; generators that
// differ only here leave distinct fingerprints.
constexpr std::array<double, 9> kPostKernelA = {1, 2, 1, 2, 5, 2, 1, 2, 1};
constexpr std::array<double, 9> kPostKernelB = {2, 1, 1, 1, 5, 2, 1, 2, 2};

struct GeneratorConfig {
  int base_side = 16;
  Upsampler upsampler = Upsampler::kZeroInsertion;
  std::array<double, 9> post_kernel = kPostKernelA;
  int stages = 2;
  double artifact_gain = 0.8;
  double bias = 1.5;  // constant added to the base texture, in base-std units
  std::string tag = "genA";

  int output_side() const { return base_side << stages; }

  void validate() const {
    if (base_side < 4 || (base_side & (base_side - 1)) != 0)
      throw InvalidInput("GeneratorConfig: base side must be a power of two, at least 4");
    if (stages < 1 || stages > 2)
      throw InvalidInput("GeneratorConfig: stages must be 1 or 2");
    if (!(artifact_gain >= 0.0 && artifact_gain <= 1.0))
      throw InvalidInput("GeneratorConfig: artifact gain must lie in [0,1]");
    if (!std::isfinite(bias))
      throw InvalidInput("GeneratorConfig: bias must be finite");
    double norm = 0.0;
    for (double k : post_kernel) {
      if (!std::isfinite(k)) throw InvalidInput("GeneratorConfig: kernel must be finite");
      norm += std::abs(k);
    }
    if (norm == 0.0) throw InvalidInput("GeneratorConfig: post kernel must be non-zero");
    if (tag.empty()) throw InvalidInput("GeneratorConfig: tag must be non-empty");
  }
};

struct SynthSpec {
  int train_per_class = 1000;
  int test_per_class = 500;
  int side = 64;
  double alpha_lo = 0.8;
  double alpha_hi = 1.4;
  std::vector<GeneratorConfig> train_generators;
  std::vector<GeneratorConfig> test_generators;
  std::uint64_t master_seed = 1;

  void validate() const {
    if (train_per_class < 1 || test_per_class < 1)
      throw InvalidInput("SynthSpec: per-class counts must be at least 1");
    if (side < 8 || (side & (side - 1)) != 0)
      throw InvalidInput("SynthSpec: side must be a power of two, at least 8");
    if (!(alpha_lo >= 0.5 && alpha_hi <= 2.0 && alpha_lo <= alpha_hi))
      throw InvalidInput("SynthSpec: alpha range must lie within [0.5,2]");
    if (train_generators.empty() || test_generators.empty())
      throw InvalidInput("SynthSpec: both splits need at least one generator");
    for (const auto& lists : {&train_generators, &test_generators})
      for (const auto& g : *lists) {
        g.validate();
        if (g.output_side() != side)
          throw InvalidInput("SynthSpec: generator '" + g.tag + "' produces side " +
                             std::to_string(g.output_side()) + ", dataset wants " +
                             std::to_string(side));
      }
  }
};

namespace detail {

/// Zero-mean Gaussian field whose spectral amplitude falls off as
/// 1/radius^alpha; arbitrary overall scale. Built by shaping the spectrum
/// of spatial white noise, which keeps Hermitian symmetry for free.
inline std::vector<double> shaped_noise_field(int side, double alpha, Rng rng) {
  const std::size_t n = static_cast<std::size_t>(side) * side;
  std::vector<std::complex<double>> freq(n);
  for (std::size_t i = 0; i < n; ++i) freq[i] = {rng.normal(), 0.0};
  fft_2d(freq, side, side, false);
  const int half = side / 2;
  for (int v = 0; v < side; ++v)
    for (int u = 0; u < side; ++u) {
      const int fu = u <= half ? u : u - side;
      const int fv = v <= half ? v : v - side;
      const double r = std::sqrt(static_cast<double>(fu) * fu +
                                 static_cast<double>(fv) * fv);
      freq[static_cast<std::size_t>(v) * side + u] *=
          (r == 0.0) ? 0.0 : std::pow(r, -alpha);
    }
  fft_2d(freq, side, side, true);
  std::vector<double> field(n);
  for (std::size_t i = 0; i < n; ++i) field[i] = freq[i].real();
  return field;
}

/// In-place shift/scale to mean 0, population std 1. A flat field maps to
/// all zeros.
inline void standardize_field(std::vector<double>& field) {
  double mean = 0.0;
  for (double v : field) mean += v;
  mean /= static_cast<double>(field.size());
  double var = 0.0;
  for (double v : field) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / static_cast<double>(field.size()));
  if (sd < 1e-12) {
    for (auto& v : field) v = 0.0;
    return;
  }
  for (auto& v : field) v = (v - mean) / sd;
}

/// Channel replication with seeded tints that sum to zero, then the final
/// clamp to [0,255]. The pre-clamp mean over all channels is exactly the
/// field mean.
inline ImageBuffer finish_image(const std::vector<double>& field, int side, Rng tint_rng) {
  double tint[3];
  double avg = 0.0;
  for (auto& t : tint) {
    t = tint_rng.uniform(-6.0, 6.0);
    avg += t;
  }
  avg /= 3.0;
  for (auto& t : tint) t -= avg;  // offsets stay within +-8
  ImageBuffer img(side, side, 3);
  for (int y = 0; y < side; ++y)
    for (int x = 0; x < side; ++x) {
      const double v = field[static_cast<std::size_t>(y) * side + x];
      for (int c = 0; c < 3; ++c)
        img.at(x, y, c) = std::clamp(v + tint[c], 0.0, 255.0);
    }
  return img;
}

}  // namespace detail

/// Doubles each side. Zero-insertion places samples on the even lattice
/// and zeros elsewhere; nearest replicates each sample 2x2; bilinear uses
/// the shared resize operator.
inline std::vector<double> upsample2x(const std::vector<double>& field, int side,
                                      Upsampler up) {
  if (field.size() != static_cast<std::size_t>(side) * side)
    throw InvalidInput("upsample2x: field size does not match side");
  const int out = side * 2;
  std::vector<double> res(static_cast<std::size_t>(out) * out, 0.0);
  switch (up) {
    case Upsampler::kZeroInsertion:
      for (int y = 0; y < side; ++y)
        for (int x = 0; x < side; ++x)
          res[static_cast<std::size_t>(2 * y) * out + 2 * x] =
              field[static_cast<std::size_t>(y) * side + x];
      break;
    case Upsampler::kNearest:
      for (int y = 0; y < out; ++y)
        for (int x = 0; x < out; ++x)
          res[static_cast<std::size_t>(y) * out + x] =
              field[static_cast<std::size_t>(y / 2) * side + x / 2];
      break;
    case Upsampler::kBilinear: {
      ImageBuffer buf(side, side, 1);
      buf.samples = field;
      res = resize_bilinear(buf, 2.0).samples;
      break;
    }
  }
  return res;
}

/// 3x3 convolution with zero padding; output size equals input size.
inline std::vector<double> convolve3x3(const std::vector<double>& field, int side,
                                       const std::array<double, 9>& kernel) {
  if (field.size() != static_cast<std::size_t>(side) * side)
    throw InvalidInput("convolve3x3: field size does not match side");
  std::vector<double> out(field.size(), 0.0);
  for (int y = 0; y < side; ++y)
    for (int x = 0; x < side; ++x) {
      double acc = 0.0;
      for (int ky = 0; ky < 3; ++ky)
        for (int kx = 0; kx < 3; ++kx) {
          const int sy = y + ky - 1, sx = x + kx - 1;
          if (sy < 0 || sy >= side || sx < 0 || sx >= side) continue;
          acc += kernel[ky * 3 + kx] * field[static_cast<std::size_t>(sy) * side + sx];
        }
      out[static_cast<std::size_t>(y) * side + x] = acc;
    }
  return out;
}

/// Natural-model sample: 1/f^alpha field normalized to mean 128, std 40,
/// replicated to three tinted channels and clamped.
inline ImageBuffer gen_real(std::uint64_t seed, int side, double alpha) {
  if (side < 8 || (side & (side - 1)) != 0)
    throw InvalidInput("gen_real: side must be a power of two, at least 8");
  if (!(alpha >= 0.5 && alpha <= 2.0))
    throw InvalidInput("gen_real: alpha must lie in [0.5,2]");
  Rng rng(seed);
  std::vector<double> field = detail::shaped_noise_field(side, alpha, rng.child("field"));
  detail::standardize_field(field);
  for (auto& v : field) v = v * 40.0 + 128.0;
  return detail::finish_image(field, side, rng.child("tint"));
}

/// Generator sample: biased base texture pushed through `stages` rounds of
/// 2x upsampling plus the post kernel, blended against an independent
/// full-side background by artifact_gain, then finished like gen_real.
/// Both blend inputs are standardized first so the gain compares
/// like-scaled fields.
inline ImageBuffer gen_fake(std::uint64_t seed, const GeneratorConfig& config,
                            double alpha = 1.0) {
  config.validate();
  if (!(alpha >= 0.5 && alpha <= 2.0))
    throw InvalidInput("gen_fake: alpha must lie in [0.5,2]");
  Rng rng(seed);
  std::vector<double> field =
      detail::shaped_noise_field(config.base_side, alpha, rng.child("base"));
  detail::standardize_field(field);
  for (auto& v : field) v += config.bias;
  int side = config.base_side;
  for (int s = 0; s < config.stages; ++s) {
    field = upsample2x(field, side, config.upsampler);
    side *= 2;
    field = convolve3x3(field, side, config.post_kernel);
  }
  detail::standardize_field(field);
  std::vector<double> background =
      detail::shaped_noise_field(side, alpha, rng.child("background"));
  detail::standardize_field(background);
  const double g = config.artifact_gain;
  for (std::size_t i = 0; i < field.size(); ++i)
    field[i] = g * field[i] + (1.0 - g) * background[i];
  detail::standardize_field(field);
  for (auto& v : field) v = v * 40.0 + 128.0;
  return detail::finish_image(field, side, rng.child("tint"));
}

struct SynthResult {
  DatasetManifest train;
  DatasetManifest test;
  std::string train_manifest_path;
  std::string test_manifest_path;
};

/// Per-image seed: pure hash of (master seed, split, class, index), so a
/// given image never changes when counts grow.
inline std::uint64_t image_seed(std::uint64_t master, const std::string& split,
                                int label, int index) {
  return mix_seed(mix_seed(mix_seed(master, hash_tag(split)),
                           static_cast<std::uint64_t>(label)),
                  static_cast<std::uint64_t>(index));
}

/// Writes PPM files under outdir/train and outdir/test plus one manifest
/// per split (train.tsv, test.tsv) with outdir-relative paths. Fake images
/// cycle through the split's generator list by index.
inline SynthResult gen_dataset(const SynthSpec& spec, const std::string& outdir) {
  spec.validate();
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(fs::path(outdir) / "train", ec);
  if (ec) throw IoError("cannot create directory " + (fs::path(outdir) / "train").string() +
                        ": " + ec.message());
  fs::create_directories(fs::path(outdir) / "test", ec);
  if (ec) throw IoError("cannot create directory " + (fs::path(outdir) / "test").string() +
                        ": " + ec.message());

  struct Job {
    std::string split;
    int label = 0;
    int index = 0;
    const GeneratorConfig* gen = nullptr;  // null for real images
  };
  std::vector<Job> jobs;
  const auto add_split = [&](const std::string& split, int per_class,
                             const std::vector<GeneratorConfig>& gens) {
    for (int i = 0; i < per_class; ++i) jobs.push_back({split, 0, i, nullptr});
    for (int i = 0; i < per_class; ++i)
      jobs.push_back({split, 1, i, &gens[static_cast<std::size_t>(i) % gens.size()]});
  };
  add_split("train", spec.train_per_class, spec.train_generators);
  add_split("test", spec.test_per_class, spec.test_generators);

  std::vector<ManifestEntry> entries(jobs.size());
  parallel_for(jobs.size(), [&](std::size_t j) {
    const Job& job = jobs[j];
    const std::uint64_t seed = image_seed(spec.master_seed, job.split, job.label, job.index);
    const double alpha = Rng(seed).child("alpha").uniform(spec.alpha_lo, spec.alpha_hi);
    ImageBuffer img;
    std::string source;
    if (job.gen == nullptr) {
      img = gen_real(seed, spec.side, alpha);
      source = "real";
    } else {
      img = gen_fake(seed, *job.gen, alpha);
      source = job.gen->tag;
    }
    char name[64];
    std::snprintf(name, sizeof(name), "%s_%05d.ppm", job.label == 0 ? "real" : "fake",
                  job.index);
    const std::string rel = job.split + "/" + name;
    try {
      save_image(img, (fs::path(outdir) / rel).string());
    } catch (const Error& e) {
      throw IoError("gen_dataset: writing '" + rel + "' failed: " + e.what());
    }
    entries[j] = ManifestEntry{rel, job.label, source, seed};
  });

  SynthResult result;
  for (auto& entry : entries) {
    if (entry.path.compare(0, 6, "train/") == 0)
      result.train.entries.push_back(entry);
    else
      result.test.entries.push_back(entry);
  }
  result.train_manifest_path = (fs::path(outdir) / "train.tsv").string();
  result.test_manifest_path = (fs::path(outdir) / "test.tsv").string();
  save_manifest(result.train, result.train_manifest_path);
  save_manifest(result.test, result.test_manifest_path);
  return result;
}

}  // namespace ganbench
