/*
 * Benchmark orchestration: detector roster, JSON configuration, training,
 * evaluation with per-detector test strategies, robustness sweeps and
 * artifact inspection. The command-line tool is a thin shell over the
 * cmd_* functions here.
 *
 * Licensed under the terms of the Apache 2.0 License.
 * See LICENSE file in the project root for terms.
 */
#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ganbench/cnn.hpp"
#include "ganbench/degrade.hpp"
#include "ganbench/errors.hpp"
#include "ganbench/features.hpp"
#include "ganbench/jpeg.hpp"
#include "ganbench/linear.hpp"
#include "ganbench/manifest.hpp"
#include "ganbench/metrics.hpp"
#include "ganbench/model_io.hpp"
#include "ganbench/parallel.hpp"
#include "ganbench/residual.hpp"
#include "ganbench/spectral.hpp"
#include "ganbench/synthgen.hpp"
#include "ganbench/trainconfig.hpp"

namespace ganbench {

enum class DetectorKind {
  kSpecRadial,
  kSpecPeaks,
  kCoocResidual,
  kCoocRgb,
  kSaturation,
  kFingerprint,
  kCnnDown,
  kCnnNoDown,
  kCnnResidual,
  kCnnPatch,
};

inline const std::vector<std::pair<std::string, DetectorKind>>& detector_roster() {
  static const std::vector<std::pair<std::string, DetectorKind>> roster = {
      {"spec-radial", DetectorKind::kSpecRadial},
      {"spec-peaks", DetectorKind::kSpecPeaks},
      {"cooc-residual", DetectorKind::kCoocResidual},
      {"cooc-rgb", DetectorKind::kCoocRgb},
      {"saturation", DetectorKind::kSaturation},
      {"fingerprint", DetectorKind::kFingerprint},
      {"cnn-down", DetectorKind::kCnnDown},
      {"cnn-nodown", DetectorKind::kCnnNoDown},
      {"cnn-residual", DetectorKind::kCnnResidual},
      {"cnn-patch", DetectorKind::kCnnPatch},
  };
  return roster;
}

inline std::string detector_name(DetectorKind kind) {
  for (const auto& [name, k] : detector_roster())
    if (k == kind) return name;
  throw InvalidInput("detector_name: unknown detector kind");
}

inline DetectorKind detector_from_string(const std::string& name) {
  for (const auto& [n, k] : detector_roster())
    if (n == name) return k;
  std::string all;
  for (const auto& [n, k] : detector_roster()) {
    if (!all.empty()) all += ", ";
    all += n;
  }
  throw InvalidInput("unknown detector '" + name + "' (expected one of: " + all + ")");
}

inline bool is_linear_detector(DetectorKind kind) {
  switch (kind) {
    case DetectorKind::kSpecRadial:
    case DetectorKind::kSpecPeaks:
    case DetectorKind::kCoocResidual:
    case DetectorKind::kCoocRgb:
    case DetectorKind::kSaturation:
      return true;
    default:
      return false;
  }
}

inline bool is_cnn_detector(DetectorKind kind) {
  switch (kind) {
    case DetectorKind::kCnnDown:
    case DetectorKind::kCnnNoDown:
    case DetectorKind::kCnnResidual:
    case DetectorKind::kCnnPatch:
      return true;
    default:
      return false;
  }
}

struct DetectorConfig {
  std::string name;
  DetectorKind kind = DetectorKind::kSpecPeaks;
  TrainConfig train;
};

/// Family baselines layered on the global training section: linear
/// detectors run many cheap full-batch steps; the patch CNN trains on
/// 32-pixel tiles.
inline TrainConfig default_train_for(DetectorKind kind, TrainConfig global) {
  if (is_linear_detector(kind)) {
    global.epochs = 300;
    global.learning_rate = 0.25;
  }
  if (kind == DetectorKind::kCnnPatch) global.input_side = 32;
  return global;
}

struct BenchConfig {
  std::uint64_t seed = 1;
  std::string outdir = "bench-out";
  bool has_inline_dataset = false;
  SynthSpec dataset;
  std::string dataset_dir;  // when set, points at a pre-built dataset
  TrainConfig train;
  std::vector<DetectorConfig> detectors;
  std::vector<int> jpeg_qualities;
  std::vector<double> scale_factors;
  std::string config_hash;

  std::string dataset_path() const {
    if (!dataset_dir.empty()) return dataset_dir;
    return (std::filesystem::path(outdir) / "dataset").string();
  }
  std::string model_path(const std::string& detector) const {
    return (std::filesystem::path(outdir) / (detector + ".gbm")).string();
  }
  const DetectorConfig& find_detector(const std::string& name) const {
    for (const auto& d : detectors)
      if (d.name == name) return d;
    throw InvalidInput("detector '" + name + "' is not in the configuration");
  }
};

/// The stock benchmark: unseen-generator protocol with two zero-insertion
/// generators that share everything but their post kernels, and the full
/// detector roster.
inline BenchConfig default_bench_config() {
  BenchConfig cfg;
  cfg.seed = 1;
  cfg.outdir = "bench-out";
  cfg.has_inline_dataset = true;
  cfg.dataset.train_per_class = 1000;
  cfg.dataset.test_per_class = 500;
  cfg.dataset.side = 64;
  cfg.dataset.alpha_lo = 0.8;
  cfg.dataset.alpha_hi = 1.4;
  GeneratorConfig gen_a;
  gen_a.tag = "genA";
  gen_a.post_kernel = kPostKernelA;
  GeneratorConfig gen_b;
  gen_b.tag = "genB";
  gen_b.post_kernel = kPostKernelB;
  cfg.dataset.train_generators = {gen_a};
  cfg.dataset.test_generators = {gen_b};
  cfg.dataset.master_seed = cfg.seed;
  cfg.train = TrainConfig{};
  cfg.train.epochs = 12;
  cfg.train.seed = cfg.seed;
  for (const auto& [name, kind] : detector_roster()) {
    DetectorConfig d;
    d.name = name;
    d.kind = kind;
    d.train = default_train_for(kind, cfg.train);
    cfg.detectors.push_back(d);
  }
  cfg.jpeg_qualities = {100, 90, 80, 70, 60, 50, 40, 30};
  cfg.scale_factors = {0.5, 0.7, 0.9, 1.0, 1.3, 1.6, 2.0};
  cfg.config_hash = "default";
  return cfg;
}

namespace detail {

inline std::optional<AugmentPolicy> augment_from_string(const std::string& s) {
  if (s == "none") return std::nullopt;
  if (s == "blur-jpeg") return blur_jpeg_policy();
  if (s == "strong") return strong_policy();
  throw InvalidInput("unknown augment policy '" + s +
                     "' (expected none, blur-jpeg or strong)");
}

inline void apply_train_overrides(TrainConfig& t, const nlohmann::json& j) {
  if (j.contains("epochs")) t.epochs = j.at("epochs").get<int>();
  if (j.contains("batch")) t.batch_size = j.at("batch").get<int>();
  if (j.contains("lr")) t.learning_rate = j.at("lr").get<double>();
  if (j.contains("momentum")) t.momentum = j.at("momentum").get<double>();
  if (j.contains("side")) t.input_side = j.at("side").get<int>();
  if (j.contains("seed")) t.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("augment"))
    t.augment = augment_from_string(j.at("augment").get<std::string>());
}

inline std::array<double, 9> parse_kernel(const nlohmann::json& j) {
  std::array<double, 9> k{};
  if (j.size() == 9) {
    for (int i = 0; i < 9; ++i) k[static_cast<std::size_t>(i)] = j.at(i).get<double>();
    return k;
  }
  if (j.size() == 3) {
    for (int r = 0; r < 3; ++r) {
      const auto& row = j.at(r);
      if (row.size() != 3)
        throw FormatError("post_kernel rows must have 3 entries");
      for (int c = 0; c < 3; ++c)
        k[static_cast<std::size_t>(r * 3 + c)] = row.at(c).get<double>();
    }
    return k;
  }
  throw FormatError("post_kernel must be a flat list of 9 or a 3x3 list");
}

inline GeneratorConfig parse_generator(const nlohmann::json& j) {
  GeneratorConfig g;
  if (j.contains("tag")) g.tag = j.at("tag").get<std::string>();
  if (j.contains("base_side")) g.base_side = j.at("base_side").get<int>();
  if (j.contains("stages")) g.stages = j.at("stages").get<int>();
  if (j.contains("upsampler"))
    g.upsampler = upsampler_from_string(j.at("upsampler").get<std::string>());
  if (j.contains("post_kernel")) g.post_kernel = parse_kernel(j.at("post_kernel"));
  if (j.contains("artifact_gain")) g.artifact_gain = j.at("artifact_gain").get<double>();
  if (j.contains("bias")) g.bias = j.at("bias").get<double>();
  return g;
}

}  // namespace detail

/// Builds a BenchConfig from its JSON form. Unknown detector names and
/// malformed sections fail with messages naming the offending key.
inline BenchConfig parse_bench_config(const nlohmann::json& j) {
  BenchConfig cfg = default_bench_config();
  cfg.detectors.clear();
  try {
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("outdir")) cfg.outdir = j.at("outdir").get<std::string>();
    cfg.dataset.master_seed = cfg.seed;
    cfg.train.seed = cfg.seed;
    if (j.contains("dataset")) {
      const auto& d = j.at("dataset");
      if (d.is_string()) {
        cfg.dataset_dir = d.get<std::string>();
        cfg.has_inline_dataset = false;
      } else {
        cfg.has_inline_dataset = true;
        if (d.contains("train_per_class"))
          cfg.dataset.train_per_class = d.at("train_per_class").get<int>();
        if (d.contains("test_per_class"))
          cfg.dataset.test_per_class = d.at("test_per_class").get<int>();
        if (d.contains("side")) cfg.dataset.side = d.at("side").get<int>();
        if (d.contains("alpha")) {
          const auto& a = d.at("alpha");
          if (a.size() != 2) throw FormatError("dataset.alpha must be [lo, hi]");
          cfg.dataset.alpha_lo = a.at(0).get<double>();
          cfg.dataset.alpha_hi = a.at(1).get<double>();
        }
        if (d.contains("seed"))
          cfg.dataset.master_seed = d.at("seed").get<std::uint64_t>();
        if (d.contains("train_generators")) {
          cfg.dataset.train_generators.clear();
          for (const auto& g : d.at("train_generators"))
            cfg.dataset.train_generators.push_back(detail::parse_generator(g));
        }
        if (d.contains("test_generators")) {
          cfg.dataset.test_generators.clear();
          for (const auto& g : d.at("test_generators"))
            cfg.dataset.test_generators.push_back(detail::parse_generator(g));
        }
      }
    }
    if (j.contains("dataset_dir")) {
      cfg.dataset_dir = j.at("dataset_dir").get<std::string>();
    }
    if (j.contains("train")) detail::apply_train_overrides(cfg.train, j.at("train"));
    if (j.contains("detectors")) {
      for (const auto& d : j.at("detectors")) {
        DetectorConfig dc;
        nlohmann::json overrides;
        if (d.is_string()) {
          dc.name = d.get<std::string>();
        } else {
          dc.name = d.at("name").get<std::string>();
          overrides = d;
        }
        dc.kind = detector_from_string(dc.name);
        dc.train = default_train_for(dc.kind, cfg.train);
        dc.train.seed = mix_seed(cfg.seed, hash_tag(dc.name));
        if (!overrides.is_null()) detail::apply_train_overrides(dc.train, overrides);
        cfg.detectors.push_back(dc);
      }
    } else {
      for (const auto& [name, kind] : detector_roster()) {
        DetectorConfig dc;
        dc.name = name;
        dc.kind = kind;
        dc.train = default_train_for(kind, cfg.train);
        dc.train.seed = mix_seed(cfg.seed, hash_tag(name));
        cfg.detectors.push_back(dc);
      }
    }
    if (j.contains("sweep")) {
      const auto& s = j.at("sweep");
      if (s.contains("jpeg_qualities"))
        cfg.jpeg_qualities = s.at("jpeg_qualities").get<std::vector<int>>();
      if (s.contains("scale_factors"))
        cfg.scale_factors = s.at("scale_factors").get<std::vector<double>>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad bench config: ") + e.what());
  }
  char hash[32];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(hash_tag(j.dump())));
  cfg.config_hash = hash;
  if (cfg.detectors.empty())
    throw InvalidInput("bench config lists no detectors");
  return cfg;
}

inline BenchConfig load_bench_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("config file " + path + " is not valid JSON: " + e.what());
  }
  return parse_bench_config(j);
}

// ---------------------------------------------------------------------------
// Dataset access and test strategies

struct LoadedSplit {
  std::vector<CachedImage> images;
  std::vector<int> labels;
  std::vector<std::string> sources;
};

inline LoadedSplit load_split(const std::string& dataset_dir, const std::string& split) {
  const std::string manifest_path =
      (std::filesystem::path(dataset_dir) / (split + ".tsv")).string();
  if (!std::filesystem::exists(manifest_path))
    throw InvalidInput("split '" + split + "' not found: missing " + manifest_path);
  const DatasetManifest manifest = load_manifest(manifest_path);
  LoadedSplit out;
  out.images.resize(manifest.entries.size());
  out.labels.resize(manifest.entries.size());
  out.sources.resize(manifest.entries.size());
  parallel_for(manifest.entries.size(), [&](std::size_t i) {
    const auto& entry = manifest.entries[i];
    const std::string path =
        (std::filesystem::path(dataset_dir) / entry.path).string();
    out.images[i] = CachedImage::from(load_image(path));
    out.labels[i] = entry.label;
    out.sources[i] = entry.source;
  });
  return out;
}

/// Loads a split given either a dataset directory (containing
/// <split>.tsv) or a direct path to a manifest file.
inline LoadedSplit load_split_any(const std::string& manifest_or_dir,
                                  const std::string& split) {
  namespace fs = std::filesystem;
  if (fs::is_directory(manifest_or_dir)) return load_split(manifest_or_dir, split);
  if (!fs::exists(manifest_or_dir))
    throw InvalidInput("manifest not found: " + manifest_or_dir);
  const DatasetManifest manifest = load_manifest(manifest_or_dir);
  const std::string base = fs::path(manifest_or_dir).parent_path().string();
  LoadedSplit out;
  out.images.resize(manifest.entries.size());
  out.labels.resize(manifest.entries.size());
  out.sources.resize(manifest.entries.size());
  parallel_for(manifest.entries.size(), [&](std::size_t i) {
    const auto& entry = manifest.entries[i];
    const std::string path =
        base.empty() ? entry.path : (fs::path(base) / entry.path).string();
    out.images[i] = CachedImage::from(load_image(path));
    out.labels[i] = entry.label;
    out.sources[i] = entry.source;
  });
  return out;
}

/// Fixed-side view used by the spectrum and CNN detectors: center-crop
/// when the image is at least as large as the target, otherwise bilinear
/// upscale (then crop the rounding slack).
inline ImageBuffer fit_to_side(const ImageBuffer& img, int side) {
  if (img.width == side && img.height == side) return img;
  if (img.width >= side && img.height >= side) return center_crop(img, side, side);
  const double scale = std::max(static_cast<double>(side) / img.width,
                                static_cast<double>(side) / img.height);
  ImageBuffer up = resize_bilinear(img, scale);
  if (up.width < side || up.height < side)
    up = resize_bilinear(img, scale * 1.01);
  return center_crop(up, side, side);
}

/// Feature vector of one image for a linear detector. Spectrum features
/// are computed on the luma of the fitted square; co-occurrence and
/// saturation features see the full image.
inline std::vector<double> bench_features(DetectorKind kind, const ImageBuffer& img,
                                          int side) {
  switch (kind) {
    case DetectorKind::kSpecRadial: {
      std::vector<double> f =
          spectral_features(to_luma(fit_to_side(img, side)), SpectralFeatureKind::kRadial);
      for (auto& v : f) v = std::log(v + 1e-12);
      return f;
    }
    case DetectorKind::kSpecPeaks: {
      std::vector<double> f = spectral_features(to_luma(fit_to_side(img, side)),
                                                SpectralFeatureKind::kPeakGrid);
      for (auto& v : f) v = std::log1p(v);
      return f;
    }
    case DetectorKind::kCoocResidual:
      return residual_cooc_features(img);
    case DetectorKind::kCoocRgb:
      return rgb_cross_cooc_features(img);
    case DetectorKind::kSaturation:
      return saturation_features(img);
    default:
      throw InvalidInput("bench_features: not a feature detector");
  }
}

/// The extractor tag stored inside linear models; spectrum detectors
/// embed their analysis side so evaluation can reproduce it.
inline std::string extractor_tag(DetectorKind kind, int side) {
  const std::string name = detector_name(kind);
  if (kind == DetectorKind::kSpecRadial || kind == DetectorKind::kSpecPeaks)
    return name + ":" + std::to_string(side);
  return name;
}

inline DetectorKind detector_from_extractor(const std::string& tag, int* side_out) {
  const std::size_t colon = tag.find(':');
  const std::string name = tag.substr(0, colon);
  if (side_out != nullptr && colon != std::string::npos)
    *side_out = std::stoi(tag.substr(colon + 1));
  return detector_from_string(name);
}

// ---------------------------------------------------------------------------
// Training

/// Trains one detector on a loaded train split and returns the model
/// plus the final training loss (where the detector has one).
inline LoadedModel train_detector(const DetectorConfig& det, const LoadedSplit& split,
                                 double* final_loss = nullptr) {
  LoadedModel model;
  const TrainConfig& cfg = det.train;
  if (final_loss) *final_loss = 0.0;
  if (is_linear_detector(det.kind)) {
    std::vector<std::vector<double>> feats(split.images.size());
    parallel_for(split.images.size(), [&](std::size_t i) {
      feats[i] = bench_features(det.kind, split.images[i].to_buffer(), cfg.input_side);
    });
    std::vector<double> losses;
    model.kind = ModelKind::kLinear;
    model.linear = train_linear(feats, split.labels, cfg,
                                extractor_tag(det.kind, cfg.input_side), &losses);
    if (final_loss && !losses.empty()) *final_loss = losses.back();
    return model;
  }
  if (det.kind == DetectorKind::kFingerprint) {
    std::vector<ImageBuffer> fakes;
    for (std::size_t i = 0; i < split.images.size(); ++i)
      if (split.labels[i] == 1) fakes.push_back(split.images[i].to_buffer());
    if (fakes.size() < 8)
      throw DegenerateData("fingerprint detector needs at least 8 fake training images, got " +
                           std::to_string(fakes.size()));
    model.kind = ModelKind::kFingerprint;
    model.fingerprint = estimate_fingerprint(fakes, "train-fakes");
    return model;
  }
  // CNN family.
  std::vector<CachedImage> images;
  std::vector<int> labels;
  if (det.kind == DetectorKind::kCnnPatch) {
    for (std::size_t i = 0; i < split.images.size(); ++i) {
      const ImageBuffer img = split.images[i].to_buffer();
      for (const auto& patch : extract_patches(fit_to_side(img, std::max(img.width, cfg.input_side)),
                                               cfg.input_side, cfg.input_side)) {
        images.push_back(CachedImage::from(patch));
        labels.push_back(split.labels[i]);
      }
    }
  } else {
    images.resize(split.images.size());
    parallel_for(split.images.size(), [&](std::size_t i) {
      images[i] = CachedImage::from(fit_to_side(split.images[i].to_buffer(), cfg.input_side));
    });
    labels = split.labels;
  }
  CnnVariant variant = CnnVariant::kNoDown;
  if (det.kind == DetectorKind::kCnnDown) variant = CnnVariant::kDownFirst;
  if (det.kind == DetectorKind::kCnnResidual) variant = CnnVariant::kResidualFirst;
  std::vector<double> losses;
  model.kind = ModelKind::kCnn;
  model.cnn = train_cnn_images(images, labels, variant, cfg, &losses);
  if (final_loss && !losses.empty()) *final_loss = losses.back();
  return model;
}

// ---------------------------------------------------------------------------
// Scoring and evaluation

/// Score of one image under a trained model; higher means "fake". Linear
/// and CNN scores are sigmoid probabilities; fingerprint correlation is
/// mapped from [-1,1] to [0,1].
inline double score_image(const LoadedModel& model, DetectorKind kind,
                          const ImageBuffer& img) {
  switch (model.kind) {
    case ModelKind::kLinear: {
      int side = 64;
      detector_from_extractor(model.linear.extractor, &side);
      const std::vector<double> f = bench_features(kind, img, side);
      return sigmoid(predict_linear(model.linear, f));
    }
    case ModelKind::kFingerprint: {
      const ImageBuffer fitted = fit_to_side(img, model.fingerprint.width);
      const ImageBuffer res = denoise_residual(to_luma(fitted));
      return 0.5 * (correlate(res, model.fingerprint) + 1.0);
    }
    case ModelKind::kCnn: {
      if (kind == DetectorKind::kCnnPatch) {
        const int patch = model.cnn.input_side;
        ImageBuffer work = img;
        if (work.width < patch || work.height < patch) work = fit_to_side(work, patch);
        return sigmoid(patch_score(model.cnn, work, patch, std::max(1, patch / 2)));
      }
      return sigmoid(cnn_forward(model.cnn, fit_to_side(img, model.cnn.input_side)));
    }
  }
  throw InvalidInput("score_image: unknown model kind");
}

enum class Perturbation { kNone, kJpeg, kResize };

inline std::string perturbation_name(Perturbation p) {
  switch (p) {
    case Perturbation::kNone: return "none";
    case Perturbation::kJpeg: return "jpeg";
    case Perturbation::kResize: return "resize";
  }
  throw InvalidInput("perturbation_name: unknown perturbation");
}

inline ImageBuffer perturb_image(const ImageBuffer& img, Perturbation p, double param) {
  switch (p) {
    case Perturbation::kNone: return img;
    case Perturbation::kJpeg: return jpeg_roundtrip(img, static_cast<int>(param));
    case Perturbation::kResize: return resize_bilinear(img, param);
  }
  throw InvalidInput("perturb_image: unknown perturbation");
}

/// Scores a whole split, optionally after a perturbation, and buckets
/// scores by label. Work is parallel over images; score order is fixed by
/// manifest order.
inline ScoreSet score_split(const LoadedModel& model, DetectorKind kind,
                            const LoadedSplit& split,
                            Perturbation p = Perturbation::kNone, double param = 0.0) {
  std::vector<double> scores(split.images.size());
  parallel_for(split.images.size(), [&](std::size_t i) {
    ImageBuffer img = split.images[i].to_buffer();
    if (p != Perturbation::kNone) img = perturb_image(img, p, param);
    scores[i] = score_image(model, kind, img);
  });
  ScoreSet set;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (split.labels[i] == 1)
      set.positives.push_back(scores[i]);
    else
      set.negatives.push_back(scores[i]);
  }
  return set;
}

struct SweepRow {
  std::string detector;
  Perturbation perturbation = Perturbation::kNone;
  double parameter = 0.0;
  MetricSummary metrics;
};

inline std::string format_parameter(Perturbation p, double param) {
  char buf[32];
  if (p == Perturbation::kJpeg)
    std::snprintf(buf, sizeof(buf), "%d", static_cast<int>(param));
  else if (p == Perturbation::kResize)
    std::snprintf(buf, sizeof(buf), "%.3f", param);
  else
    std::snprintf(buf, sizeof(buf), "0");
  return buf;
}

inline void write_sweep_csv(const std::string& path, std::vector<SweepRow> rows) {
  std::sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
    if (a.detector != b.detector) return a.detector < b.detector;
    const std::string pa = perturbation_name(a.perturbation);
    const std::string pb = perturbation_name(b.perturbation);
    if (pa != pb) return pa < pb;
    return a.parameter < b.parameter;
  });
  std::ofstream out(path);
  if (!out) throw IoError("cannot open sweep csv for writing: " + path);
  out << "detector,perturbation,parameter,auc,acc_at_0.5,pd_at_5,pd_at_1,n_pos,n_neg\n";
  char buf[224];
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof(buf), "%s,%s,%s,%.6f,%.6f,%.6f,%.6f,%zu,%zu\n",
                  row.detector.c_str(), perturbation_name(row.perturbation).c_str(),
                  format_parameter(row.perturbation, row.parameter).c_str(),
                  row.metrics.auc, row.metrics.acc_at_half, row.metrics.pd_at_5,
                  row.metrics.pd_at_1, row.metrics.n_pos, row.metrics.n_neg);
    out << buf;
  }
  if (!out) throw IoError("failed while writing sweep csv: " + path);
}

/// All sweep cells for a set of trained detectors: one "none" cell plus
/// one per JPEG quality and per scale factor. Perturbed splits are shared
/// across detectors; rows come back unsorted (write_sweep_csv sorts).
inline std::vector<SweepRow> run_sweep(
    const BenchConfig& cfg,
    const std::vector<std::pair<DetectorConfig, LoadedModel>>& models,
    const LoadedSplit& test) {
  std::vector<std::pair<Perturbation, double>> cells;
  cells.push_back({Perturbation::kNone, 0.0});
  for (int q : cfg.jpeg_qualities) cells.push_back({Perturbation::kJpeg, static_cast<double>(q)});
  for (double s : cfg.scale_factors) cells.push_back({Perturbation::kResize, s});

  std::vector<SweepRow> rows;
  for (const auto& [pert, param] : cells) {
    // Perturb once, score with every detector.
    LoadedSplit perturbed;
    perturbed.labels = test.labels;
    perturbed.sources = test.sources;
    perturbed.images.resize(test.images.size());
    if (pert == Perturbation::kNone) {
      perturbed.images = test.images;
    } else {
      parallel_for(test.images.size(), [&](std::size_t i) {
        perturbed.images[i] =
            CachedImage::from(perturb_image(test.images[i].to_buffer(), pert, param));
      });
    }
    for (const auto& [det, model] : models) {
      SweepRow row;
      row.detector = det.name;
      row.perturbation = pert;
      row.parameter = param;
      row.metrics = summarize(score_split(model, det.kind, perturbed));
      rows.push_back(row);
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Commands (throw on failure; the CLI maps exceptions to exit codes)

inline std::string cmd_synth(const BenchConfig& cfg) {
  if (!cfg.has_inline_dataset)
    throw InvalidInput("config has no inline dataset section to synthesize");
  const SynthResult result = gen_dataset(cfg.dataset, cfg.dataset_path());
  return result.train_manifest_path + "\n" + result.test_manifest_path;
}

inline std::string cmd_train(const BenchConfig& cfg, const std::string& detector) {
  const DetectorKind kind = detector_from_string(detector);
  DetectorConfig det;
  bool found = false;
  for (const auto& d : cfg.detectors)
    if (d.name == detector) {
      det = d;
      found = true;
      break;
    }
  if (!found) {
    det.name = detector;
    det.kind = kind;
    det.train = default_train_for(kind, cfg.train);
    det.train.seed = mix_seed(cfg.seed, hash_tag(detector));
  }
  const LoadedSplit split = load_split(cfg.dataset_path(), "train");
  double final_loss = 0.0;
  const LoadedModel model = train_detector(det, split, &final_loss);
  std::filesystem::create_directories(cfg.outdir);
  const std::string path = cfg.model_path(detector);
  switch (model.kind) {
    case ModelKind::kLinear: save_model(path, model.linear); break;
    case ModelKind::kCnn: save_model(path, model.cnn); break;
    case ModelKind::kFingerprint: save_model(path, model.fingerprint); break;
  }
  char loss_line[64];
  std::snprintf(loss_line, sizeof(loss_line), "final_loss %.12g", final_loss);
  write_model_sidecar(path, {
                                "detector " + detector,
                                "config_hash " + cfg.config_hash,
                                "dataset " + cfg.dataset_path(),
                                "seed " + std::to_string(det.train.seed),
                                loss_line,
                            });
  return path;
}

/// Detector kind an already-trained model implies, unless overridden.
inline DetectorKind infer_detector(const LoadedModel& model,
                                   const std::string& override_name) {
  if (!override_name.empty()) return detector_from_string(override_name);
  switch (model.kind) {
    case ModelKind::kLinear:
      return detector_from_extractor(model.linear.extractor, nullptr);
    case ModelKind::kFingerprint:
      return DetectorKind::kFingerprint;
    case ModelKind::kCnn:
      switch (model.cnn.variant) {
        case CnnVariant::kDownFirst: return DetectorKind::kCnnDown;
        case CnnVariant::kNoDown: return DetectorKind::kCnnNoDown;
        case CnnVariant::kResidualFirst: return DetectorKind::kCnnResidual;
      }
  }
  throw InvalidInput("cannot infer detector kind from model");
}

inline std::string format_eval_csv(const std::string& detector, const MetricSummary& m) {
  char buf[224];
  std::snprintf(buf, sizeof(buf), "%s,none,0,%.6f,%.6f,%.6f,%.6f,%zu,%zu\n",
                detector.c_str(), m.auc, m.acc_at_half, m.pd_at_5, m.pd_at_1, m.n_pos,
                m.n_neg);
  return std::string("detector,perturbation,parameter,auc,acc_at_0.5,pd_at_5,pd_at_1,"
                     "n_pos,n_neg\n") +
         buf;
}

inline MetricSummary cmd_eval(const std::string& model_path,
                              const std::string& manifest_or_dir,
                              const std::string& split, const std::string& out_csv,
                              const std::string& detector_override = "") {
  const LoadedModel model = load_model(model_path);
  const DetectorKind kind = infer_detector(model, detector_override);
  const LoadedSplit data = load_split_any(manifest_or_dir, split);
  const MetricSummary m = summarize(score_split(model, kind, data));
  const std::string csv = format_eval_csv(detector_name(kind), m);
  std::cout << csv;
  if (!out_csv.empty()) {
    std::ofstream out(out_csv);
    if (!out) throw IoError("cannot open csv for writing: " + out_csv);
    out << csv;
    if (!out) throw IoError("failed while writing csv: " + out_csv);
  }
  return m;
}

inline std::string cmd_sweep(const BenchConfig& cfg, const std::string& out_csv = "") {
  std::vector<std::pair<DetectorConfig, LoadedModel>> models;
  for (const auto& det : cfg.detectors) {
    const std::string path = cfg.model_path(det.name);
    if (!std::filesystem::exists(path))
      throw InvalidInput("no trained model for detector '" + det.name +
                         "' (expected " + path + "); run the train command first");
    models.push_back({det, load_model(path)});
  }
  const LoadedSplit test = load_split(cfg.dataset_path(), "test");
  const std::vector<SweepRow> rows = run_sweep(cfg, models, test);
  const std::string path =
      out_csv.empty() ? (std::filesystem::path(cfg.outdir) / "sweep.csv").string()
                      : out_csv;
  std::filesystem::create_directories(std::filesystem::path(path).parent_path());
  write_sweep_csv(path, rows);
  return path;
}

inline std::string cmd_inspect(const std::string& manifest_path,
                               const std::string& source, const std::string& what,
                               const std::string& out_path) {
  namespace fs = std::filesystem;
  if (!fs::exists(manifest_path))
    throw InvalidInput("manifest not found: " + manifest_path);
  const DatasetManifest manifest = load_manifest(manifest_path);
  const DatasetManifest filtered = filter_by_source(manifest, source);
  if (filtered.entries.empty())
    throw InvalidInput("no manifest entries with source tag '" + source + "'");
  const std::string base = fs::path(manifest_path).parent_path().string();
  std::vector<ImageBuffer> images;
  images.reserve(filtered.entries.size());
  for (const auto& entry : filtered.entries)
    images.push_back(load_image(base.empty() ? entry.path
                                             : (fs::path(base) / entry.path).string()));
  if (what == "avg-spectrum") {
    save_image(average_spectrum(images), out_path);
    return out_path;
  }
  if (what == "fingerprint") {
    const Fingerprint fp = estimate_fingerprint(images, source);
    export_fingerprint(fp, out_path);
    return out_path;
  }
  throw InvalidInput("unknown inspect target '" + what +
                     "' (expected avg-spectrum or fingerprint)");
}

}  // namespace ganbench
