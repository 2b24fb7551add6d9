/*
 * Versioned binary model files. Layout: magic "GBMD", version, model kind,
 * kind-specific header, then all parameters as little-endian 64-bit reals.
 *
 * Licensed under the terms of the Apache 2.0 License.
 * See LICENSE file in the project root for terms.
 */
#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "ganbench/cnn.hpp"
#include "ganbench/errors.hpp"
#include "ganbench/linear.hpp"
#include "ganbench/residual.hpp"

namespace ganbench {

enum class ModelKind : std::uint32_t { kLinear = 0, kCnn = 1, kFingerprint = 2 };

namespace detail {

constexpr char kModelMagic[4] = {'G', 'B', 'M', 'D'};
constexpr std::uint32_t kModelVersion = 1;

inline void write_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 4);
}

inline void write_u64(std::ostream& out, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

inline void write_f64(std::ostream& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  write_u64(out, bits);
}

inline void write_string(std::ostream& out, const std::string& s) {
  write_u32(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::uint32_t read_u32(std::istream& in, const std::string& path) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4))
    throw FormatError("truncated model file: " + path);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

inline std::uint64_t read_u64(std::istream& in, const std::string& path) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8))
    throw FormatError("truncated model file: " + path);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

inline double read_f64(std::istream& in, const std::string& path) {
  const std::uint64_t bits = read_u64(in, path);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

inline std::string read_string(std::istream& in, const std::string& path) {
  const std::uint32_t len = read_u32(in, path);
  if (len > (1u << 20)) throw FormatError("implausible string length in model file: " + path);
  std::string s(len, '\0');
  if (len > 0 && !in.read(s.data(), len))
    throw FormatError("truncated model file: " + path);
  return s;
}

inline void write_header(std::ostream& out, ModelKind kind) {
  out.write(kModelMagic, 4);
  write_u32(out, kModelVersion);
  write_u32(out, static_cast<std::uint32_t>(kind));
}

inline ModelKind read_header(std::istream& in, const std::string& path) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kModelMagic, 4) != 0)
    throw FormatError("not a model file (bad magic): " + path);
  const std::uint32_t version = read_u32(in, path);
  if (version != kModelVersion)
    throw FormatError("unsupported model file version " + std::to_string(version) +
                      ": " + path);
  const std::uint32_t kind = read_u32(in, path);
  if (kind > 2) throw FormatError("unknown model kind in " + path);
  return static_cast<ModelKind>(kind);
}

}  // namespace detail

inline void save_model(const std::string& path, const LinearModel& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open model file for writing: " + path);
  detail::write_header(out, ModelKind::kLinear);
  detail::write_string(out, m.extractor);
  detail::write_u64(out, m.weights.size());
  for (double v : m.weights) detail::write_f64(out, v);
  detail::write_f64(out, m.bias);
  for (double v : m.mean) detail::write_f64(out, v);
  for (double v : m.scale) detail::write_f64(out, v);
  if (!out) throw IoError("failed while writing model file: " + path);
}

inline void save_model(const std::string& path, const TinyCnnParams& p) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open model file for writing: " + path);
  detail::write_header(out, ModelKind::kCnn);
  detail::write_string(out, cnn_variant_name(p.variant));
  detail::write_u32(out, static_cast<std::uint32_t>(p.input_side));
  detail::write_u64(out, p.trainable_count());
  for (const auto& view : p.trainable_views())
    for (double v : view) detail::write_f64(out, v);
  if (!out) throw IoError("failed while writing model file: " + path);
}

inline void save_model(const std::string& path, const Fingerprint& fp) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open model file for writing: " + path);
  detail::write_header(out, ModelKind::kFingerprint);
  detail::write_string(out, fp.source);
  detail::write_u32(out, static_cast<std::uint32_t>(fp.width));
  detail::write_u32(out, static_cast<std::uint32_t>(fp.height));
  detail::write_u64(out, fp.count);
  for (double v : fp.values) detail::write_f64(out, v);
  if (!out) throw IoError("failed while writing model file: " + path);
}

struct LoadedModel {
  ModelKind kind = ModelKind::kLinear;
  LinearModel linear;
  TinyCnnParams cnn;
  Fingerprint fingerprint;
};

inline LoadedModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model file: " + path);
  LoadedModel model;
  model.kind = detail::read_header(in, path);
  switch (model.kind) {
    case ModelKind::kLinear: {
      model.linear.extractor = detail::read_string(in, path);
      const std::uint64_t dim = detail::read_u64(in, path);
      if (dim == 0 || dim > (1u << 24))
        throw FormatError("implausible linear model dimension in " + path);
      model.linear.weights.resize(dim);
      for (auto& v : model.linear.weights) v = detail::read_f64(in, path);
      model.linear.bias = detail::read_f64(in, path);
      model.linear.mean.resize(dim);
      for (auto& v : model.linear.mean) v = detail::read_f64(in, path);
      model.linear.scale.resize(dim);
      for (auto& v : model.linear.scale) v = detail::read_f64(in, path);
      break;
    }
    case ModelKind::kCnn: {
      const std::string variant = detail::read_string(in, path);
      const std::uint32_t side = detail::read_u32(in, path);
      if (side < 8 || side > 4096 || (side & (side - 1)) != 0)
        throw FormatError("implausible cnn input side in " + path);
      model.cnn = make_cnn(cnn_variant_from_string(variant), static_cast<int>(side),
                           Rng(0));
      const std::uint64_t count = detail::read_u64(in, path);
      if (count != model.cnn.trainable_count())
        throw FormatError("cnn parameter count mismatch in " + path);
      for (auto& view : model.cnn.trainable_views())
        for (double& v : view) v = detail::read_f64(in, path);
      break;
    }
    case ModelKind::kFingerprint: {
      model.fingerprint.source = detail::read_string(in, path);
      model.fingerprint.width = static_cast<int>(detail::read_u32(in, path));
      model.fingerprint.height = static_cast<int>(detail::read_u32(in, path));
      if (model.fingerprint.width <= 0 || model.fingerprint.height <= 0 ||
          model.fingerprint.width > 4096 || model.fingerprint.height > 4096)
        throw FormatError("implausible fingerprint size in " + path);
      model.fingerprint.count = detail::read_u64(in, path);
      model.fingerprint.values.resize(static_cast<std::size_t>(model.fingerprint.width) *
                                      model.fingerprint.height);
      for (auto& v : model.fingerprint.values) v = detail::read_f64(in, path);
      break;
    }
  }
  return model;
}

/// Human-readable companion file written next to each model.
inline void write_model_sidecar(const std::string& model_path,
                                const std::vector<std::string>& lines) {
  const std::string path = model_path + ".txt";
  std::ofstream out(path);
  if (!out) throw IoError("cannot write model sidecar: " + path);
  for (const auto& line : lines) out << line << "\n";
  if (!out) throw IoError("failed while writing model sidecar: " + path);
}

}  // namespace ganbench
