/*
 * Dataset manifest: tab-separated records of (path, label, source, seed).
 *
 * Licensed under the terms of the Apache 2.0 License.
 * See LICENSE file in the project root for terms.
 */
#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "ganbench/errors.hpp"

namespace ganbench {

struct ManifestEntry {
  std::string path;
  int label = 0;  // 0 = real, 1 = synthetic
  std::string source;
  std::optional<std::uint64_t> seed;
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;

  std::size_t count_label(int label) const {
    std::size_t n = 0;
    for (const auto& e : entries) n += (e.label == label) ? 1 : 0;
    return n;
  }
};

namespace detail {

inline std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return fields;
}

inline void check_unique_paths(const DatasetManifest& m) {
  std::unordered_set<std::string> seen;
  for (const auto& e : m.entries)
    if (!seen.insert(e.path).second)
      throw FormatError("manifest: duplicate path '" + e.path + "'");
}

}  // namespace detail

/// One record per line: path, label, source, and optionally a seed,
/// tab-separated. The seed field is simply omitted when absent.
inline DatasetManifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest: " + path);
  DatasetManifest m;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = detail::split_tabs(line);
    if (fields.size() < 3 || fields.size() > 4)
      throw FormatError("manifest line " + std::to_string(lineno) +
                        ": expected 3 or 4 tab-separated fields");
    ManifestEntry e;
    e.path = fields[0];
    if (fields[1] == "0")
      e.label = 0;
    else if (fields[1] == "1")
      e.label = 1;
    else
      throw FormatError("manifest line " + std::to_string(lineno) +
                        ": label must be 0 or 1, got '" + fields[1] + "'");
    e.source = fields[2];
    if (fields.size() == 4 && !fields[3].empty()) {
      try {
        e.seed = std::stoull(fields[3]);
      } catch (const std::exception&) {
        throw FormatError("manifest line " + std::to_string(lineno) +
                          ": bad seed '" + fields[3] + "'");
      }
    }
    m.entries.push_back(std::move(e));
  }
  detail::check_unique_paths(m);
  return m;
}

inline void save_manifest(const DatasetManifest& m, const std::string& path) {
  detail::check_unique_paths(m);
  std::ofstream out(path);
  if (!out) throw IoError("cannot open manifest for writing: " + path);
  for (const auto& e : m.entries) {
    out << e.path << '\t' << e.label << '\t' << e.source;
    if (e.seed) out << '\t' << *e.seed;
    out << '\n';
  }
  if (!out) throw IoError("short write to manifest: " + path);
}

/// Keeps only entries whose source is in the given set (empty set keeps all).
inline DatasetManifest filter_by_source(const DatasetManifest& m,
                                        const std::string& source) {
  DatasetManifest out;
  for (const auto& e : m.entries)
    if (e.source == source) out.entries.push_back(e);
  return out;
}

}  // namespace ganbench
