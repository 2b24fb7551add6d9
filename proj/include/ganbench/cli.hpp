/*
 * Command-line front end: subcommand parsing and the mapping from error
 * categories to exit codes (0 ok, 2 usage/config, 3 I/O, 4 degenerate
 * data).
 *
 * Licensed under the terms of the Apache 2.0 License.
 * See LICENSE file in the project root for terms.
 */
#pragma once

#include <algorithm>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ganbench/bench.hpp"

namespace ganbench {

namespace detail {

/// Loads a config file and folds in command-line overrides before the
/// parse, so seeds derived from the master seed stay consistent.
inline BenchConfig config_with_overrides(const std::string& path,
                                         const std::optional<std::uint64_t>& seed,
                                         const std::string& outdir) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("config file " + path + " is not valid JSON: " + e.what());
  }
  if (seed) j["seed"] = *seed;
  if (!outdir.empty()) j["outdir"] = outdir;
  return parse_bench_config(j);
}

}  // namespace detail

/// Runs the tool on an argument list (excluding the program name) and
/// returns the process exit code.
inline int run_cli(std::vector<std::string> args) {
  CLI::App app{"GAN-image forensics benchmark"};
  app.require_subcommand(1);

  std::string config_path, model_path, manifest_path, detector, split = "test";
  std::string out_path, source, what = "avg-spectrum";
  std::optional<std::uint64_t> seed;
  int workers = 1;

  CLI::App* synth = app.add_subcommand("synth", "Generate the configured dataset");
  synth->add_option("--config", config_path, "Bench config (JSON)")->required();
  synth->add_option("--out", out_path, "Override the output directory");
  synth->add_option("--seed", seed, "Override the master seed");
  synth->add_option("--workers", workers, "Worker threads");

  CLI::App* train = app.add_subcommand("train", "Train one detector");
  train->add_option("--config", config_path, "Bench config (JSON)")->required();
  train->add_option("--detector", detector, "Detector name")->required();
  train->add_option("--out", out_path, "Override the output directory");
  train->add_option("--seed", seed, "Override the master seed");
  train->add_option("--workers", workers, "Worker threads");

  CLI::App* eval = app.add_subcommand("eval", "Evaluate a trained model on a split");
  eval->add_option("--model", model_path, "Model file")->required();
  eval->add_option("--manifest", manifest_path, "Manifest file or dataset directory")
      ->required();
  eval->add_option("--split", split, "Split name when a dataset directory is given");
  eval->add_option("--out", out_path, "Also write the metrics row to this CSV");
  eval->add_option("--detector", detector, "Override the inferred detector kind");
  eval->add_option("--workers", workers, "Worker threads");

  CLI::App* sweep = app.add_subcommand("sweep", "Run the robustness sweep grid");
  sweep->add_option("--config", config_path, "Bench config (JSON)")->required();
  sweep->add_option("--out", out_path, "Sweep CSV path");
  sweep->add_option("--seed", seed, "Override the master seed");
  sweep->add_option("--workers", workers, "Worker threads");

  CLI::App* inspect = app.add_subcommand("inspect", "Export an averaged artifact image");
  inspect->add_option("--manifest", manifest_path, "Manifest file")->required();
  inspect->add_option("--source", source, "Source tag to pool")->required();
  inspect->add_option("--what", what, "avg-spectrum or fingerprint");
  inspect->add_option("--out", out_path, "Output PGM path")->required();

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (workers < 1) throw InvalidInput("--workers must be at least 1");
    set_worker_count(workers);
    if (synth->parsed()) {
      const BenchConfig cfg = detail::config_with_overrides(config_path, seed, out_path);
      std::cout << cmd_synth(cfg) << "\n";
    } else if (train->parsed()) {
      const BenchConfig cfg = detail::config_with_overrides(config_path, seed, out_path);
      std::cout << cmd_train(cfg, detector) << "\n";
    } else if (eval->parsed()) {
      cmd_eval(model_path, manifest_path, split, out_path, detector);
    } else if (sweep->parsed()) {
      const BenchConfig cfg = detail::config_with_overrides(config_path, seed, "");
      std::cout << cmd_sweep(cfg, out_path) << "\n";
    } else if (inspect->parsed()) {
      std::cout << cmd_inspect(manifest_path, source, what, out_path) << "\n";
    }
  } catch (const DegenerateData& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace ganbench
