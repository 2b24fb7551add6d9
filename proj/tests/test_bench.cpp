/*
 * Tests for benchmark orchestration: detector roster, JSON configs, the
 * train/eval/sweep/inspect commands and their exit codes.
 *
 * Licensed under the terms of the Apache 2.0 License.
 * See LICENSE file in the project root for terms.
 */
#include <catch2/catch.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ganbench/bench.hpp"
#include "ganbench/cli.hpp"
#include "oracles.hpp"

using namespace ganbench;

namespace {

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

SynthSpec tiny_spec() {
  SynthSpec spec;
  spec.train_per_class = 24;
  spec.test_per_class = 8;
  spec.side = 32;
  spec.master_seed = 3;
  GeneratorConfig a;
  a.base_side = 8;
  a.stages = 2;
  a.tag = "genA";
  GeneratorConfig b = a;
  b.tag = "genB";
  b.post_kernel = kPostKernelB;
  spec.train_generators = {a};
  spec.test_generators = {b};
  return spec;
}

// One shared tiny dataset plus a bench config pointing at it.
struct BenchFixture {
  testutil::TempDir tmp;
  std::string dataset_dir;
  std::string outdir;
  std::string config_path;

  BenchFixture() {
    dataset_dir = tmp.path() + "/ds";
    outdir = tmp.path() + "/out";
    gen_dataset(tiny_spec(), dataset_dir);
    config_path = tmp.file("config.json");
    nlohmann::json j = {
        {"seed", 3},
        {"outdir", outdir},
        {"dataset", dataset_dir},
        {"train", {{"epochs", 2}, {"batch", 8}, {"side", 32}}},
        {"detectors",
         {"saturation", "fingerprint",
          {{"name", "cnn-nodown"}, {"epochs", 1}, {"batch", 8}, {"side", 16}}}},
        {"sweep", {{"jpeg_qualities", {85}}, {"scale_factors", {1.0, 0.8}}}},
    };
    write_file(config_path, j.dump(2));
  }
};

}  // namespace

TEST_CASE("detector roster names round-trip and partition into families") {
  REQUIRE(detector_roster().size() == 10);
  int linear = 0, cnn = 0;
  for (const auto& [name, kind] : detector_roster()) {
    REQUIRE(detector_from_string(name) == kind);
    REQUIRE(detector_name(kind) == name);
    if (is_linear_detector(kind)) ++linear;
    if (is_cnn_detector(kind)) ++cnn;
    REQUIRE(!(is_linear_detector(kind) && is_cnn_detector(kind)));
  }
  REQUIRE(linear == 5);
  REQUIRE(cnn == 4);
  REQUIRE_THROWS_AS(detector_from_string("resnet50"), InvalidInput);
}

TEST_CASE("default_train_for layers family baselines on the global section") {
  TrainConfig global;
  global.epochs = 12;
  global.input_side = 64;
  const TrainConfig lin = default_train_for(DetectorKind::kSaturation, global);
  REQUIRE(lin.epochs == 300);
  REQUIRE(lin.learning_rate == 0.25);
  const TrainConfig patch = default_train_for(DetectorKind::kCnnPatch, global);
  REQUIRE(patch.input_side == 32);
  REQUIRE(patch.epochs == 12);
  const TrainConfig deep = default_train_for(DetectorKind::kCnnDown, global);
  REQUIRE(deep.epochs == 12);
  REQUIRE(deep.input_side == 64);
}

TEST_CASE("default_bench_config is the unseen-generator protocol") {
  const BenchConfig cfg = default_bench_config();
  REQUIRE(cfg.detectors.size() == 10);
  REQUIRE(cfg.has_inline_dataset);
  REQUIRE(cfg.dataset.train_per_class == 1000);
  REQUIRE(cfg.dataset.test_per_class == 500);
  REQUIRE(cfg.dataset.side == 64);
  REQUIRE(cfg.dataset.train_generators.size() == 1);
  REQUIRE(cfg.dataset.test_generators.size() == 1);
  const GeneratorConfig& a = cfg.dataset.train_generators[0];
  const GeneratorConfig& b = cfg.dataset.test_generators[0];
  REQUIRE(a.post_kernel != b.post_kernel);
  REQUIRE(a.base_side == b.base_side);
  REQUIRE(a.stages == b.stages);
  REQUIRE(a.upsampler == b.upsampler);
  REQUIRE(a.artifact_gain == b.artifact_gain);
  REQUIRE(a.bias == b.bias);
  REQUIRE(a.tag != b.tag);
  REQUIRE(cfg.jpeg_qualities.size() == 8);
  REQUIRE(cfg.scale_factors.size() == 7);
  REQUIRE_NOTHROW(cfg.dataset.validate());
}

TEST_CASE("parse_bench_config applies overrides and derives per-detector seeds") {
  nlohmann::json j = {
      {"seed", 7},
      {"outdir", "elsewhere"},
      {"train", {{"epochs", 5}, {"lr", 0.125}}},
      {"detectors",
       {"spec-peaks",
        {{"name", "cnn-down"}, {"epochs", 2}, {"augment", "blur-jpeg"}},
        {{"name", "cnn-nodown"}, {"augment", "none"}}}},
      {"sweep", {{"jpeg_qualities", {95, 75}}, {"scale_factors", {0.5}}}},
  };
  const BenchConfig cfg = parse_bench_config(j);
  REQUIRE(cfg.seed == 7);
  REQUIRE(cfg.outdir == "elsewhere");
  REQUIRE(cfg.detectors.size() == 3);
  REQUIRE(cfg.detectors[0].kind == DetectorKind::kSpecPeaks);
  REQUIRE(cfg.detectors[0].train.epochs == 300);  // linear baseline wins
  REQUIRE(cfg.detectors[0].train.seed == mix_seed(7, hash_tag("spec-peaks")));
  REQUIRE(cfg.detectors[1].train.epochs == 2);
  REQUIRE(cfg.detectors[1].train.augment.has_value());
  REQUIRE(cfg.detectors[1].train.seed == mix_seed(7, hash_tag("cnn-down")));
  REQUIRE(!cfg.detectors[2].train.augment.has_value());
  REQUIRE(cfg.detectors[2].train.epochs == 5);
  REQUIRE(cfg.jpeg_qualities == std::vector<int>{95, 75});
  REQUIRE(cfg.scale_factors == std::vector<double>{0.5});
  REQUIRE(cfg.config_hash.size() == 16);
  REQUIRE(cfg.config_hash == parse_bench_config(j).config_hash);
  nlohmann::json j2 = j;
  j2["seed"] = 8;
  REQUIRE(parse_bench_config(j2).config_hash != cfg.config_hash);
  REQUIRE(cfg.model_path("spec-peaks") ==
          (std::filesystem::path("elsewhere") / "spec-peaks.gbm").string());
  REQUIRE(cfg.find_detector("cnn-down").name == "cnn-down");
  REQUIRE_THROWS_AS(cfg.find_detector("cooc-rgb"), InvalidInput);
}

TEST_CASE("parse_bench_config handles dataset sections and rejects bad input") {
  const BenchConfig dflt = parse_bench_config(nlohmann::json::object());
  REQUIRE(dflt.detectors.size() == 10);
  REQUIRE(dflt.has_inline_dataset);

  nlohmann::json dir_form = {{"dataset", "/data/prebuilt"}};
  const BenchConfig by_dir = parse_bench_config(dir_form);
  REQUIRE(!by_dir.has_inline_dataset);
  REQUIRE(by_dir.dataset_dir == "/data/prebuilt");
  REQUIRE(by_dir.dataset_path() == "/data/prebuilt");

  nlohmann::json inline_form = {
      {"dataset",
       {{"train_per_class", 10},
        {"test_per_class", 4},
        {"side", 32},
        {"alpha", {0.9, 1.1}},
        {"train_generators",
         {{{"tag", "g1"},
           {"base_side", 8},
           {"stages", 2},
           {"upsampler", "nearest"},
           {"post_kernel", {{2, 1, 1}, {1, 5, 2}, {1, 2, 2}}}}}},
        {"test_generators",
         {{{"tag", "g2"}, {"base_side", 8}, {"stages", 2}, {"artifact_gain", 0.5}}}}}}};
  const BenchConfig inl = parse_bench_config(inline_form);
  REQUIRE(inl.has_inline_dataset);
  REQUIRE(inl.dataset.train_per_class == 10);
  REQUIRE(inl.dataset.alpha_lo == 0.9);
  REQUIRE(inl.dataset.train_generators.size() == 1);
  REQUIRE(inl.dataset.train_generators[0].upsampler == Upsampler::kNearest);
  REQUIRE(inl.dataset.train_generators[0].post_kernel == kPostKernelB);
  REQUIRE(inl.dataset.test_generators[0].artifact_gain == 0.5);
  REQUIRE_NOTHROW(inl.dataset.validate());

  REQUIRE_THROWS_AS(parse_bench_config({{"detectors", {"vgg"}}}), InvalidInput);
  REQUIRE_THROWS_AS(parse_bench_config({{"detectors", nlohmann::json::array()}}),
                    InvalidInput);
  REQUIRE_THROWS_AS(parse_bench_config({{"train", {{"epochs", "ten"}}}}), FormatError);
  REQUIRE_THROWS_AS(parse_bench_config({{"dataset", {{"alpha", {0.9}}}}}), FormatError);
  REQUIRE_THROWS_AS(
      parse_bench_config({{"train", {{"augment", "mixup"}}}}), InvalidInput);
  nlohmann::json bad_kernel = {
      {"dataset",
       {{"train_generators", {{{"tag", "g"}, {"post_kernel", {1, 2, 3}}}}}}}};
  REQUIRE_THROWS_AS(parse_bench_config(bad_kernel), FormatError);
}

TEST_CASE("load_bench_config reports file problems by category") {
  testutil::TempDir tmp;
  const std::string good = tmp.file("good.json");
  write_file(good, "{\"seed\": 11, \"outdir\": \"o\"}");
  REQUIRE(load_bench_config(good).seed == 11);
  REQUIRE_THROWS_AS(load_bench_config(tmp.path() + "/absent.json"), IoError);
  const std::string bad = tmp.file("bad.json");
  write_file(bad, "not json{{{");
  REQUIRE_THROWS_AS(load_bench_config(bad), FormatError);
}

TEST_CASE("fit_to_side crops large images and upscales small ones") {
  Rng rng(713);
  const ImageBuffer big = testutil::random_image(rng, 48, 40, 3);
  const ImageBuffer fitted = fit_to_side(big, 32);
  REQUIRE(fitted.width == 32);
  REQUIRE(fitted.height == 32);
  REQUIRE(fitted.samples == center_crop(big, 32, 32).samples);

  const ImageBuffer same = fit_to_side(big, 48);
  REQUIRE(same.width == 48);  // width matches but height forces an upscale
  const ImageBuffer exact = fit_to_side(center_crop(big, 40, 40), 40);
  REQUIRE(exact.samples == center_crop(big, 40, 40).samples);

  const ImageBuffer small = testutil::random_image(rng, 20, 20, 3);
  const ImageBuffer up = fit_to_side(small, 32);
  REQUIRE(up.width == 32);
  REQUIRE(up.height == 32);
  REQUIRE(up.samples == fit_to_side(small, 32).samples);
}

TEST_CASE("extractor tags embed the analysis side for spectrum detectors") {
  REQUIRE(extractor_tag(DetectorKind::kSpecRadial, 64) == "spec-radial:64");
  REQUIRE(extractor_tag(DetectorKind::kSpecPeaks, 32) == "spec-peaks:32");
  REQUIRE(extractor_tag(DetectorKind::kSaturation, 64) == "saturation");
  int side = 0;
  REQUIRE(detector_from_extractor("spec-radial:64", &side) == DetectorKind::kSpecRadial);
  REQUIRE(side == 64);
  side = 17;
  REQUIRE(detector_from_extractor("cooc-rgb", &side) == DetectorKind::kCoocRgb);
  REQUIRE(side == 17);
}

TEST_CASE("bench_features dimensions match each linear detector") {
  Rng rng(719);
  const ImageBuffer img = testutil::random_image(rng, 32, 32, 3);
  REQUIRE(bench_features(DetectorKind::kSpecRadial, img, 32).size() == 16);
  REQUIRE(bench_features(DetectorKind::kSpecPeaks, img, 32).size() == 8);
  REQUIRE(bench_features(DetectorKind::kCoocResidual, img, 32).size() == 300);
  REQUIRE(bench_features(DetectorKind::kCoocRgb, img, 32).size() == 384);
  REQUIRE(bench_features(DetectorKind::kSaturation, img, 32).size() == 15);
  REQUIRE_THROWS_AS(bench_features(DetectorKind::kCnnDown, img, 32), InvalidInput);
}

TEST_CASE("bench commands cover synth, train, eval, sweep and inspect") {
  BenchFixture fx;

  SECTION("synth on an inline config writes both splits") {
    const std::string synth_cfg = fx.tmp.file("synth.json");
    nlohmann::json j = {
        {"seed", 4},
        {"outdir", fx.tmp.path() + "/synth-out"},
        {"dataset",
         {{"train_per_class", 4},
          {"test_per_class", 2},
          {"side", 32},
          {"train_generators", {{{"tag", "gA"}, {"base_side", 8}, {"stages", 2}}}},
          {"test_generators", {{{"tag", "gB"}, {"base_side", 8}, {"stages", 2}}}}}}};
    write_file(synth_cfg, j.dump());
    REQUIRE(run_cli({"synth", "--config", synth_cfg}) == 0);
    const std::string ds = fx.tmp.path() + "/synth-out/dataset";
    REQUIRE(std::filesystem::exists(ds + "/train.tsv"));
    REQUIRE(std::filesystem::exists(ds + "/test.tsv"));
    REQUIRE(load_manifest(ds + "/train.tsv").entries.size() == 8);
    // A config without an inline dataset cannot synthesize.
    REQUIRE(run_cli({"synth", "--config", fx.config_path}) == 2);
  }

  SECTION("trained models land on disk with descriptive sidecars") {
    REQUIRE(run_cli({"train", "--config", fx.config_path, "--detector", "saturation"}) == 0);
    const std::string sat_path = fx.outdir + "/saturation.gbm";
    const LoadedModel sat = load_model(sat_path);
    REQUIRE(sat.kind == ModelKind::kLinear);
    REQUIRE(sat.linear.extractor == "saturation");
    REQUIRE(sat.linear.weights.size() == 15);
    const std::string sidecar = testutil::read_text_file(sat_path + ".txt");
    REQUIRE(sidecar.find("detector saturation") != std::string::npos);
    REQUIRE(sidecar.find("config_hash ") != std::string::npos);
    REQUIRE(sidecar.find("final_loss ") != std::string::npos);

    REQUIRE(run_cli({"train", "--config", fx.config_path, "--detector", "fingerprint"}) == 0);
    const LoadedModel fp = load_model(fx.outdir + "/fingerprint.gbm");
    REQUIRE(fp.kind == ModelKind::kFingerprint);
    REQUIRE(fp.fingerprint.source == "train-fakes");
    REQUIRE(fp.fingerprint.width == 32);
    REQUIRE(fp.fingerprint.count == 24);

    REQUIRE(run_cli({"train", "--config", fx.config_path, "--detector", "cnn-nodown"}) == 0);
    const LoadedModel cnn = load_model(fx.outdir + "/cnn-nodown.gbm");
    REQUIRE(cnn.kind == ModelKind::kCnn);
    REQUIRE(cnn.cnn.variant == CnnVariant::kNoDown);
    REQUIRE(cnn.cnn.input_side == 16);

    // Same seed, two workers: the model bytes must not change.
    REQUIRE(run_cli({"train", "--config", fx.config_path, "--detector", "cnn-nodown",
                     "--out", fx.tmp.path() + "/out2", "--workers", "2"}) == 0);
    REQUIRE(testutil::read_text_file(fx.outdir + "/cnn-nodown.gbm") ==
            testutil::read_text_file(fx.tmp.path() + "/out2/cnn-nodown.gbm"));

    SECTION("eval emits one metrics row and accepts manifest files") {
      const std::string csv_path = fx.tmp.file("eval.csv");
      REQUIRE(run_cli({"eval", "--model", sat_path, "--manifest", fx.dataset_dir,
                       "--split", "test", "--out", csv_path}) == 0);
      const auto lines = split_lines(testutil::read_text_file(csv_path));
      REQUIRE(lines.size() == 2);
      REQUIRE(lines[0] ==
              "detector,perturbation,parameter,auc,acc_at_0.5,pd_at_5,pd_at_1,n_pos,n_neg");
      REQUIRE(lines[1].rfind("saturation,none,0,", 0) == 0);
      REQUIRE(lines[1].substr(lines[1].size() - 4) == ",8,8");

      const std::string csv2 = fx.tmp.file("eval2.csv");
      REQUIRE(run_cli({"eval", "--model", sat_path, "--manifest",
                       fx.dataset_dir + "/test.tsv", "--out", csv2}) == 0);
      REQUIRE(testutil::read_text_file(csv_path) == testutil::read_text_file(csv2));
    }

    SECTION("sweep produces the full deterministic grid") {
      const std::string sweep1 = fx.tmp.file("sweep1.csv");
      REQUIRE(run_cli({"sweep", "--config", fx.config_path, "--out", sweep1}) == 0);
      const auto lines = split_lines(testutil::read_text_file(sweep1));
      REQUIRE(lines.size() == 1 + 3 * (1 + 1 + 2));
      REQUIRE(lines[0] ==
              "detector,perturbation,parameter,auc,acc_at_0.5,pd_at_5,pd_at_1,n_pos,n_neg");
      for (std::size_t i = 1; i < lines.size(); ++i)
        REQUIRE(std::count(lines[i].begin(), lines[i].end(), ',') == 8);
      // Sorted by detector, then perturbation name, then parameter.
      std::vector<std::string> detectors;
      for (std::size_t i = 1; i < lines.size(); ++i)
        detectors.push_back(lines[i].substr(0, lines[i].find(',')));
      REQUIRE(std::is_sorted(detectors.begin(), detectors.end()));
      REQUIRE(std::count(detectors.begin(), detectors.end(), "cnn-nodown") == 4);
      REQUIRE(std::count(detectors.begin(), detectors.end(), "fingerprint") == 4);
      REQUIRE(std::count(detectors.begin(), detectors.end(), "saturation") == 4);

      // Resizing by 1.0 is the identity, so its metrics equal the none row.
      auto metrics_of = [&](const std::string& prefix) {
        for (std::size_t i = 1; i < lines.size(); ++i)
          if (lines[i].rfind(prefix, 0) == 0) return lines[i].substr(prefix.size());
        FAIL("missing row " + prefix);
        return std::string();
      };
      for (const std::string det : {"cnn-nodown", "fingerprint", "saturation"})
        REQUIRE(metrics_of(det + ",none,0,") == metrics_of(det + ",resize,1.000,"));

      const std::string sweep2 = fx.tmp.file("sweep2.csv");
      REQUIRE(run_cli({"sweep", "--config", fx.config_path, "--out", sweep2}) == 0);
      REQUIRE(testutil::read_text_file(sweep1) == testutil::read_text_file(sweep2));
      const std::string sweep3 = fx.tmp.file("sweep3.csv");
      REQUIRE(run_cli({"sweep", "--config", fx.config_path, "--out", sweep3,
                       "--workers", "2"}) == 0);
      REQUIRE(testutil::read_text_file(sweep1) == testutil::read_text_file(sweep3));
    }
  }

  SECTION("sweep refuses to run before models are trained") {
    REQUIRE(run_cli({"sweep", "--config", fx.config_path}) == 2);
  }

  SECTION("inspect exports artifact images for a source tag") {
    const std::string spec_png = fx.tmp.file("genA-spectrum.pgm");
    REQUIRE(run_cli({"inspect", "--manifest", fx.dataset_dir + "/train.tsv", "--source",
                     "genA", "--what", "avg-spectrum", "--out", spec_png}) == 0);
    const ImageBuffer avg = load_image(spec_png);
    REQUIRE(avg.width == 32);
    REQUIRE(avg.channels == 1);

    const std::string fp_png = fx.tmp.file("genA-print.pgm");
    REQUIRE(run_cli({"inspect", "--manifest", fx.dataset_dir + "/train.tsv", "--source",
                     "genA", "--what", "fingerprint", "--out", fp_png}) == 0);
    REQUIRE(load_image(fp_png).width == 32);
    const std::string sidecar = testutil::read_text_file(fp_png + ".txt");
    REQUIRE(sidecar.find("source genA") != std::string::npos);

    REQUIRE(run_cli({"inspect", "--manifest", fx.dataset_dir + "/train.tsv", "--source",
                     "genA", "--what", "histogram", "--out", spec_png}) == 2);
    REQUIRE(run_cli({"inspect", "--manifest", fx.dataset_dir + "/train.tsv", "--source",
                     "nope", "--what", "avg-spectrum", "--out", spec_png}) == 2);
  }
}

TEST_CASE("run_cli maps error categories to exit codes") {
  testutil::TempDir tmp;
  REQUIRE(run_cli({}) == 2);
  REQUIRE(run_cli({"synth"}) == 2);                       // missing --config
  REQUIRE(run_cli({"synth", "--bogus", "x"}) == 2);       // unknown flag
  REQUIRE(run_cli({"frobnicate"}) == 2);                  // unknown subcommand
  REQUIRE(run_cli({"synth", "--config", tmp.path() + "/absent.json"}) == 3);

  const std::string garbage = tmp.file("garbage.json");
  write_file(garbage, "]]not json");
  REQUIRE(run_cli({"synth", "--config", garbage}) == 2);

  const std::string cfg = tmp.file("cfg.json");
  write_file(cfg, "{\"dataset\": \"" + tmp.path() + "/ds\", \"outdir\": \"" +
                      tmp.path() + "/out\", \"detectors\": [\"saturation\"]}");
  REQUIRE(run_cli({"train", "--config", cfg, "--detector", "resnet"}) == 2);
  REQUIRE(run_cli({"eval", "--model", tmp.path() + "/missing.gbm", "--manifest",
                   tmp.path()}) == 3);

  // A single-class training split is degenerate data, exit code 4.
  const std::string mono = tmp.path() + "/ds";
  std::filesystem::create_directories(mono + "/train");
  DatasetManifest manifest;
  for (int i = 0; i < 2; ++i) {
    const std::string name = "train/real_" + std::to_string(i) + ".ppm";
    save_image(gen_real(static_cast<std::uint64_t>(i + 1), 32, 1.0), mono + "/" + name);
    ManifestEntry entry;
    entry.path = name;
    entry.label = 0;
    entry.source = "real";
    manifest.entries.push_back(entry);
  }
  save_manifest(manifest, mono + "/train.tsv");
  REQUIRE(run_cli({"train", "--config", cfg, "--detector", "saturation"}) == 4);
}
