/*
 * Tests for the detection metrics: rank-based AUC against a pairwise
 * oracle, thresholded accuracy, detection probability at a false-alarm
 * budget, and ROC construction.
 *
 * Licensed under the terms of the Apache 2.0 License.
 * See LICENSE file in the project root for terms.
 */
#include <catch2/catch.hpp>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "ganbench/metrics.hpp"
#include "ganbench/rng.hpp"
#include "oracles.hpp"

using namespace ganbench;

namespace {

// Random score set with deliberate ties: scores are multiples of 1/16.
ScoreSet quantized_scores(std::uint64_t seed, std::size_t max_per_class) {
  Rng rng(seed);
  ScoreSet s;
  const auto np = rng.uniform_int(1, static_cast<std::int64_t>(max_per_class));
  const auto nn = rng.uniform_int(1, static_cast<std::int64_t>(max_per_class));
  for (std::int64_t i = 0; i < np; ++i)
    s.positives.push_back(static_cast<double>(rng.uniform_int(0, 16)) / 16.0);
  for (std::int64_t i = 0; i < nn; ++i)
    s.negatives.push_back(static_cast<double>(rng.uniform_int(0, 16)) / 16.0);
  return s;
}

}  // namespace

TEST_CASE("auc on pinned score sets") {
  REQUIRE(auc({{1.0, 1.0}, {0.0, 0.0}}) == 1.0);
  REQUIRE(auc({{0.7, 0.7}, {0.7}}) == 0.5);
  REQUIRE(auc({{0.9, 0.4}, {0.5, 0.1}}) == 0.75);
  REQUIRE_THROWS_AS(auc({{}, {0.1}}), DegenerateData);
  REQUIRE_THROWS_AS(auc({{0.1}, {}}), DegenerateData);
}

TEST_CASE("auc equals the pairwise count exactly") {
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const ScoreSet s = quantized_scores(seed, 200);
    REQUIRE(auc(s) == testutil::pairwise_auc(s));
  }
}

TEST_CASE("auc is invariant under strictly increasing score maps") {
  for (std::uint64_t seed = 51; seed <= 60; ++seed) {
    const ScoreSet s = quantized_scores(seed, 100);
    ScoreSet t = s;
    auto remap = [](double v) { return 3.0 * v - 2.0; };
    for (auto& v : t.positives) v = remap(v);
    for (auto& v : t.negatives) v = remap(v);
    REQUIRE(auc(t) == auc(s));
  }
}

TEST_CASE("auc flips under class exchange") {
  for (std::uint64_t seed = 61; seed <= 70; ++seed) {
    const ScoreSet s = quantized_scores(seed, 100);
    const ScoreSet swapped{s.negatives, s.positives};
    REQUIRE(auc(swapped) == Approx(1.0 - auc(s)).margin(1e-12));
  }
}

TEST_CASE("accuracy_at predicts fake strictly above the threshold") {
  REQUIRE(accuracy_at({{0.6, 0.4}, {0.7, 0.2}}, 0.5) == 0.5);
  // Scores tied with the threshold count as "real" predictions.
  REQUIRE(accuracy_at({{0.5, 0.5}, {0.5}}, 0.5) == Approx(1.0 / 3.0));
  REQUIRE(accuracy_at({{1.0}, {0.0}}, 0.5) == 1.0);
  REQUIRE_THROWS_AS(accuracy_at({{}, {0.1}}, 0.5), DegenerateData);
}

TEST_CASE("pd_at_far picks the least threshold within the budget") {
  ScoreSet s;
  for (int i = 0; i < 100; ++i)
    s.negatives.push_back(static_cast<double>(i) / 100.0);

  // At a 5% budget the threshold lands on 0.94: exactly five negatives
  // score strictly higher.
  s.positives = {94.5 / 100.0};
  REQUIRE(pd_at_far(s, 0.05) == 1.0);
  s.positives = {94.0 / 100.0};
  REQUIRE(pd_at_far(s, 0.05) == 0.0);

  ScoreSet sep;
  sep.negatives = {0.1, 0.2, 0.3};
  sep.positives = {0.9, 0.8, 0.95};
  REQUIRE(pd_at_far(sep, 0.01) == 1.0);

  REQUIRE_THROWS_AS(pd_at_far(s, 0.0), InvalidInput);
  REQUIRE_THROWS_AS(pd_at_far(s, 1.0), InvalidInput);
  REQUIRE_THROWS_AS(pd_at_far(s, -0.2), InvalidInput);
  REQUIRE_THROWS_AS(pd_at_far({{}, {0.1}}, 0.05), DegenerateData);
}

TEST_CASE("pd_at_far never overshoots the false-alarm budget") {
  for (std::uint64_t seed = 71; seed <= 90; ++seed) {
    const ScoreSet s = quantized_scores(seed, 150);
    for (double far : {0.01, 0.05, 0.1, 0.25}) {
      // Recover the implied threshold: the smallest negative with a
      // conforming strict-exceedance count.
      std::vector<double> neg = s.negatives;
      std::sort(neg.begin(), neg.end());
      double threshold = neg.back();
      for (double v : neg) {
        const auto above = static_cast<double>(
            std::count_if(neg.begin(), neg.end(), [&](double x) { return x > v; }));
        if (above <= far * static_cast<double>(neg.size())) {
          threshold = v;
          break;
        }
      }
      const auto fa = static_cast<double>(
          std::count_if(neg.begin(), neg.end(), [&](double x) { return x > threshold; }));
      REQUIRE(fa <= far * static_cast<double>(neg.size()));
      double detected = 0.0;
      for (double v : s.positives)
        if (v > threshold) detected += 1.0;
      REQUIRE(pd_at_far(s, far) ==
              detected / static_cast<double>(s.positives.size()));
    }
  }
}

TEST_CASE("pd_at_far is non-decreasing in the budget") {
  for (std::uint64_t seed = 91; seed <= 100; ++seed) {
    const ScoreSet s = quantized_scores(seed, 150);
    double prev = -1.0;
    for (double far : {0.01, 0.02, 0.05, 0.1, 0.2, 0.5}) {
      const double pd = pd_at_far(s, far);
      REQUIRE(pd >= prev);
      prev = pd;
    }
  }
}

TEST_CASE("pd_at_far under exchangeable scores tracks the budget") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(4242 + seed);
    ScoreSet s;
    for (int i = 0; i < 1000; ++i) s.positives.push_back(rng.normal());
    for (int i = 0; i < 1000; ++i) s.negatives.push_back(rng.normal());
    const double pd = pd_at_far(s, 0.05);
    REQUIRE(pd >= 0.02);
    REQUIRE(pd <= 0.09);
  }
}

TEST_CASE("pd_at_far degenerates gracefully on tiny negative samples") {
  ScoreSet s;
  for (int i = 1; i <= 10; ++i) s.negatives.push_back(static_cast<double>(i) / 10.0);
  s.positives = {1.5};
  REQUIRE(pd_at_far(s, 0.05) == 1.0);  // threshold collapses to max(neg)
  s.positives = {0.95};
  REQUIRE(pd_at_far(s, 0.05) == 0.0);
}

TEST_CASE("roc_curve spans (0,0) to (1,1) with matching trapezoid area") {
  const ScoreSet s{{0.9, 0.4}, {0.5, 0.1}};
  const auto curve = roc_curve(s);
  REQUIRE(curve.size() == 6);
  REQUIRE(curve.front().fpr == 0.0);
  REQUIRE(curve.front().tpr == 0.0);
  REQUIRE(std::isinf(curve.front().threshold));
  REQUIRE(curve.back().fpr == 1.0);
  REQUIRE(curve.back().tpr == 1.0);
  REQUIRE(roc_area(curve) == Approx(0.75).margin(1e-12));

  REQUIRE_THROWS_AS(roc_curve({{}, {0.1}}), DegenerateData);
  REQUIRE_THROWS_AS(roc_area({}), InvalidInput);
}

TEST_CASE("roc_curve is monotone and integrates to the auc") {
  for (std::uint64_t seed = 101; seed <= 150; ++seed) {
    const ScoreSet s = quantized_scores(seed, 120);
    const auto curve = roc_curve(s);
    std::vector<double> all = s.positives;
    all.insert(all.end(), s.negatives.begin(), s.negatives.end());
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());
    REQUIRE(curve.size() == all.size() + 2);
    for (std::size_t i = 1; i < curve.size(); ++i) {
      REQUIRE(curve[i].fpr >= curve[i - 1].fpr);
      REQUIRE(curve[i].tpr >= curve[i - 1].tpr);
      REQUIRE(curve[i].threshold < curve[i - 1].threshold);
    }
    REQUIRE(roc_area(curve) == Approx(auc(s)).margin(1e-12));
  }
}

TEST_CASE("write_roc_csv emits one labeled row per point") {
  const ScoreSet s{{0.9, 0.4}, {0.5, 0.1}};
  const auto curve = roc_curve(s);
  testutil::TempDir tmp;
  const std::string path = tmp.file("roc.csv");
  write_roc_csv(path, curve);
  const std::string text = testutil::read_text_file(path);
  REQUIRE(text.rfind("threshold,fpr,tpr\n", 0) == 0);
  REQUIRE(static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')) ==
          curve.size() + 1);
  REQUIRE(text.find("inf") != std::string::npos);
  REQUIRE_THROWS_AS(write_roc_csv(tmp.path() + "/no/dir/roc.csv", curve), IoError);
}

TEST_CASE("summarize bundles the individual metrics") {
  const ScoreSet s = quantized_scores(151, 80);
  const MetricSummary m = summarize(s);
  REQUIRE(m.auc == auc(s));
  REQUIRE(m.acc_at_half == accuracy_at(s, 0.5));
  REQUIRE(m.pd_at_5 == pd_at_far(s, 0.05));
  REQUIRE(m.pd_at_1 == pd_at_far(s, 0.01));
  REQUIRE(m.n_pos == s.positives.size());
  REQUIRE(m.n_neg == s.negatives.size());
}
