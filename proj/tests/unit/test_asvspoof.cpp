// Copyright 2026 The fdspeech Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <vector>

#include "fdspeech/asvspoof.hpp"
#include "test_support.hpp"

using namespace fdspeech;
using namespace fdspeech::testing;

namespace {

std::vector<ProtocolEntry> Parse(const std::string& text) {
  std::istringstream in(text);
  return ParseProtocol(in, "proto");
}

std::vector<ProtocolEntry> Corpus(std::size_t bonafide, std::vector<std::size_t> per_system) {
  std::vector<ProtocolEntry> out;
  for (std::size_t i = 0; i < bonafide; ++i) {
    out.push_back({"S", "B" + std::to_string(i), std::nullopt, Key::kBonafide});
  }
  for (std::size_t s = 0; s < per_system.size(); ++s) {
    for (std::size_t i = 0; i < per_system[s]; ++i) {
      out.push_back({"S", "X" + std::to_string(s) + "_" + std::to_string(i),
                     "A0" + std::to_string(s + 1), Key::kSpoof});
    }
  }
  return out;
}

std::map<std::string, std::size_t> CountBySystem(const std::vector<ProtocolEntry>& entries) {
  std::map<std::string, std::size_t> n;
  for (const auto& e : entries) ++n[e.system_or_dash()];
  return n;
}

void WriteNoise(const std::filesystem::path& path, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 0.2);
  std::vector<double> x(n);
  for (double& v : x) v = std::clamp(g(rng), -0.99, 0.99);
  EncodeWav(path, Buf(std::move(x)));
}

std::vector<std::string> DefaultNames() {
  std::vector<int> freqs(13);
  std::iota(freqs.begin(), freqs.end(), 2);
  std::vector<std::string> names;
  for (const auto& d : FeatureLayout(freqs, FdConfig{})) names.push_back(d.Name());
  return names;
}

// Bonafide rows near 0, spoof rows near `shift`, six spoof systems.
LabeledDataset SyntheticFeatures(std::size_t per_class, double shift, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  LabeledDataset d;
  d.column_names = DefaultNames();
  d.n_features = d.column_names.size();
  d.layout_hash = LayoutHashOfNames(d.column_names);
  std::vector<double> row(d.n_features);
  for (std::size_t i = 0; i < per_class * 6; ++i) {
    for (double& v : row) v = g(rng);
    d.AddRow(row, 0, "bona" + std::to_string(i), "-");
  }
  for (int s = 1; s <= 6; ++s) {
    for (std::size_t i = 0; i < per_class; ++i) {
      for (double& v : row) v = g(rng) + shift;
      d.AddRow(row, 1, "A0" + std::to_string(s) + "_" + std::to_string(i),
               "A0" + std::to_string(s));
    }
  }
  return d;
}

TrainedModel ConstantModel(int label, const LabeledDataset& like) {
  TrainedModel m;
  m.n_features = like.n_features;
  m.layout_hash = like.layout_hash;
  DecisionTree t;
  TreeNode leaf;
  leaf.counts = {label ? 0u : 1u, label ? 1u : 0u};
  t.nodes.push_back(leaf);
  m.trees.push_back(t);
  return m;
}

}  // namespace

TEST_CASE("protocol lines") {
  const auto e = Parse(
      "LA_0079 LA_T_1138215 - - bonafide\n"
      "\n"
      "LA_0079 LA_T_1271820 - A01 spoof\n");
  REQUIRE(e.size() == 2);
  CHECK(e[0].speaker_id == "LA_0079");
  CHECK(e[0].utterance_id == "LA_T_1138215");
  CHECK_FALSE(e[0].system_id.has_value());
  CHECK(e[0].key == Key::kBonafide);
  CHECK(e[1].system_id == "A01");
  CHECK(e[1].label() == 1);

  CHECK(ErrorCodeOf([] { Parse("a b - - bonafide\nLA_0079 LA_T_1 -\n"); }) ==
        Code(ErrorCode::kParseError));
  try {
    Parse("a b - - bonafide\nLA_0079 LA_T_1 -\n");
  } catch (const Error& err) {
    CHECK(std::string(err.what()).find("proto:2") != std::string::npos);
  }
  CHECK(ErrorCodeOf([] { Parse("a b - - maybe\n"); }) == Code(ErrorCode::kParseError));
  CHECK(ErrorCodeOf([] { Parse("a b - A01 bonafide\n"); }) == Code(ErrorCode::kParseError));
  CHECK(ErrorCodeOf([] { Parse("a b - - spoof\n"); }) == Code(ErrorCode::kParseError));
  CHECK(ErrorCodeOf([] { ParseProtocol(std::filesystem::path("/nonexistent/p.txt")); }) ==
        Code(ErrorCode::kIoError));
}

TEST_CASE("balancing") {
  SUBCASE("already balanced") {
    const auto out = BalanceTraining(Corpus(200, {100, 100}), 1);
    const auto n = CountBySystem(out);
    CHECK(n.at("-") == 200);
    CHECK(n.at("A01") == 100);
    CHECK(n.at("A02") == 100);
  }
  SUBCASE("systems decimated to match bonafide") {
    const auto out = BalanceTraining(Corpus(120, {100, 100}), 1);
    const auto n = CountBySystem(out);
    CHECK(n.at("-") == 120);
    CHECK(n.at("A01") == 60);
    CHECK(n.at("A02") == 60);
  }
  SUBCASE("no bonafide") {
    CHECK(ErrorCodeOf([] { BalanceTraining(Corpus(0, {10, 10}), 1); }) ==
          Code(ErrorCode::kDegenerateProtocol));
    CHECK(ErrorCodeOf([] { BalanceTraining(Corpus(10, {}), 1); }) ==
          Code(ErrorCode::kDegenerateProtocol));
  }
  SUBCASE("equal classes for arbitrary sizes, protocol order kept") {
    std::mt19937_64 rng(4);
    std::uniform_int_distribution<std::size_t> size(1, 80);
    for (int trial = 0; trial < 30; ++trial) {
      std::vector<std::size_t> systems(1 + trial % 6);
      for (auto& s : systems) s = size(rng);
      const auto in = Corpus(size(rng) + 5, systems);
      const auto out = BalanceTraining(in, trial);
      CHECK(out == BalanceTraining(in, trial));
      auto n = CountBySystem(out);
      const std::size_t bona = n["-"];
      n.erase("-");
      std::size_t spoof = 0;
      for (const auto& [sys, c] : n) {
        CHECK(c == n.begin()->second);
        spoof += c;
      }
      CHECK(spoof == bona);
      CHECK(n.size() == systems.size());
      std::size_t j = 0;
      for (const auto& e : in) {
        if (j < out.size() && out[j].utterance_id == e.utterance_id) ++j;
      }
      CHECK(j == out.size());
    }
  }
}

TEST_CASE("building datasets from audio") {
  TempDir dir("asv");
  WriteNoise(dir / "B0.wav", 32000, 1);
  WriteNoise(dir / "X0_0.wav", 32000, 2);
  WriteNoise(dir / "SHORT.wav", 1024, 3);  // a single frame: too few digits
  std::vector<ProtocolEntry> entries = Corpus(1, {1});
  entries.push_back({"S", "SHORT", std::string("A01"), Key::kSpoof});
  const ExtractionConfig cfg = ExtractionConfig::ForSegment(SegmentKind::kFull);

  SUBCASE("empty entry list") {
    const BuildResult r = BuildDataset({}, dir.path(), cfg);
    CHECK(r.dataset.rows() == 0);
    CHECK(r.dataset.n_features == 416);
    CHECK(r.skips.empty());
  }
  SUBCASE("one record skipped") {
    const BuildResult r = BuildDataset(entries, dir.path(), cfg);
    CHECK(r.dataset.rows() == 2);
    CHECK(r.dataset.n_features == 416);
    CHECK(r.layout.size() == 416);
    REQUIRE(r.skips.size() == 1);
    CHECK(r.skips[0].record_id == "SHORT");
    CHECK(r.skips[0].reason == "InsufficientDigits");
    CHECK(r.dataset.record_ids == std::vector<std::string>{"B0", "X0_0"});
    CHECK(r.dataset.labels == std::vector<int>{0, 1});

    WriteSkipLog(dir / "skips.csv", r.skips);
    const std::string log = ReadFile(dir / "skips.csv");
    CHECK(log.rfind("record_id,reason,detail\nSHORT,InsufficientDigits,", 0) == 0);
  }
  SUBCASE("byte-identical output across runs and job counts") {
    std::ostringstream a, b;
    WriteFeatureCsv(a, BuildDataset(entries, dir.path(), cfg, 1).dataset);
    WriteFeatureCsv(b, BuildDataset(entries, dir.path(), cfg, 3).dataset);
    CHECK(a.str() == b.str());
    CHECK(a.str().rfind("record_id,label,system_id,js_f2_b10_d1,", 0) == 0);
  }
  SUBCASE("missing audio fails before any work") {
    entries.push_back({"S", "GONE", std::nullopt, Key::kBonafide});
    CHECK(ErrorCodeOf([&] { BuildDataset(entries, dir.path(), cfg); }) ==
          Code(ErrorCode::kMissingAudio));
  }
}

TEST_CASE("feature csv round trip") {
  TempDir dir("csv");
  LabeledDataset d = SyntheticFeatures(2, 3.0, 9);
  d.features[7] = 1.0 / 3.0;
  d.features[8] = -1e-300;
  WriteFeatureCsv(dir / "f.csv", d);
  const LabeledDataset back = ReadFeatureCsv(dir / "f.csv");
  CHECK(back.n_features == d.n_features);
  CHECK(back.layout_hash == d.layout_hash);
  CHECK(back.column_names == d.column_names);
  REQUIRE(back.rows() == d.rows());
  // Rows come back sorted by record id.
  std::map<std::string, std::size_t> at;
  for (std::size_t i = 0; i < d.rows(); ++i) at[d.record_ids[i]] = i;
  std::size_t k = 0;
  for (const auto& [id, i] : at) {
    CHECK(back.record_ids[k] == id);
    CHECK(back.labels[k] == d.labels[i]);
    CHECK(back.system_ids[k] == d.system_ids[i]);
    const auto a = back.row(k), b = d.row(i);
    CHECK(std::equal(a.begin(), a.end(), b.begin()));
    ++k;
  }
  WriteFile(dir / "bad.csv", "record_id,label,system_id,js_f2_b10_d1\nr,0,-,abc\n");
  CHECK(ErrorCodeOf([&] { ReadFeatureCsv(dir / "bad.csv"); }) == Code(ErrorCode::kParseError));
}

TEST_CASE("feature names and column subsets") {
  const auto names = DefaultNames();
  std::vector<int> freqs(13);
  std::iota(freqs.begin(), freqs.end(), 2);
  CHECK(LayoutHashOfNames(names) == LayoutHash(FeatureLayout(freqs, FdConfig{})));
  for (const auto& n : names) CHECK(ParseFeatureName(n).Name() == n);
  const FeatureDescriptor tsallis = ParseFeatureName("tsallis_f14_b20_d2.5");
  CHECK(tsallis.divergence == "tsallis");
  CHECK(tsallis.frequency == 14);
  CHECK(tsallis.base == 20);
  CHECK(tsallis.delta == 2.5);
  CHECK(ErrorCodeOf([] { ParseFeatureName("js_f2_d1"); }) == Code(ErrorCode::kParseError));

  const LabeledDataset d = SyntheticFeatures(1, 1.0, 2);
  const LabeledDataset d1 = SelectFeatureColumns(d, {}, {1.0});
  CHECK(d1.n_features == 104);
  for (const auto& n : d1.column_names) CHECK(ParseFeatureName(n).delta == 1.0);
  CHECK(d1.layout_hash == LayoutHashOfNames(d1.column_names));
  CHECK(SelectFeatureColumns(d, {10}, {}).n_features == 208);
  CHECK(SelectFeatureColumns(d, {20}, {1.0, 2.0}).n_features == 104);
  const LabeledDataset all = SelectFeatureColumns(d, {}, {});
  CHECK(all.features == d.features);
  CHECK(all.layout_hash == d.layout_hash);
}

TEST_CASE("scoring") {
  std::vector<int> labels(100, 0);
  std::fill(labels.begin() + 50, labels.end(), 1);
  const ReportRow constant = ScoreRows(labels, std::vector<int>(100, 1));
  CHECK(constant.accuracy == 0.5);
  CHECK(constant.balanced_accuracy == 0.5);
  CHECK(constant.n_bonafide == 50);
  CHECK(constant.n_spoof == 50);
  const ReportRow perfect = ScoreRows(labels, labels);
  CHECK(perfect.accuracy == 1.0);
  CHECK(perfect.balanced_accuracy == 1.0);

  // 60 bonafide, 20 spoof, spoof always caught, half the bonafide flagged.
  std::vector<int> l(80, 0), p(80, 0);
  std::fill(l.begin() + 60, l.end(), 1);
  std::fill(p.begin() + 30, p.end(), 1);
  const ReportRow skewed = ScoreRows(l, p);
  CHECK(skewed.accuracy == doctest::Approx(50.0 / 80.0));
  CHECK(skewed.balanced_accuracy == doctest::Approx(0.75));
}

TEST_CASE("one-vs-one evaluation") {
  const LabeledDataset train = SyntheticFeatures(10, 5.0, 1);
  const LabeledDataset dev = SyntheticFeatures(10, 5.0, 2);
  ForestConfig cfg;
  cfg.n_trees = 25;
  const TrainedModel m = TrainForest(train, cfg);

  const EvaluationReport r = OneVsOneEval(m, dev, "Full", "all", true);
  REQUIRE(r.rows.size() == 7);
  for (int s = 0; s < 6; ++s) {
    CHECK(r.rows[s].system == "A0" + std::to_string(s + 1));
    CHECK(r.rows[s].n_bonafide == 60);
    CHECK(r.rows[s].n_spoof == 10);
    CHECK(r.rows[s].accuracy == 1.0);
    CHECK(r.rows[s].segment == "Full");
  }
  CHECK(r.rows[6].system == "ALL");
  CHECK(r.rows[6].n_spoof == 60);

  const EvaluationReport spoof = OneVsOneEval(ConstantModel(1, dev), dev, "Full", "c", true);
  CHECK(spoof.rows.back().accuracy == 0.5);
  CHECK(spoof.rows.back().balanced_accuracy == 0.5);
  CHECK(spoof.rows[0].accuracy == doctest::Approx(10.0 / 70.0));

  std::ostringstream csv;
  WriteReportCsv(csv, r);
  CHECK(csv.str().rfind("system,", 0) == 0);

  TrainedModel other = m;
  other.layout_hash = "ffffffffffffffff";
  CHECK(ErrorCodeOf([&] { OneVsOneEval(other, dev, "Full", "x"); }) ==
        Code(ErrorCode::kLayoutMismatch));
  const LabeledDataset narrow = SelectFeatureColumns(dev, {10}, {});
  CHECK(ErrorCodeOf([&] { OneVsOneEval(m, narrow, "Full", "x"); }) ==
        Code(ErrorCode::kLayoutMismatch));
}

TEST_CASE("default ablation grid") {
  const auto configs = DefaultAblations();
  REQUIRE(configs.size() == 8);
  std::vector<SegmentFeatures> features;
  for (auto kind : {SegmentKind::kSilence, SegmentKind::kFull, SegmentKind::kVoiced}) {
    features.push_back({kind, SyntheticFeatures(6, 3.0, 10), SyntheticFeatures(6, 3.0, 11),
                        SyntheticFeatures(6, 3.0, 12)});
  }
  ForestConfig cell;
  cell.n_trees = 10;
  const AblationResult r = AblationRun(features, configs, {cell});
  CHECK(r.dev.rows.size() == 48);
  CHECK(r.eval.rows.size() == 48);
  CHECK(r.grids.size() == 8);
  CHECK(r.grids.front().first == "silence:d1");
  CHECK(r.grids.back().first == "voiced:d1-3");
  CHECK(r.dev.rows.front().config == "d1");
  CHECK(r.dev.rows.back().config == "d1-3");
  CHECK(r.dev.rows.back().segment == "voiced");
}
