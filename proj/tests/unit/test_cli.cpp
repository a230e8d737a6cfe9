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

// Runs the fdspeech binary end to end. Its path comes from FDSPEECH_BIN.

#include <doctest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fdspeech/asvspoof.hpp"
#include "test_support.hpp"

using namespace fdspeech;
using namespace fdspeech::testing;

namespace {

struct Run {
  int status = -1;
  std::string err;
};

Run Fdspeech(const TempDir& dir, const std::string& args) {
  const auto err = dir / "stderr.txt";
  const std::string cmd = std::string(FDSPEECH_BIN) + " " + args + " >" +
                          (dir / "stdout.txt").string() + " 2>" + err.string();
  const int raw = std::system(cmd.c_str());
  Run r;
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.err = ReadFile(err);
  return r;
}

std::vector<std::string> Lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::size_t Columns(const std::string& line) {
  return static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
}

void WriteNoise(const std::filesystem::path& path, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 0.2);
  std::vector<double> x(n);
  for (double& v : x) v = std::clamp(g(rng), -0.99, 0.99);
  EncodeWav(path, Buf(std::move(x)));
}

// Default 416-column layout. Spoof rows carry `shift` in every column.
LabeledDataset Toy(std::size_t bonafide, std::size_t spoof, double shift, std::uint64_t seed) {
  std::vector<int> freqs(13);
  std::iota(freqs.begin(), freqs.end(), 2);
  LabeledDataset d;
  for (const auto& f : FeatureLayout(freqs, FdConfig{})) d.column_names.push_back(f.Name());
  d.n_features = d.column_names.size();
  d.layout_hash = LayoutHashOfNames(d.column_names);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 0.4);
  std::vector<double> row(d.n_features);
  for (std::size_t i = 0; i < bonafide + spoof; ++i) {
    const bool is_spoof = i >= bonafide;
    for (double& v : row) v = u(rng) + (is_spoof ? shift : 0.0);
    d.AddRow(row, is_spoof, "r" + std::to_string(100 + i),
             is_spoof ? "A0" + std::to_string(1 + i % 2) : "-");
  }
  return d;
}

TrainedModel StubModel(const LabeledDataset& like, bool perfect) {
  TrainedModel m;
  m.n_features = like.n_features;
  m.layout_hash = like.layout_hash;
  DecisionTree t;
  TreeNode root;
  if (perfect) {
    root.feature = 0;
    root.threshold = 0.5;
    root.left = 1;
    root.right = 2;
    root.counts = {1, 1};
    TreeNode bona, spoof;
    bona.counts = {1, 0};
    spoof.counts = {0, 1};
    t.nodes = {root, bona, spoof};
  } else {
    root.counts = {0, 1};
    t.nodes = {root};
  }
  m.trees.push_back(t);
  return m;
}

std::string Protocol(const std::vector<std::pair<std::string, std::string>>& rows) {
  std::string out;
  for (const auto& [utt, sys] : rows) {
    out += "S " + utt + " - " + sys + (sys == "-" ? " bonafide\n" : " spoof\n");
  }
  return out;
}

}  // namespace

TEST_CASE("usage errors") {
  TempDir dir("cli");
  CHECK(Fdspeech(dir, "").status == 64);
  CHECK(Fdspeech(dir, "--help").status == 0);
  CHECK(Fdspeech(dir, "bogus").status == 64);
  WriteFile(dir / "p.txt", Protocol({{"a", "-"}}));
  const Run r = Fdspeech(dir, "extract --protocol " + (dir / "p.txt").string() +
                                  " --audio-root " + dir.path().string() +
                                  " --segment breath --out " + (dir / "o.csv").string());
  CHECK(r.status == 64);
  CHECK_FALSE(std::filesystem::exists(dir / "o.csv"));
  CHECK(Fdspeech(dir, "train --train x.csv").status == 64);
}

TEST_CASE("extract") {
  TempDir dir("cli");
  WriteNoise(dir / "a.wav", 16000, 1);
  WriteNoise(dir / "b.wav", 16000, 2);
  WriteFile(dir / "p.txt", Protocol({{"a", "-"}, {"b", "A01"}}));
  const std::string base = "extract --protocol " + (dir / "p.txt").string() + " --audio-root " +
                           dir.path().string();

  SUBCASE("full segment gives one row per file") {
    const Run r = Fdspeech(dir, base + " --segment full --out " + (dir / "f.csv").string());
    REQUIRE(r.status == 0);
    const auto lines = Lines(ReadFile(dir / "f.csv"));
    REQUIRE(lines.size() == 3);
    for (const auto& l : lines) CHECK(Columns(l) == 419);
    CHECK(lines[1].rfind("a,0,-,", 0) == 0);
    CHECK(lines[2].rfind("b,1,A01,", 0) == 0);
    CHECK(std::filesystem::exists(dir / "f.csv.manifest"));
    CHECK(Lines(ReadFile(dir / "f.csv.skips.csv")).size() == 1);

    // Replaying the manifest reproduces the CSV, also with another job count.
    const Run again = Fdspeech(dir, "--config " + (dir / "f.csv.manifest").string() +
                                        " --jobs 2 --out " + (dir / "g.csv").string());
    REQUIRE(again.status == 0);
    CHECK(ReadFile(dir / "g.csv") == ReadFile(dir / "f.csv"));
  }
  SUBCASE("voiced-only record has no silence") {
    const Run r = Fdspeech(dir, base + " --segment silence --out " + (dir / "s.csv").string());
    REQUIRE(r.status == 0);
    CHECK(Lines(ReadFile(dir / "s.csv")).size() == 1);
    const auto skips = Lines(ReadFile(dir / "s.csv.skips.csv"));
    REQUIRE(skips.size() == 3);
    CHECK(skips[1].rfind("a,InsufficientData,", 0) == 0);
    CHECK(skips[2].rfind("b,InsufficientData,", 0) == 0);
  }
  SUBCASE("missing audio") {
    WriteFile(dir / "p.txt", Protocol({{"a", "-"}, {"zzz", "A01"}}));
    const Run r = Fdspeech(dir, base + " --out " + (dir / "m.csv").string());
    CHECK(r.status == 2);
    CHECK(r.err.find("zzz") != std::string::npos);
  }
}

TEST_CASE("train") {
  TempDir dir("cli");
  WriteFeatureCsv(dir / "train.csv", Toy(12, 12, 1.0, 1));
  WriteFeatureCsv(dir / "dev.csv", Toy(8, 8, 1.0, 2));
  const std::string base = "train --train " + (dir / "train.csv").string() + " --dev " +
                           (dir / "dev.csv").string() + " --model " + (dir / "m.json").string();

  SUBCASE("default grid") {
    REQUIRE(Fdspeech(dir, base).status == 0);
    const auto grid = Lines(ReadFile(dir / "m.json.grid.csv"));
    CHECK(grid.size() == 9);
    CHECK(grid[0] == "n_trees,criterion,dev_accuracy");
    CHECK(LoadModel(dir / "m.json").config.n_trees == 10);
  }
  SUBCASE("single cell") {
    REQUIRE(Fdspeech(dir, base + " --n-trees 10 --criterion gini").status == 0);
    CHECK(Lines(ReadFile(dir / "m.json.grid.csv")).size() == 2);
  }
  SUBCASE("layout mismatch") {
    const LabeledDataset dev = Toy(8, 8, 1.0, 2);
    const LabeledDataset narrow = SelectFeatureColumns(dev, {10}, {});
    WriteFeatureCsv(dir / "dev.csv", narrow);
    const Run r = Fdspeech(dir, base);
    CHECK(r.status == 65);
    CHECK(r.err.find(dev.layout_hash) != std::string::npos);
    CHECK(r.err.find(narrow.layout_hash) != std::string::npos);
  }
  SUBCASE("flags override the config file") {
    WriteFile(dir / "c.ini", "n-trees=100\ncriterion=entropy\nseed=5\n");
    REQUIRE(Fdspeech(dir, base + " --config " + (dir / "c.ini").string() + " --seed 6").status ==
            0);
    const TrainedModel m = LoadModel(dir / "m.json");
    CHECK(m.config.n_trees == 100);
    CHECK(m.config.criterion == Criterion::kEntropy);
    CHECK(m.config.seed == 6);
  }
}

TEST_CASE("evaluate") {
  TempDir dir("cli");
  const LabeledDataset toy = Toy(6, 4, 1.0, 3);
  WriteFeatureCsv(dir / "f.csv", toy);
  SaveModel(dir / "perfect.json", StubModel(toy, true));
  SaveModel(dir / "constant.json", StubModel(toy, false));
  const std::string base = "evaluate --features " + (dir / "f.csv").string() + " --out " +
                           (dir / "r.csv").string() + " --model ";

  REQUIRE(Fdspeech(dir, base + (dir / "perfect.json").string()).status == 0);
  auto rows = Lines(ReadFile(dir / "r.csv"));
  REQUIRE(rows.size() == 4);  // header, A01, A02, ALL
  CHECK(rows[3].rfind("ALL,", 0) == 0);
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].find(",1,1,") != std::string::npos);

  REQUIRE(Fdspeech(dir, base + (dir / "constant.json").string()).status == 0);
  rows = Lines(ReadFile(dir / "r.csv"));
  REQUIRE(rows.size() == 4);
  CHECK(rows[3].find(",0.4,0.5,") != std::string::npos);

  const LabeledDataset narrow = SelectFeatureColumns(toy, {20}, {});
  SaveModel(dir / "narrow.json", StubModel(narrow, true));
  CHECK(Fdspeech(dir, base + (dir / "narrow.json").string()).status == 65);
}

TEST_CASE("simulate") {
  TempDir dir("cli");
  const std::string args =
      "simulate --n-coeffs 8,16 --deltas 0.01 --frequencies 2,3 --trials 2 --signal-len 16384";
  REQUIRE(Fdspeech(dir, args + " --out " + (dir / "a.csv").string()).status == 0);
  REQUIRE(Fdspeech(dir, args + " --jobs 2 --out " + (dir / "b.csv").string()).status == 0);
  const std::string a = ReadFile(dir / "a.csv");
  CHECK(Lines(a).size() == 5);
  CHECK(a == ReadFile(dir / "b.csv"));

  const std::string manifest = ReadFile(dir / "a.csv.manifest");
  CHECK(manifest.find("# command: simulate") != std::string::npos);
  CHECK(manifest.find("[simulate]") != std::string::npos);
  REQUIRE(Fdspeech(dir, "--config " + (dir / "a.csv.manifest").string() + " --out " +
                            (dir / "c.csv").string())
              .status == 0);
  CHECK(ReadFile(dir / "c.csv") == a);
}

TEST_CASE("segment report") {
  TempDir dir("cli");
  // Exact zeros would be stripped before labelling, so silence is a -60 dB floor.
  std::vector<double> x(3030);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double level = i >= 1010 && i < 2020 ? 0.5 : 1e-3;
    x[i] = i % 2 ? level : -level;
  }
  EncodeWav(dir / "t.wav", Buf(x));
  REQUIRE(Fdspeech(dir, "segment-report --input " + (dir / "t.wav").string() + " --out " +
                            (dir / "w.csv").string())
              .status == 0);
  const auto rows = Lines(ReadFile(dir / "w.csv"));
  REQUIRE(rows.size() == 31);
  CHECK(rows[0] == "window_index,start_sample,energy_db,label");
  CHECK(rows[1].rfind("0,0,-", 0) == 0);
  CHECK(rows[1].find(",silence") != std::string::npos);
  CHECK(rows[11].rfind("10,1010,", 0) == 0);
  CHECK(rows[11].find(",voiced") != std::string::npos);
  CHECK(Fdspeech(dir, "segment-report --input " + (dir / "none.wav").string() + " --out " +
                          (dir / "w.csv").string())
            .status == 64);
}
