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

// Binary random forest (0 = bonafide, 1 = spoof) with CART trees grown on
// bootstrap samples, and the forest-size x criterion grid search used for
// model selection.

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fdspeech {

struct LabeledDataset {
  std::vector<double> features;  // row-major, rows() x n_features
  std::size_t n_features = 0;
  std::vector<int> labels;
  std::vector<std::string> record_ids;
  std::vector<std::string> system_ids;  // "-" for bonafide; may be empty
  std::vector<std::string> column_names;  // may be empty
  std::string layout_hash;

  std::size_t rows() const { return labels.size(); }
  std::span<const double> row(std::size_t i) const {
    return {features.data() + i * n_features, n_features};
  }
  void AddRow(std::span<const double> values, int label, std::string record_id,
              std::string system_id = "-");
  void Validate() const;  // throws kEmptyDataset / kDomainError

  // Rows at `indices` (in that order), all columns.
  LabeledDataset SelectRows(std::span<const std::size_t> indices) const;
  // All rows, columns at `columns` (in that order). The layout hash is left
  // for the caller to set.
  LabeledDataset SelectColumns(std::span<const std::size_t> columns) const;
};

enum class Criterion { kGini, kEntropy };

std::string_view CriterionName(Criterion c);
Criterion ParseCriterion(std::string_view name);  // throws kInvalidConfig

struct ForestConfig {
  int n_trees = 100;
  Criterion criterion = Criterion::kGini;
  int features_per_split = 0;  // 0 means floor(sqrt(n_features))
  std::uint64_t seed = 0;
  int max_depth = 0;  // 0 means unlimited
  int min_samples_leaf = 1;
  bool bootstrap = true;

  int ResolvedFeaturesPerSplit(std::size_t n_features) const;
};

// Gini 1 - sum p^2, or entropy -sum p log2 p, of a two-class count pair.
double Impurity(Criterion criterion, std::array<std::uint32_t, 2> counts);

struct TreeNode {
  int feature = -1;  // -1 for leaves
  double threshold = 0.0;  // go left iff x[feature] <= threshold
  int left = -1;
  int right = -1;
  std::array<std::uint32_t, 2> counts{};  // training class counts at the node
  double gain = 0.0;  // weighted impurity decrease of the split

  bool is_leaf() const { return feature < 0; }
  int majority() const { return counts[1] > counts[0] ? 1 : 0; }
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  int Predict(std::span<const double> x) const;
  int Depth() const;
};

struct TrainedModel {
  std::vector<DecisionTree> trees;
  ForestConfig config;
  std::size_t n_features = 0;
  std::string layout_hash;
};

struct Prediction {
  int label = 0;
  double score = 0.0;  // fraction of trees voting spoof
};

// Grows one CART tree on the given rows (duplicates allowed). At each node
// features_per_split candidate features are drawn without replacement and the
// split with the largest impurity decrease over mid-point thresholds is
// taken. Growth stops at pure nodes, at max_depth, or when no candidate
// feature separates the node's rows.
DecisionTree TrainTree(const LabeledDataset& data, std::span<const std::size_t> rows,
                       const ForestConfig& config, std::uint64_t tree_seed);

// Convenience overload: all rows, no bootstrap.
DecisionTree TrainTree(const LabeledDataset& data, const ForestConfig& config,
                       std::uint64_t tree_seed);

// Tree t is grown from a generator seeded with config.seed + t, so the model
// depends only on (data, config) and not on `jobs`.
TrainedModel TrainForest(const LabeledDataset& data, const ForestConfig& config,
                         unsigned jobs = 1);

// Majority vote; ties go to bonafide. Throws kLayoutMismatch on a size or
// layout hash mismatch (an empty hash skips the hash check).
Prediction Predict(const TrainedModel& model, std::span<const double> features,
                   std::string_view layout_hash = {});

std::vector<int> PredictAll(const TrainedModel& model, const LabeledDataset& data);
double Accuracy(const TrainedModel& model, const LabeledDataset& data);

struct GridCell {
  int n_trees = 0;
  Criterion criterion = Criterion::kGini;
  double dev_accuracy = 0.0;
};

struct GridResult {
  TrainedModel best;
  std::vector<GridCell> cells;
};

// n_trees in {10, 100, 500, 1000} x {gini, entropy}; other fields from `base`.
std::vector<ForestConfig> DefaultGrid(const ForestConfig& base = {});

// Trains every config on `train`, scores it on `dev` and keeps the most
// accurate; ties prefer fewer trees, then gini.
GridResult GridSearch(const LabeledDataset& train, const LabeledDataset& dev,
                      std::span<const ForestConfig> grid, unsigned jobs = 1);

void SaveModel(const std::filesystem::path& path, const TrainedModel& model);
TrainedModel LoadModel(const std::filesystem::path& path);
std::string SerializeModel(const TrainedModel& model);

}  // namespace fdspeech
