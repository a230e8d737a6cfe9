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

#include "fdspeech/forest.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <numeric>
#include <random>
#include <sstream>

#include "fdspeech/error.hpp"
#include "fdspeech/parallel.hpp"

namespace fdspeech {
namespace {

using Counts = std::array<std::uint32_t, 2>;

struct SplitChoice {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

struct Pending {
  int node;
  std::vector<std::size_t> rows;
  int depth;
};

Counts CountLabels(const LabeledDataset& data, std::span<const std::size_t> rows) {
  Counts c{};
  for (std::size_t r : rows) ++c[data.labels[r]];
  return c;
}

double WeightedGain(Criterion criterion, const Counts& parent, const Counts& left,
                    const Counts& right) {
  const double n = parent[0] + parent[1];
  const double nl = left[0] + left[1];
  const double nr = right[0] + right[1];
  return Impurity(criterion, parent) - (nl / n) * Impurity(criterion, left) -
         (nr / n) * Impurity(criterion, right);
}

SplitChoice BestSplit(const LabeledDataset& data, std::span<const std::size_t> rows,
                      std::span<const int> candidates, const Counts& parent,
                      const ForestConfig& config) {
  SplitChoice best;
  double best_gain = -std::numeric_limits<double>::infinity();
  std::vector<std::pair<double, int>> column(rows.size());
  const auto min_leaf = static_cast<std::size_t>(std::max(1, config.min_samples_leaf));
  for (int feature : candidates) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      column[i] = {data.features[rows[i] * data.n_features + feature], data.labels[rows[i]]};
    }
    std::sort(column.begin(), column.end());
    Counts left{};
    for (std::size_t i = 0; i + 1 < column.size(); ++i) {
      ++left[column[i].second];
      if (column[i].first == column[i + 1].first) continue;
      if (i + 1 < min_leaf || column.size() - (i + 1) < min_leaf) continue;
      const Counts right = {parent[0] - left[0], parent[1] - left[1]};
      const double gain = WeightedGain(config.criterion, parent, left, right);
      if (gain > best_gain) {
        best_gain = gain;
        const double lo = column[i].first, hi = column[i + 1].first;
        double threshold = lo + (hi - lo) / 2.0;
        if (!(threshold < hi)) threshold = lo;
        best = {feature, threshold, gain};
      }
    }
  }
  return best;
}

}  // namespace

void LabeledDataset::AddRow(std::span<const double> values, int label,
                            std::string record_id, std::string system_id) {
  if (rows() == 0 && features.empty()) n_features = values.size();
  if (values.size() != n_features) {
    throw Error(ErrorCode::kLayoutMismatch,
                fmt::format("row has {} features, dataset has {}", values.size(), n_features));
  }
  features.insert(features.end(), values.begin(), values.end());
  labels.push_back(label);
  record_ids.push_back(std::move(record_id));
  system_ids.push_back(std::move(system_id));
}

void LabeledDataset::Validate() const {
  if (rows() == 0) throw Error(ErrorCode::kEmptyDataset, "dataset has no rows");
  if (features.size() != rows() * n_features ||
      (!record_ids.empty() && record_ids.size() != rows()) ||
      (!system_ids.empty() && system_ids.size() != rows())) {
    throw Error(ErrorCode::kDomainError, "dataset row counts disagree");
  }
  for (int y : labels) {
    if (y != 0 && y != 1) throw Error(ErrorCode::kDomainError, "labels must be 0 or 1");
  }
  for (double v : features) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kDomainError, "non-finite feature value");
  }
}

LabeledDataset LabeledDataset::SelectRows(std::span<const std::size_t> indices) const {
  LabeledDataset out;
  out.n_features = n_features;
  out.column_names = column_names;
  out.layout_hash = layout_hash;
  for (std::size_t i : indices) {
    out.features.insert(out.features.end(), row(i).begin(), row(i).end());
    out.labels.push_back(labels[i]);
    if (!record_ids.empty()) out.record_ids.push_back(record_ids[i]);
    if (!system_ids.empty()) out.system_ids.push_back(system_ids[i]);
  }
  return out;
}

LabeledDataset LabeledDataset::SelectColumns(std::span<const std::size_t> columns) const {
  LabeledDataset out;
  out.n_features = columns.size();
  out.labels = labels;
  out.record_ids = record_ids;
  out.system_ids = system_ids;
  out.features.reserve(rows() * columns.size());
  for (std::size_t i = 0; i < rows(); ++i) {
    for (std::size_t c : columns) out.features.push_back(features[i * n_features + c]);
  }
  if (!column_names.empty()) {
    for (std::size_t c : columns) out.column_names.push_back(column_names[c]);
  }
  return out;
}

std::string_view CriterionName(Criterion c) {
  return c == Criterion::kGini ? "gini" : "entropy";
}

Criterion ParseCriterion(std::string_view name) {
  if (name == "gini") return Criterion::kGini;
  if (name == "entropy") return Criterion::kEntropy;
  throw Error(ErrorCode::kInvalidConfig, "unknown criterion '" + std::string(name) + "'");
}

int ForestConfig::ResolvedFeaturesPerSplit(std::size_t n_features) const {
  const int n = static_cast<int>(n_features);
  int k = features_per_split > 0
              ? features_per_split
              : static_cast<int>(std::floor(std::sqrt(static_cast<double>(n_features))));
  return std::clamp(k, 1, std::max(1, n));
}

double Impurity(Criterion criterion, Counts counts) {
  const double n = counts[0] + counts[1];
  if (n == 0) return 0.0;
  const double p0 = counts[0] / n, p1 = counts[1] / n;
  if (criterion == Criterion::kGini) return 1.0 - p0 * p0 - p1 * p1;
  double h = 0.0;
  if (p0 > 0) h -= p0 * std::log2(p0);
  if (p1 > 0) h -= p1 * std::log2(p1);
  return h;
}

int DecisionTree::Predict(std::span<const double> x) const {
  int i = 0;
  while (!nodes[i].is_leaf()) {
    i = x[nodes[i].feature] <= nodes[i].threshold ? nodes[i].left : nodes[i].right;
  }
  return nodes[i].majority();
}

int DecisionTree::Depth() const {
  std::vector<int> depth(nodes.size(), 0);
  int deepest = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    deepest = std::max(deepest, depth[i]);
    if (!nodes[i].is_leaf()) {
      depth[nodes[i].left] = depth[nodes[i].right] = depth[i] + 1;
    }
  }
  return deepest;
}

DecisionTree TrainTree(const LabeledDataset& data, std::span<const std::size_t> rows,
                       const ForestConfig& config, std::uint64_t tree_seed) {
  if (rows.empty() || data.n_features == 0) {
    throw Error(ErrorCode::kEmptyDataset, "cannot grow a tree on no rows");
  }
  std::mt19937_64 rng(tree_seed);
  const int n_features = static_cast<int>(data.n_features);
  const int k = config.ResolvedFeaturesPerSplit(data.n_features);
  std::vector<int> feature_pool(n_features);

  DecisionTree tree;
  tree.nodes.emplace_back();
  std::vector<Pending> stack;
  stack.push_back({0, std::vector<std::size_t>(rows.begin(), rows.end()), 0});
  while (!stack.empty()) {
    Pending job = std::move(stack.back());
    stack.pop_back();
    const Counts counts = CountLabels(data, job.rows);
    tree.nodes[job.node].counts = counts;
    const bool pure = counts[0] == 0 || counts[1] == 0;
    const bool depth_capped = config.max_depth > 0 && job.depth >= config.max_depth;
    if (pure || depth_capped) continue;

    std::iota(feature_pool.begin(), feature_pool.end(), 0);
    for (int i = 0; i < k; ++i) {
      std::uniform_int_distribution<int> pick(i, n_features - 1);
      std::swap(feature_pool[i], feature_pool[pick(rng)]);
    }
    // Equal-gain splits go to the lowest feature index, whatever the draw order.
    std::sort(feature_pool.begin(), feature_pool.begin() + k);
    const SplitChoice split = BestSplit(
        data, job.rows, std::span<const int>(feature_pool).first(k), counts, config);
    if (split.feature < 0) continue;

    std::vector<std::size_t> left_rows, right_rows;
    for (std::size_t r : job.rows) {
      (data.features[r * data.n_features + split.feature] <= split.threshold ? left_rows
                                                                             : right_rows)
          .push_back(r);
    }
    const int left = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes.emplace_back();
    TreeNode& node = tree.nodes[job.node];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.gain = split.gain;
    node.left = left;
    node.right = left + 1;
    // Right first so the left subtree is expanded (and draws randomness) first.
    stack.push_back({left + 1, std::move(right_rows), job.depth + 1});
    stack.push_back({left, std::move(left_rows), job.depth + 1});
  }
  return tree;
}

DecisionTree TrainTree(const LabeledDataset& data, const ForestConfig& config,
                       std::uint64_t tree_seed) {
  std::vector<std::size_t> rows(data.rows());
  std::iota(rows.begin(), rows.end(), 0);
  return TrainTree(data, rows, config, tree_seed);
}

TrainedModel TrainForest(const LabeledDataset& data, const ForestConfig& config,
                         unsigned jobs) {
  data.Validate();
  if (config.n_trees < 1) throw Error(ErrorCode::kInvalidConfig, "n_trees must be >= 1");
  TrainedModel model;
  model.config = config;
  model.n_features = data.n_features;
  model.layout_hash = data.layout_hash;
  model.trees.resize(config.n_trees);
  const std::size_t n = data.rows();
  ParallelFor(model.trees.size(), jobs, [&](std::size_t t) {
    const std::uint64_t tree_seed = config.seed + t;
    std::vector<std::size_t> rows(n);
    if (config.bootstrap) {
      std::mt19937_64 rng(tree_seed);
      std::uniform_int_distribution<std::size_t> pick(0, n - 1);
      for (auto& r : rows) r = pick(rng);
      // Feature sampling continues from a distinct stream of the same seed.
      model.trees[t] = TrainTree(data, rows, config, rng());
    } else {
      std::iota(rows.begin(), rows.end(), 0);
      model.trees[t] = TrainTree(data, rows, config, tree_seed);
    }
  });
  return model;
}

Prediction Predict(const TrainedModel& model, std::span<const double> features,
                   std::string_view layout_hash) {
  if (features.size() != model.n_features ||
      (!layout_hash.empty() && !model.layout_hash.empty() &&
       layout_hash != model.layout_hash)) {
    throw Error(ErrorCode::kLayoutMismatch,
                fmt::format("model expects {} features (layout {}), got {} (layout {})",
                            model.n_features, model.layout_hash, features.size(),
                            layout_hash));
  }
  std::size_t spoof_votes = 0;
  for (const auto& tree : model.trees) spoof_votes += tree.Predict(features);
  Prediction p;
  p.score = static_cast<double>(spoof_votes) / static_cast<double>(model.trees.size());
  p.label = 2 * spoof_votes > model.trees.size() ? 1 : 0;
  return p;
}

std::vector<int> PredictAll(const TrainedModel& model, const LabeledDataset& data) {
  std::vector<int> out(data.rows());
  for (std::size_t i = 0; i < data.rows(); ++i) {
    out[i] = Predict(model, data.row(i), data.layout_hash).label;
  }
  return out;
}

double Accuracy(const TrainedModel& model, const LabeledDataset& data) {
  if (data.rows() == 0) throw Error(ErrorCode::kEmptyDataset, "no rows to score");
  const auto predicted = PredictAll(model, data);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.rows(); ++i) correct += predicted[i] == data.labels[i];
  return static_cast<double>(correct) / static_cast<double>(data.rows());
}

std::vector<ForestConfig> DefaultGrid(const ForestConfig& base) {
  std::vector<ForestConfig> grid;
  for (int n : {10, 100, 500, 1000}) {
    for (Criterion c : {Criterion::kGini, Criterion::kEntropy}) {
      ForestConfig cfg = base;
      cfg.n_trees = n;
      cfg.criterion = c;
      grid.push_back(cfg);
    }
  }
  return grid;
}

GridResult GridSearch(const LabeledDataset& train, const LabeledDataset& dev,
                      std::span<const ForestConfig> grid, unsigned jobs) {
  train.Validate();
  dev.Validate();
  if (grid.empty()) throw Error(ErrorCode::kInvalidConfig, "empty grid");
  if (train.layout_hash != dev.layout_hash || train.n_features != dev.n_features) {
    throw Error(ErrorCode::kLayoutMismatch,
                fmt::format("train layout {} vs dev layout {}", train.layout_hash,
                            dev.layout_hash));
  }
  GridResult result;
  bool have_best = false;
  double best_accuracy = -1.0;
  for (const ForestConfig& cfg : grid) {
    TrainedModel model = TrainForest(train, cfg, jobs);
    const double acc = Accuracy(model, dev);
    result.cells.push_back({cfg.n_trees, cfg.criterion, acc});
    bool better = !have_best || acc > best_accuracy;
    if (have_best && acc == best_accuracy) {
      const auto& cur = result.best.config;
      better = cfg.n_trees < cur.n_trees ||
               (cfg.n_trees == cur.n_trees && cfg.criterion == Criterion::kGini &&
                cur.criterion != Criterion::kGini);
    }
    if (better) {
      result.best = std::move(model);
      best_accuracy = acc;
      have_best = true;
    }
  }
  return result;
}

std::string SerializeModel(const TrainedModel& model) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["format"] = "fdspeech-forest";
  j["version"] = 1;
  j["layout_hash"] = model.layout_hash;
  j["n_features"] = model.n_features;
  const auto& c = model.config;
  j["config"] = {{"n_trees", c.n_trees},
                 {"criterion", CriterionName(c.criterion)},
                 {"features_per_split", c.features_per_split},
                 {"seed", c.seed},
                 {"max_depth", c.max_depth},
                 {"min_samples_leaf", c.min_samples_leaf},
                 {"bootstrap", c.bootstrap}};
  ordered_json trees = ordered_json::array();
  for (const auto& tree : model.trees) {
    ordered_json t;
    std::vector<int> feature, left, right;
    std::vector<double> threshold, gain;
    std::vector<std::uint32_t> bona, spoof;
    for (const auto& n : tree.nodes) {
      feature.push_back(n.feature);
      threshold.push_back(n.threshold);
      left.push_back(n.left);
      right.push_back(n.right);
      bona.push_back(n.counts[0]);
      spoof.push_back(n.counts[1]);
      gain.push_back(n.gain);
    }
    t["feature"] = feature;
    t["threshold"] = threshold;
    t["left"] = left;
    t["right"] = right;
    t["count_bonafide"] = bona;
    t["count_spoof"] = spoof;
    t["gain"] = gain;
    trees.push_back(std::move(t));
  }
  j["trees"] = std::move(trees);
  return j.dump() + "\n";
}

void SaveModel(const std::filesystem::path& path, const TrainedModel& model) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << SerializeModel(model);
}

TrainedModel LoadModel(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, path.string() + ": " + e.what());
  }
  if (j.value("format", "") != "fdspeech-forest") {
    throw Error(ErrorCode::kParseError, path.string() + " is not a forest model file");
  }
  try {
    TrainedModel model;
    model.layout_hash = j.at("layout_hash").get<std::string>();
    model.n_features = j.at("n_features").get<std::size_t>();
    const auto& c = j.at("config");
    model.config.n_trees = c.at("n_trees").get<int>();
    model.config.criterion = ParseCriterion(c.at("criterion").get<std::string>());
    model.config.features_per_split = c.at("features_per_split").get<int>();
    model.config.seed = c.at("seed").get<std::uint64_t>();
    model.config.max_depth = c.at("max_depth").get<int>();
    model.config.min_samples_leaf = c.at("min_samples_leaf").get<int>();
    model.config.bootstrap = c.at("bootstrap").get<bool>();
    for (const auto& t : j.at("trees")) {
      const auto feature = t.at("feature").get<std::vector<int>>();
      const auto threshold = t.at("threshold").get<std::vector<double>>();
      const auto left = t.at("left").get<std::vector<int>>();
      const auto right = t.at("right").get<std::vector<int>>();
      const auto bona = t.at("count_bonafide").get<std::vector<std::uint32_t>>();
      const auto spoof = t.at("count_spoof").get<std::vector<std::uint32_t>>();
      const auto gain = t.at("gain").get<std::vector<double>>();
      DecisionTree tree;
      tree.nodes.resize(feature.size());
      for (std::size_t i = 0; i < feature.size(); ++i) {
        auto& n = tree.nodes[i];
        n.feature = feature.at(i);
        n.threshold = threshold.at(i);
        n.left = left.at(i);
        n.right = right.at(i);
        n.counts = {bona.at(i), spoof.at(i)};
        n.gain = gain.at(i);
        const int size = static_cast<int>(feature.size());
        if (n.feature >= static_cast<int>(model.n_features) ||
            (!n.is_leaf() && (n.left <= 0 || n.left >= size || n.right <= 0 ||
                              n.right >= size))) {
          throw Error(ErrorCode::kParseError, path.string() + ": malformed tree node");
        }
      }
      if (tree.nodes.empty()) {
        throw Error(ErrorCode::kParseError, path.string() + ": empty tree");
      }
      model.trees.push_back(std::move(tree));
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, path.string() + ": " + e.what());
  }
}

}  // namespace fdspeech
