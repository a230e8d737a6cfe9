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

#include "fdspeech/asvspoof.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "fdspeech/audio_io.hpp"
#include "fdspeech/error.hpp"
#include "fdspeech/parallel.hpp"

namespace fdspeech {
namespace {

std::vector<std::string> SplitCsv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double ParseDouble(const std::string& text, const std::string& where) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size()) {
    throw Error(ErrorCode::kParseError, where + ": bad number '" + text + "'");
  }
  return v;
}

std::ofstream OpenForWrite(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  return out;
}

template <typename T>
bool Contains(const std::vector<T>& set, const T& v) {
  return set.empty() || std::find(set.begin(), set.end(), v) != set.end();
}

std::string JoinInts(const std::vector<int>& v) {
  return fmt::format("{}", fmt::join(v, ","));
}

std::string JoinDeltas(const std::vector<double>& v) {
  std::vector<std::string> s;
  for (double d : v) s.push_back(FormatDelta(d));
  return fmt::format("{}", fmt::join(s, ","));
}

}  // namespace

std::vector<ProtocolEntry> ParseProtocol(std::istream& in, const std::string& name) {
  std::vector<ProtocolEntry> entries;
  std::string line;
  for (int line_no = 1; std::getline(in, line); ++line_no) {
    std::istringstream ss(line);
    std::vector<std::string> fields;
    for (std::string f; ss >> f;) fields.push_back(f);
    if (fields.empty()) continue;
    if (fields.size() < 5) {
      throw Error(ErrorCode::kParseError,
                  fmt::format("{}:{}: expected at least 5 fields, got {}", name, line_no,
                              fields.size()));
    }
    ProtocolEntry e;
    e.speaker_id = fields[0];
    e.utterance_id = fields[1];
    if (fields[3] != "-") e.system_id = fields[3];
    if (fields[4] == "bonafide") {
      e.key = Key::kBonafide;
    } else if (fields[4] == "spoof") {
      e.key = Key::kSpoof;
    } else {
      throw Error(ErrorCode::kParseError,
                  fmt::format("{}:{}: unknown key '{}'", name, line_no, fields[4]));
    }
    if ((e.key == Key::kBonafide) != !e.system_id.has_value()) {
      throw Error(ErrorCode::kParseError,
                  fmt::format("{}:{}: bonafide entries have no system id and spoof "
                              "entries need one",
                              name, line_no));
    }
    entries.push_back(std::move(e));
  }
  return entries;
}

std::vector<ProtocolEntry> ParseProtocol(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  return ParseProtocol(in, path.string());
}

std::vector<ProtocolEntry> BalanceTraining(const std::vector<ProtocolEntry>& entries,
                                           std::uint64_t seed) {
  std::vector<std::size_t> bonafide;
  std::map<std::string, std::vector<std::size_t>> systems;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].key == Key::kBonafide) {
      bonafide.push_back(i);
    } else {
      systems[*entries[i].system_id].push_back(i);
    }
  }
  if (bonafide.empty() || systems.empty()) {
    throw Error(ErrorCode::kDegenerateProtocol,
                fmt::format("{} bonafide entries and {} spoof systems", bonafide.size(),
                            systems.size()));
  }
  const std::size_t k = systems.size();
  std::size_t smallest = bonafide.size();
  for (const auto& [id, idx] : systems) smallest = std::min(smallest, idx.size());
  const std::size_t per_class = std::min(smallest, bonafide.size() / k);
  if (per_class == 0) {
    throw Error(ErrorCode::kDegenerateProtocol,
                fmt::format("{} bonafide entries cannot balance {} systems", bonafide.size(), k));
  }

  std::mt19937_64 rng(seed);
  std::vector<std::size_t> keep;
  auto take = [&](std::vector<std::size_t> idx, std::size_t n) {
    std::shuffle(idx.begin(), idx.end(), rng);
    keep.insert(keep.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n));
  };
  take(bonafide, k * per_class);
  for (const auto& [id, idx] : systems) take(idx, per_class);
  std::sort(keep.begin(), keep.end());
  std::vector<ProtocolEntry> out;
  out.reserve(keep.size());
  for (std::size_t i : keep) out.push_back(entries[i]);
  return out;
}

ExtractionConfig ExtractionConfig::ForSegment(SegmentKind kind) {
  ExtractionConfig c;
  c.segment = kind;
  c.cepstral = CepstralConfig::ForSegment(kind);
  return c;
}

bool IsSkipReason(ErrorCode code) {
  return code == ErrorCode::kEmptySignal || code == ErrorCode::kTooShort ||
         code == ErrorCode::kInsufficientData || code == ErrorCode::kInsufficientDigits;
}

FeatureVector ExtractRecordFeatures(const AudioBuffer& buffer, const ExtractionConfig& config) {
  const AudioBuffer normalized = PeakNormalize(StripZeros(buffer));
  const Segmentation seg = Segment(normalized, config.energy);
  const SegmentView& view = seg.view(config.segment);
  if (view.sample_count() < config.cepstral.frame_len) {
    throw Error(ErrorCode::kInsufficientData,
                fmt::format("{}: {} view has {} samples, one frame needs {}",
                            buffer.source_id, SegmentKindName(config.segment),
                            view.sample_count(), config.cepstral.frame_len));
  }
  const AudioBuffer part = Extract(normalized, view);
  MfccExtractor extractor(config.cepstral);
  return AssembleFeatures(extractor.Compute(part), config.fd);
}

BuildResult BuildDataset(const std::vector<ProtocolEntry>& entries,
                         const std::filesystem::path& audio_root,
                         const ExtractionConfig& config, unsigned jobs,
                         const std::string& extension) {
  config.energy.Validate();
  config.cepstral.Validate();
  config.fd.Validate();
  std::vector<std::filesystem::path> paths;
  paths.reserve(entries.size());
  for (const auto& e : entries) {
    auto p = audio_root / (e.utterance_id + "." + extension);
    if (!std::filesystem::is_regular_file(p)) {
      throw Error(ErrorCode::kMissingAudio,
                  fmt::format("record {}: {} not found", e.utterance_id, p.string()));
    }
    paths.push_back(std::move(p));
  }

  struct Outcome {
    std::optional<FeatureVector> features;
    std::optional<SkipRecord> skip;
  };
  std::vector<Outcome> outcomes(entries.size());
  ParallelFor(entries.size(), jobs, [&](std::size_t i) {
    AudioBuffer audio = DecodeWav(paths[i]);
    audio.source_id = entries[i].utterance_id;
    try {
      outcomes[i].features = ExtractRecordFeatures(audio, config);
    } catch (const Error& e) {
      if (!IsSkipReason(e.code())) throw;
      outcomes[i].skip =
          SkipRecord{entries[i].utterance_id, std::string(ErrorCodeName(e.code())), e.message()};
    }
  });

  BuildResult result;
  CepstralMatrix probe;
  for (int c = config.cepstral.coeff_lo; c <= config.cepstral.coeff_hi; ++c) {
    probe.frequencies.push_back(c);
  }
  result.layout = FeatureLayout(probe.frequencies, config.fd);
  result.dataset.n_features = result.layout.size();
  for (const auto& d : result.layout) result.dataset.column_names.push_back(d.Name());
  result.dataset.layout_hash = LayoutHash(result.layout);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (outcomes[i].skip) {
      result.skips.push_back(*outcomes[i].skip);
      continue;
    }
    const FeatureVector& fv = *outcomes[i].features;
    result.diverged_fits += fv.diverged_fits;
    result.dataset.AddRow(fv.values, entries[i].label(), entries[i].utterance_id,
                          entries[i].system_or_dash());
  }
  return result;
}

void WriteFeatureCsv(std::ostream& out, const LabeledDataset& data) {
  out << "record_id,label,system_id";
  for (const auto& name : data.column_names) out << ',' << name;
  out << '\n';
  std::vector<std::size_t> order(data.rows());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return data.record_ids[a] < data.record_ids[b];
  });
  fmt::memory_buffer buf;
  for (std::size_t i : order) {
    buf.clear();
    fmt::format_to(std::back_inserter(buf), "{},{},{}", data.record_ids[i], data.labels[i],
                   data.system_ids.empty() ? std::string("-") : data.system_ids[i]);
    for (double v : data.row(i)) fmt::format_to(std::back_inserter(buf), ",{}", v);
    buf.push_back('\n');
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  }
}

void WriteFeatureCsv(const std::filesystem::path& path, const LabeledDataset& data) {
  auto out = OpenForWrite(path);
  WriteFeatureCsv(out, data);
}

LabeledDataset ReadFeatureCsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  const std::string name = path.string();
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::kParseError, name + ": empty file");
  auto header = SplitCsv(line);
  if (header.size() < 3 || header[0] != "record_id" || header[1] != "label" ||
      header[2] != "system_id") {
    throw Error(ErrorCode::kParseError, name + ": missing record_id,label,system_id header");
  }
  LabeledDataset data;
  data.column_names.assign(header.begin() + 3, header.end());
  data.n_features = data.column_names.size();
  data.layout_hash = LayoutHashOfNames(data.column_names);
  std::vector<double> row(data.n_features);
  for (int line_no = 2; std::getline(in, line); ++line_no) {
    if (line.empty()) continue;
    const auto fields = SplitCsv(line);
    const std::string where = fmt::format("{}:{}", name, line_no);
    if (fields.size() != header.size()) {
      throw Error(ErrorCode::kParseError,
                  fmt::format("{}: {} fields, header has {}", where, fields.size(),
                              header.size()));
    }
    const int label = fields[1] == "1" ? 1 : fields[1] == "0" ? 0 : -1;
    if (label < 0) throw Error(ErrorCode::kParseError, where + ": label must be 0 or 1");
    for (std::size_t c = 0; c < data.n_features; ++c) row[c] = ParseDouble(fields[c + 3], where);
    data.AddRow(row, label, fields[0], fields[2]);
  }
  return data;
}

void WriteFeatureSidecar(const std::filesystem::path& path, const ExtractionConfig& config,
                         const LabeledDataset& data) {
  auto out = OpenForWrite(path);
  out << "segment=" << SegmentKindName(config.segment) << '\n'
      << "window_len=" << config.energy.window_len << '\n'
      << "threshold_db=" << fmt::format("{}", config.energy.threshold_db) << '\n'
      << "frame_len=" << config.cepstral.frame_len << '\n'
      << "hop=" << config.cepstral.hop << '\n'
      << "n_filters=" << config.cepstral.n_filters << '\n'
      << "coeff_lo=" << config.cepstral.coeff_lo << '\n'
      << "coeff_hi=" << config.cepstral.coeff_hi << '\n'
      << "bases=" << JoinInts(config.fd.bases) << '\n'
      << "deltas=" << JoinDeltas(config.fd.deltas) << '\n'
      << "alpha=" << fmt::format("{}", config.fd.alpha) << '\n'
      << "epsilon=" << fmt::format("{}", config.fd.epsilon) << '\n'
      << "min_digits=" << config.fd.min_digits << '\n'
      << "n_features=" << data.n_features << '\n'
      << "layout_hash=" << data.layout_hash << '\n';
}

void WriteSkipLog(const std::filesystem::path& path, const std::vector<SkipRecord>& skips) {
  auto out = OpenForWrite(path);
  out << "record_id,reason,detail\n";
  for (const auto& s : skips) {
    std::string detail = s.detail;
    std::replace(detail.begin(), detail.end(), ',', ';');
    out << s.record_id << ',' << s.reason << ',' << detail << '\n';
  }
}

FeatureDescriptor ParseFeatureName(const std::string& name) {
  const auto bad = [&] {
    return Error(ErrorCode::kParseError, "bad feature column name '" + name + "'");
  };
  const auto d_pos = name.rfind("_d");
  const auto b_pos = name.rfind("_b", d_pos);
  const auto f_pos = name.rfind("_f", b_pos);
  if (d_pos == std::string::npos || b_pos == std::string::npos || f_pos == std::string::npos ||
      f_pos == 0) {
    throw bad();
  }
  FeatureDescriptor desc;
  desc.divergence = name.substr(0, f_pos);
  try {
    desc.frequency = std::stoi(name.substr(f_pos + 2, b_pos - f_pos - 2));
    desc.base = std::stoi(name.substr(b_pos + 2, d_pos - b_pos - 2));
    desc.delta = ParseDouble(name.substr(d_pos + 2), name);
  } catch (const std::logic_error&) {
    throw bad();
  }
  if (desc.Name() != name) throw bad();
  return desc;
}

std::string LayoutHashOfNames(const std::vector<std::string>& names) {
  std::vector<FeatureDescriptor> layout;
  layout.reserve(names.size());
  for (const auto& n : names) layout.push_back(ParseFeatureName(n));
  return LayoutHash(layout);
}

LabeledDataset SelectFeatureColumns(const LabeledDataset& data, const std::vector<int>& bases,
                                    const std::vector<double>& deltas) {
  std::vector<std::size_t> columns;
  for (std::size_t c = 0; c < data.column_names.size(); ++c) {
    const auto desc = ParseFeatureName(data.column_names[c]);
    if (Contains(bases, desc.base) && Contains(deltas, desc.delta)) columns.push_back(c);
  }
  LabeledDataset out = data.SelectColumns(columns);
  out.layout_hash = LayoutHashOfNames(out.column_names);
  return out;
}

ReportRow ScoreRows(const std::vector<int>& labels, const std::vector<int>& predicted) {
  ReportRow row;
  std::size_t correct[2] = {0, 0};
  for (std::size_t i = 0; i < labels.size(); ++i) {
    (labels[i] == 0 ? row.n_bonafide : row.n_spoof)++;
    if (labels[i] == predicted[i]) ++correct[labels[i]];
  }
  const std::size_t total = row.n_bonafide + row.n_spoof;
  if (total == 0) throw Error(ErrorCode::kEmptyDataset, "nothing to score");
  row.accuracy = static_cast<double>(correct[0] + correct[1]) / static_cast<double>(total);
  double recall_sum = 0.0;
  int classes = 0;
  if (row.n_bonafide > 0) {
    recall_sum += static_cast<double>(correct[0]) / static_cast<double>(row.n_bonafide);
    ++classes;
  }
  if (row.n_spoof > 0) {
    recall_sum += static_cast<double>(correct[1]) / static_cast<double>(row.n_spoof);
    ++classes;
  }
  row.balanced_accuracy = recall_sum / classes;
  return row;
}

EvaluationReport OneVsOneEval(const TrainedModel& model, const LabeledDataset& data,
                              const std::string& segment, const std::string& config,
                              bool aggregate) {
  if (data.n_features != model.n_features ||
      (!model.layout_hash.empty() && data.layout_hash != model.layout_hash)) {
    throw Error(ErrorCode::kLayoutMismatch,
                fmt::format("model layout {} ({} features) vs data layout {} ({} features)",
                            model.layout_hash, model.n_features, data.layout_hash,
                            data.n_features));
  }
  const auto predicted = PredictAll(model, data);
  std::set<std::string> systems;
  for (std::size_t i = 0; i < data.rows(); ++i) {
    if (data.labels[i] == 1) systems.insert(data.system_ids[i]);
  }
  EvaluationReport report;
  auto add = [&](const std::string& system, auto&& include) {
    std::vector<int> y, p;
    for (std::size_t i = 0; i < data.rows(); ++i) {
      if (data.labels[i] == 0 || include(i)) {
        y.push_back(data.labels[i]);
        p.push_back(predicted[i]);
      }
    }
    ReportRow row = ScoreRows(y, p);
    row.system = system;
    row.segment = segment;
    row.config = config;
    if (std::abs(row.accuracy - row.balanced_accuracy) > 0.02) {
      std::cerr << fmt::format("note: {} {} {}: accuracy {:.3f} vs balanced {:.3f}\n", system,
                               segment, config, row.accuracy, row.balanced_accuracy);
    }
    report.rows.push_back(std::move(row));
  };
  for (const auto& system : systems) {
    add(system, [&](std::size_t i) { return data.system_ids[i] == system; });
  }
  if (aggregate) add("ALL", [](std::size_t) { return true; });
  return report;
}

void WriteReportCsv(std::ostream& out, const EvaluationReport& report) {
  out << "system,segment,config,accuracy,balanced_accuracy,n_bonafide,n_spoof\n";
  for (const auto& r : report.rows) {
    out << fmt::format("{},{},{},{},{},{},{}\n", r.system, r.segment, r.config, r.accuracy,
                       r.balanced_accuracy, r.n_bonafide, r.n_spoof);
  }
}

std::vector<AblationConfig> DefaultAblations() {
  using K = SegmentKind;
  return {
      {"d1", K::kSilence, {}, {1.0}},
      {"d1-2", K::kSilence, {}, {1.0, 2.0}},
      {"d1-3", K::kSilence, {}, {1.0, 2.0, 3.0}},
      {"d1-4", K::kSilence, {}, {1.0, 2.0, 3.0, 4.0}},
      {"b10", K::kSilence, {10}, {}},
      {"b20", K::kSilence, {20}, {}},
      {"d1-4", K::kFull, {}, {1.0, 2.0, 3.0, 4.0}},
      {"d1-3", K::kVoiced, {}, {1.0, 2.0, 3.0}},
  };
}

AblationResult AblationRun(const std::vector<SegmentFeatures>& features,
                           const std::vector<AblationConfig>& configs,
                           const std::vector<ForestConfig>& grid, unsigned jobs) {
  AblationResult result;
  for (const auto& cfg : configs) {
    const auto it = std::find_if(features.begin(), features.end(),
                                 [&](const auto& f) { return f.segment == cfg.segment; });
    if (it == features.end()) continue;
    const LabeledDataset train = SelectFeatureColumns(it->train, cfg.bases, cfg.deltas);
    const LabeledDataset dev = SelectFeatureColumns(it->dev, cfg.bases, cfg.deltas);
    GridResult gr = GridSearch(train, dev, grid, jobs);
    const std::string segment(SegmentKindName(cfg.segment));
    for (auto& row : OneVsOneEval(gr.best, dev, segment, cfg.name).rows) {
      result.dev.rows.push_back(std::move(row));
    }
    if (it->eval) {
      const LabeledDataset eval = SelectFeatureColumns(*it->eval, cfg.bases, cfg.deltas);
      for (auto& row : OneVsOneEval(gr.best, eval, segment, cfg.name).rows) {
        result.eval.rows.push_back(std::move(row));
      }
    }
    result.grids.emplace_back(segment + ":" + cfg.name, std::move(gr));
  }
  return result;
}

}  // namespace fdspeech
