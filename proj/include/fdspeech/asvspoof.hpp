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

// ASVspoof 2019 LA style corpus handling: protocol parsing, class-balanced
// decimation of the training list, per-record feature extraction for a
// segment kind, feature file I/O, and one-vs-one evaluation reports.

#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fdspeech/audio_io.hpp"
#include "fdspeech/cepstral.hpp"
#include "fdspeech/error.hpp"
#include "fdspeech/fd_features.hpp"
#include "fdspeech/forest.hpp"
#include "fdspeech/segmentation.hpp"

namespace fdspeech {

enum class Key { kBonafide, kSpoof };

struct ProtocolEntry {
  std::string speaker_id;
  std::string utterance_id;
  std::optional<std::string> system_id;  // empty for bonafide
  Key key = Key::kBonafide;

  int label() const { return key == Key::kSpoof ? 1 : 0; }
  std::string system_or_dash() const { return system_id.value_or("-"); }
  bool operator==(const ProtocolEntry&) const = default;
};

// Whitespace-separated lines: speaker utterance - system|- key.
// Blank lines are ignored. Throws kParseError naming the line number.
std::vector<ProtocolEntry> ParseProtocol(std::istream& in, const std::string& name);
std::vector<ProtocolEntry> ParseProtocol(const std::filesystem::path& path);

// Decimates every spoof system to c = min(smallest system, floor(B / k))
// entries and bonafide to k * c, where k is the number of systems and B the
// bonafide count. Surviving entries keep their protocol order.
// Throws kDegenerateProtocol without bonafide or spoof entries, or if c == 0.
std::vector<ProtocolEntry> BalanceTraining(const std::vector<ProtocolEntry>& entries,
                                           std::uint64_t seed);

struct ExtractionConfig {
  SegmentKind segment = SegmentKind::kFull;
  EnergyConfig energy;
  CepstralConfig cepstral;  // hop is overridden from `segment` by ForSegment()
  FdConfig fd;

  static ExtractionConfig ForSegment(SegmentKind kind);
};

// decode-free pipeline for one waveform: strip zeros, peak-normalize,
// segment, extract the requested view, MFCC, FD features. Throws the
// skip-worthy codes (kEmptySignal, kTooShort, kInsufficientData,
// kInsufficientDigits) unchanged.
FeatureVector ExtractRecordFeatures(const AudioBuffer& buffer, const ExtractionConfig& config);

bool IsSkipReason(ErrorCode code);

struct SkipRecord {
  std::string record_id;
  std::string reason;  // ErrorCode name
  std::string detail;
};

struct BuildResult {
  LabeledDataset dataset;
  std::vector<FeatureDescriptor> layout;
  std::vector<SkipRecord> skips;
  std::size_t diverged_fits = 0;
};

// Runs ExtractRecordFeatures on <audio_root>/<utterance_id>.<extension> for
// every entry with at most `jobs` workers. Rows follow protocol order.
// Throws kMissingAudio naming the first absent file before any work starts.
BuildResult BuildDataset(const std::vector<ProtocolEntry>& entries,
                         const std::filesystem::path& audio_root,
                         const ExtractionConfig& config, unsigned jobs = 1,
                         const std::string& extension = "wav");

// Feature file: header `record_id,label,system_id,<layout names>`, rows sorted
// by record id, values printed with round-trip precision.
void WriteFeatureCsv(std::ostream& out, const LabeledDataset& data);
void WriteFeatureCsv(const std::filesystem::path& path, const LabeledDataset& data);
LabeledDataset ReadFeatureCsv(const std::filesystem::path& path);

// key=value sidecar describing how a feature file was produced.
void WriteFeatureSidecar(const std::filesystem::path& path, const ExtractionConfig& config,
                         const LabeledDataset& data);

void WriteSkipLog(const std::filesystem::path& path, const std::vector<SkipRecord>& skips);

// Parses a column name such as "js_f2_b10_d1". Throws kParseError.
FeatureDescriptor ParseFeatureName(const std::string& name);

// Hash of a list of column names; equals LayoutHash() of the descriptors.
std::string LayoutHashOfNames(const std::vector<std::string>& names);

// Columns whose base and delta are in the given sets, in file order, with
// the layout hash recomputed. Empty sets mean "all".
LabeledDataset SelectFeatureColumns(const LabeledDataset& data, const std::vector<int>& bases,
                                    const std::vector<double>& deltas);

struct ReportRow {
  std::string system;
  std::string segment;
  std::string config;
  double accuracy = 0.0;
  double balanced_accuracy = 0.0;
  std::size_t n_bonafide = 0;
  std::size_t n_spoof = 0;
};

struct EvaluationReport {
  std::vector<ReportRow> rows;
};

// For every spoof system in `data` (sorted by id), scores all bonafide rows
// plus that system's rows. With `aggregate` an `ALL` row over the whole set is
// appended. Throws kLayoutMismatch if model and data disagree.
EvaluationReport OneVsOneEval(const TrainedModel& model, const LabeledDataset& data,
                              const std::string& segment, const std::string& config,
                              bool aggregate = false);

// Accuracy and balanced accuracy of `predicted` against `labels`.
ReportRow ScoreRows(const std::vector<int>& labels, const std::vector<int>& predicted);

void WriteReportCsv(std::ostream& out, const EvaluationReport& report);

struct AblationConfig {
  std::string name;
  SegmentKind segment = SegmentKind::kSilence;
  std::vector<int> bases;  // empty = all
  std::vector<double> deltas;  // empty = all
};

// Silence with delta 1, 1-2, 1-3, 1-4, base 10 only, base 20 only; Full with
// delta 1-4; Voiced with delta 1-3.
std::vector<AblationConfig> DefaultAblations();

struct SegmentFeatures {
  SegmentKind segment = SegmentKind::kSilence;
  LabeledDataset train;
  LabeledDataset dev;
  std::optional<LabeledDataset> eval;
};

struct AblationResult {
  EvaluationReport dev;
  EvaluationReport eval;  // empty when no eval features were given
  std::vector<std::pair<std::string, GridResult>> grids;
};

// One independent grid search per configuration on the column subset of its
// segment's features; configurations whose segment has no features are
// skipped.
AblationResult AblationRun(const std::vector<SegmentFeatures>& features,
                           const std::vector<AblationConfig>& configs,
                           const std::vector<ForestConfig>& grid, unsigned jobs = 1);

}  // namespace fdspeech
