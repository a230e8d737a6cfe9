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

#include "fdspeech/segmentation.hpp"

#include <cmath>

#include "fdspeech/error.hpp"

namespace fdspeech {
namespace {

double MeanPowerDb(std::span<const double> samples) {
  double sum = 0.0;
  for (double x : samples) sum += x * x;
  if (sum == 0.0) return kSilentEnergyDb;
  return 10.0 * std::log10(sum / static_cast<double>(samples.size()));
}

void AppendRange(std::vector<Interval>& ranges, std::size_t begin, std::size_t end) {
  if (!ranges.empty() && ranges.back().end == begin) {
    ranges.back().end = end;
  } else {
    ranges.push_back({begin, end});
  }
}

}  // namespace

void EnergyConfig::Validate() const {
  if (window_len < 1) throw Error(ErrorCode::kInvalidConfig, "window_len must be >= 1");
  if (!std::isfinite(threshold_db)) {
    throw Error(ErrorCode::kInvalidConfig, "threshold_db must be finite");
  }
}

std::string_view SegmentKindName(SegmentKind kind) {
  switch (kind) {
    case SegmentKind::kFull: return "full";
    case SegmentKind::kSilence: return "silence";
    case SegmentKind::kVoiced: return "voiced";
  }
  return "full";
}

SegmentKind ParseSegmentKind(std::string_view name) {
  if (name == "full") return SegmentKind::kFull;
  if (name == "silence") return SegmentKind::kSilence;
  if (name == "voiced") return SegmentKind::kVoiced;
  throw Error(ErrorCode::kInvalidConfig, "unknown segment kind '" + std::string(name) + "'");
}

std::size_t SegmentView::sample_count() const {
  std::size_t n = 0;
  for (const auto& r : ranges) n += r.size();
  return n;
}

const SegmentView& Segmentation::view(SegmentKind kind) const {
  switch (kind) {
    case SegmentKind::kSilence: return silence;
    case SegmentKind::kVoiced: return voiced;
    case SegmentKind::kFull: break;
  }
  return full;
}

double WindowEnergyDb(std::span<const double> samples, std::size_t window_len) {
  if (samples.size() != window_len || window_len == 0) {
    throw Error(ErrorCode::kLengthError,
                "window has " + std::to_string(samples.size()) + " samples, expected " +
                    std::to_string(window_len));
  }
  return MeanPowerDb(samples);
}

std::vector<WindowLabel> LabelWindows(const AudioBuffer& buffer,
                                      const EnergyConfig& config) {
  config.Validate();
  const std::size_t n = buffer.size();
  if (n < config.window_len) {
    throw Error(ErrorCode::kTooShort, buffer.source_id + ": " + std::to_string(n) +
                                          " samples is shorter than one window");
  }
  std::vector<WindowLabel> labels;
  labels.reserve((n + config.window_len - 1) / config.window_len);
  const std::span<const double> all(buffer.samples);
  for (std::size_t start = 0; start < n; start += config.window_len) {
    const std::size_t len = std::min(config.window_len, n - start);
    WindowLabel w;
    w.index = labels.size();
    w.start = start;
    w.length = len;
    w.energy_db = MeanPowerDb(all.subspan(start, len));
    w.voiced = w.energy_db > config.threshold_db;
    labels.push_back(w);
  }
  return labels;
}

Segmentation Segment(const AudioBuffer& buffer, const EnergyConfig& config) {
  const auto labels = LabelWindows(buffer, config);

  Segmentation seg;
  seg.full = {SegmentKind::kFull, {{0, buffer.size()}}, buffer.source_id};
  seg.silence = {SegmentKind::kSilence, {}, buffer.source_id};
  seg.voiced = {SegmentKind::kVoiced, {}, buffer.source_id};

  std::size_t first_voiced = labels.size();
  std::size_t last_voiced = 0;
  for (const auto& w : labels) {
    if (w.voiced) {
      first_voiced = std::min(first_voiced, w.index);
      last_voiced = w.index;
    }
  }
  if (first_voiced == labels.size()) return seg;  // nothing but silence

  for (std::size_t i = first_voiced; i <= last_voiced; ++i) {
    const auto& w = labels[i];
    auto& target = w.voiced ? seg.voiced.ranges : seg.silence.ranges;
    AppendRange(target, w.start, w.start + w.length);
  }
  return seg;
}

AudioBuffer Extract(const AudioBuffer& buffer, const SegmentView& view) {
  if (view.parent_id != buffer.source_id) {
    throw Error(ErrorCode::kViewMismatch, "view of '" + view.parent_id +
                                              "' applied to '" + buffer.source_id + "'");
  }
  AudioBuffer out{{}, buffer.sample_rate, buffer.source_id};
  out.samples.reserve(view.sample_count());
  for (const auto& r : view.ranges) {
    if (r.begin > r.end || r.end > buffer.size()) {
      throw Error(ErrorCode::kViewMismatch, buffer.source_id + ": interval out of bounds");
    }
    out.samples.insert(out.samples.end(), buffer.samples.begin() + r.begin,
                       buffer.samples.begin() + r.end);
  }
  if (out.empty()) {
    throw Error(ErrorCode::kEmptySignal,
                buffer.source_id + ": " + std::string(SegmentKindName(view.kind)) +
                    " view is empty");
  }
  return out;
}

}  // namespace fdspeech
