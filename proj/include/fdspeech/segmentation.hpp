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

// Short-window energy segmentation into Full / Silence / Voiced views.
//
// The buffer is tiled by non-overlapping windows of `window_len` samples; the
// last window may be shorter and is judged by its own mean power. A window is
// voiced iff its energy exceeds `threshold_db`. The Silence view holds the
// silent windows that are not part of the leading or trailing silent run.

#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fdspeech/audio_io.hpp"

namespace fdspeech {

// Energy reported for a window with no power at all.
inline constexpr double kSilentEnergyDb = std::numeric_limits<double>::lowest();

struct EnergyConfig {
  std::size_t window_len = 101;
  double threshold_db = -40.0;

  void Validate() const;
};

enum class SegmentKind { kFull, kSilence, kVoiced };

std::string_view SegmentKindName(SegmentKind kind);  // "full", "silence", ...
SegmentKind ParseSegmentKind(std::string_view name);  // throws kInvalidConfig

struct Interval {
  std::size_t begin = 0;  // inclusive
  std::size_t end = 0;    // exclusive

  std::size_t size() const { return end - begin; }
  bool operator==(const Interval&) const = default;
};

struct SegmentView {
  SegmentKind kind = SegmentKind::kFull;
  std::vector<Interval> ranges;  // sorted, disjoint, non-adjacent
  std::string parent_id;

  std::size_t sample_count() const;
  bool empty() const { return ranges.empty(); }
};

struct Segmentation {
  SegmentView full;
  SegmentView silence;
  SegmentView voiced;

  const SegmentView& view(SegmentKind kind) const;
};

struct WindowLabel {
  std::size_t index = 0;
  std::size_t start = 0;
  std::size_t length = 0;
  double energy_db = 0.0;
  bool voiced = false;
};

// 10*log10(mean(x^2)); kSilentEnergyDb for an all-zero window.
// Throws kLengthError if samples.size() != window_len.
double WindowEnergyDb(std::span<const double> samples, std::size_t window_len);

// Per-window energies and labels; the final window may be partial.
// Throws kTooShort if the buffer is shorter than one window.
std::vector<WindowLabel> LabelWindows(const AudioBuffer& buffer,
                                      const EnergyConfig& config);

Segmentation Segment(const AudioBuffer& buffer, const EnergyConfig& config = {});

// Concatenates the view's intervals. Throws kViewMismatch if the view belongs
// to another buffer or runs past its end, kEmptySignal for an empty view.
AudioBuffer Extract(const AudioBuffer& buffer, const SegmentView& view);

}  // namespace fdspeech
