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

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "fdspeech/segmentation.hpp"
#include "test_support.hpp"

using namespace fdspeech;
using namespace fdspeech::testing;

namespace {

std::vector<double> Tone(std::size_t n, double amplitude = 1.0) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = amplitude * std::sin(2.0 * std::numbers::pi * 440.0 * static_cast<double>(i) / 16000.0);
  }
  return x;
}

// Membership mask of a view over n samples.
std::vector<int> Mask(const SegmentView& v, std::size_t n) {
  std::vector<int> m(n, 0);
  for (const auto& r : v.ranges) {
    for (std::size_t i = r.begin; i < r.end; ++i) m[i] = 1;
  }
  return m;
}

void CheckWellFormed(const SegmentView& v, std::size_t n) {
  for (std::size_t k = 0; k < v.ranges.size(); ++k) {
    CHECK(v.ranges[k].begin < v.ranges[k].end);
    CHECK(v.ranges[k].end <= n);
    if (k > 0) CHECK(v.ranges[k - 1].end < v.ranges[k].begin);
  }
}

}  // namespace

TEST_CASE("window energy") {
  const std::vector<double> ones(101, 1.0);
  CHECK(WindowEnergyDb(ones, 101) == 0.0);
  const std::vector<double> zeros(101, 0.0);
  CHECK(WindowEnergyDb(zeros, 101) == kSilentEnergyDb);
  const std::vector<double> quiet(101, 0.005);
  CHECK(WindowEnergyDb(quiet, 101) == doctest::Approx(-46.0206).epsilon(1e-5));
  CHECK(ErrorCodeOf([&] { WindowEnergyDb(ones, 100); }) == Code(ErrorCode::kLengthError));
}

TEST_CASE("window labelling tiles the buffer") {
  const auto labels = LabelWindows(Buf(Tone(1000)), {});
  REQUIRE(labels.size() == 10);
  CHECK(labels[9].start == 909);
  CHECK(labels[9].length == 91);
  for (const auto& w : labels) CHECK(w.voiced);
  CHECK(ErrorCodeOf([] { LabelWindows(Buf(Tone(100)), {}); }) == Code(ErrorCode::kTooShort));
}

TEST_CASE("all silent buffer has empty silence and voiced views") {
  const Segmentation s = Segment(Buf(std::vector<double>(2020, 1e-4)));
  CHECK(s.full.sample_count() == 2020);
  CHECK(s.silence.empty());
  CHECK(s.voiced.empty());
}

TEST_CASE("all voiced buffer") {
  const Segmentation s = Segment(Buf(Tone(5000)));
  CHECK(s.silence.empty());
  REQUIRE(s.voiced.ranges.size() == 1);
  CHECK(s.voiced.ranges == s.full.ranges);
}

TEST_CASE("tone with a 1010-sample gap") {
  std::vector<double> x = Tone(10100);
  for (std::size_t i = 5050; i < 6060; ++i) x[i] = 0.0;
  const Segmentation s = Segment(Buf(x));
  REQUIRE(s.silence.ranges.size() == 1);
  CHECK(s.silence.ranges[0] == Interval{5050, 6060});
  CHECK(s.voiced.ranges.size() == 2);
  CHECK(s.silence.parent_id == "test");
}

TEST_CASE("leading and trailing silence is trimmed from both views") {
  std::vector<double> x(202, 0.0);
  const auto tone = Tone(1010);
  x.insert(x.end(), tone.begin(), tone.end());
  x.insert(x.end(), 505, 0.0);
  x.insert(x.end(), tone.begin(), tone.end());
  x.insert(x.end(), 303, 0.0);
  const Segmentation s = Segment(Buf(x));
  CHECK(s.silence.ranges == std::vector<Interval>{{1212, 1717}});
  CHECK(s.voiced.ranges == std::vector<Interval>{{202, 1212}, {1717, 2727}});
}

TEST_CASE("silence and voiced partition the trimmed full view") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> level(-70.0, 0.0);
  for (int trial = 0; trial < 50; ++trial) {
    // Runs of random-level noise so labels change at arbitrary windows.
    std::vector<double> x;
    std::normal_distribution<double> noise;
    std::uniform_int_distribution<int> run(50, 600);
    while (x.size() < 8000) {
      const double amp = std::pow(10.0, level(rng) / 20.0);
      for (int i = run(rng); i > 0; --i) x.push_back(amp * noise(rng));
    }
    const std::size_t n = x.size();
    const Segmentation s = Segment(Buf(x));
    CheckWellFormed(s.full, n);
    CheckWellFormed(s.silence, n);
    CheckWellFormed(s.voiced, n);
    const auto sil = Mask(s.silence, n);
    const auto voi = Mask(s.voiced, n);
    const auto labels = LabelWindows(Buf(x), {});
    std::size_t first = n, last = 0;
    for (const auto& w : labels) {
      if (!w.voiced) continue;
      first = std::min(first, w.start);
      last = std::max(last, w.start + w.length);
    }
    for (std::size_t i = 0; i < n; ++i) {
      CHECK_FALSE((sil[i] && voi[i]));
      const bool inside = first < last && i >= first && i < last;
      CHECK((sil[i] || voi[i]) == inside);
    }
  }
}

TEST_CASE("extract") {
  const auto x = Tone(1000);
  const AudioBuffer b = Buf(x);
  const Segmentation s = Segment(b);
  CHECK(Extract(b, s.full).samples == x);

  SegmentView two{SegmentKind::kVoiced, {{0, 101}, {202, 303}}, "test"};
  const AudioBuffer part = Extract(b, two);
  REQUIRE(part.size() == 202);
  CHECK(part.samples[101] == x[202]);

  SegmentView empty{SegmentKind::kSilence, {}, "test"};
  CHECK(ErrorCodeOf([&] { Extract(b, empty); }) == Code(ErrorCode::kEmptySignal));
  SegmentView other{SegmentKind::kFull, {{0, 10}}, "someone-else"};
  CHECK(ErrorCodeOf([&] { Extract(b, other); }) == Code(ErrorCode::kViewMismatch));
  SegmentView past{SegmentKind::kFull, {{900, 1200}}, "test"};
  CHECK(ErrorCodeOf([&] { Extract(b, past); }) == Code(ErrorCode::kViewMismatch));
}

TEST_CASE("segment kind names") {
  for (auto k : {SegmentKind::kFull, SegmentKind::kSilence, SegmentKind::kVoiced}) {
    CHECK(ParseSegmentKind(SegmentKindName(k)) == k);
  }
  CHECK(ErrorCodeOf([] { ParseSegmentKind("breath"); }) == Code(ErrorCode::kInvalidConfig));
}
