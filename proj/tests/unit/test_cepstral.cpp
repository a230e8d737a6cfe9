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

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "fdspeech/cepstral.hpp"
#include "test_support.hpp"

using namespace fdspeech;
using namespace fdspeech::testing;

namespace {

constexpr double kPi = std::numbers::pi;

// Straight-line MFCC of one frame: O(N^2) DFT, triangles written as
// min(rise, fall), explicit DCT-II sums. Returns coefficients 1..26.
std::vector<double> ReferenceMfcc(const std::vector<double>& frame) {
  const std::size_t n = frame.size();
  const double fs = 16000.0;
  const int filters = 26;

  std::vector<double> power(n / 2 + 1);
  for (std::size_t k = 0; k < power.size(); ++k) {
    double re = 0.0, im = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      const double w = 0.5 * (1.0 - std::cos(2.0 * kPi * t / n));
      const double phase = 2.0 * kPi * static_cast<double>(k * t % n) / n;
      re += w * frame[t] * std::cos(phase);
      im -= w * frame[t] * std::sin(phase);
    }
    power[k] = re * re + im * im;
  }

  auto mel = [](double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); };
  auto hz = [](double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); };
  std::vector<double> edge(filters + 2);
  for (int i = 0; i < filters + 2; ++i) edge[i] = hz(mel(fs / 2) * i / (filters + 1));

  std::vector<double> logmel(filters);
  for (int f = 0; f < filters; ++f) {
    double e = 0.0;
    for (std::size_t k = 0; k < power.size(); ++k) {
      const double freq = k * fs / n;
      const double rise = (freq - edge[f]) / (edge[f + 1] - edge[f]);
      const double fall = (edge[f + 2] - freq) / (edge[f + 2] - edge[f + 1]);
      e += std::max(0.0, std::min(rise, fall)) * power[k];
    }
    logmel[f] = std::log(std::max(e, 1e-10));
  }

  std::vector<double> c(filters);
  for (int k = 0; k < filters; ++k) {
    double s = 0.0;
    for (int i = 0; i < filters; ++i) s += logmel[i] * std::cos(kPi * k * (i + 0.5) / filters);
    c[k] = s * std::sqrt((k == 0 ? 1.0 : 2.0) / filters);
  }
  return c;
}

std::vector<double> Sine(std::size_t n, double hz) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = std::sin(2.0 * kPi * hz * i / 16000.0);
  return x;
}

}  // namespace

TEST_CASE("mel scale") {
  CHECK(HzToMel(0.0) == 0.0);
  CHECK(HzToMel(700.0) == doctest::Approx(2595.0 * std::log10(2.0)));
  for (double f : {10.0, 440.0, 8000.0}) CHECK(MelToHz(HzToMel(f)) == doctest::Approx(f));
}

TEST_CASE("frame counts") {
  CepstralConfig cfg;
  CHECK(FrameCount(1024, cfg) == 1);
  CHECK(FrameCount(1023, cfg) == 0);
  CHECK(FrameCount(2048, cfg) == 3);
  cfg.hop = 128;
  CHECK(FrameCount(2048, cfg) == 9);

  const auto frames = Frame(Buf(std::vector<double>(2048, 1.0)), cfg);
  REQUIRE(frames.size() == 9);
  CHECK(frames[0].size() == 1024);
  CHECK(frames[0][0] == 0.0);  // periodic Hann starts at zero
  CHECK(frames[0][512] == 1.0);
  CHECK(ErrorCodeOf([&] { Frame(Buf(std::vector<double>(1000, 1.0)), cfg); }) ==
        Code(ErrorCode::kInsufficientData));
}

TEST_CASE("segment-specific hops") {
  CHECK(CepstralConfig::ForSegment(SegmentKind::kSilence).hop == 128);
  CHECK(CepstralConfig::ForSegment(SegmentKind::kFull).hop == 512);
  CHECK(CepstralConfig::ForSegment(SegmentKind::kVoiced).hop == 512);
  CepstralConfig bad;
  bad.coeff_hi = 27;
  CHECK(ErrorCodeOf([&] { bad.Validate(); }) == Code(ErrorCode::kInvalidConfig));
}

TEST_CASE("zero frame leaves only the first coefficient") {
  MfccExtractor mfcc;
  const std::vector<double> zero(1024, 0.0);
  const auto c = mfcc.FrameCepstrum(zero);
  REQUIRE(c.size() == 26);
  CHECK(c[0] == doctest::Approx(std::log(1e-10) * std::sqrt(26.0)));
  for (std::size_t k = 1; k < c.size(); ++k) CHECK(std::abs(c[k]) < 1e-9);
}

TEST_CASE("1 kHz sine matches the reference computation") {
  const auto x = Sine(1024, 1000.0);
  MfccExtractor mfcc;
  const auto got = mfcc.FrameCepstrum(x);
  const auto want = ReferenceMfcc(x);
  for (std::size_t k = 0; k < want.size(); ++k) {
    CHECK(std::abs(got[k] - want[k]) <= 1e-6 * std::max(1.0, std::abs(want[k])));
  }

  const CepstralMatrix m = Mfcc(Buf(x));
  REQUIRE(m.n_frames == 1);
  REQUIRE(m.frequencies.size() == 13);
  CHECK(m.frequencies.front() == 2);
  CHECK(m.frequencies.back() == 14);
  for (std::size_t c = 0; c < 13; ++c) {
    CHECK(std::abs(m.at(0, c) - want[c + 1]) <= 1e-6 * std::max(1.0, std::abs(want[c + 1])));
  }
}

TEST_CASE("noise frames match the reference computation") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  std::vector<double> x(1024);
  for (double& v : x) v = g(rng);
  MfccExtractor mfcc;
  const auto got = mfcc.FrameCepstrum(x);
  const auto want = ReferenceMfcc(x);
  for (std::size_t k = 0; k < want.size(); ++k) {
    CHECK(std::abs(got[k] - want[k]) <= 1e-6 * std::max(1.0, std::abs(want[k])));
  }
}

TEST_CASE("matrix layout and determinism") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> x(16000);
  for (double& v : x) v = u(rng);
  const CepstralMatrix a = Mfcc(Buf(x));
  const CepstralMatrix b = Mfcc(Buf(x));
  CHECK(a.n_frames == FrameCount(16000, {}));
  CHECK(a.values == b.values);

  // Row t is the cepstrum of the frame starting at t * hop.
  MfccExtractor mfcc;
  const std::vector<double> third(x.begin() + 1024, x.begin() + 2048);
  const auto c = mfcc.FrameCepstrum(third);
  for (std::size_t k = 0; k < 13; ++k) CHECK(a.at(2, k) == doctest::Approx(c[k + 1]));
  CHECK(a.column(4).size() == a.n_frames);
  CHECK(a.column(4)[2] == a.at(2, 4));
}
