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

// MFCC extraction.
//
// Per frame: periodic Hann taper, power spectrum |X(k)|^2 of a real FFT,
// triangular filters equally spaced on the HTK mel scale
// (mel = 2595 log10(1 + f/700)) from 0 Hz to Nyquist, natural log floored at
// 1e-10, orthonormal DCT-II. No pre-emphasis, no liftering. Coefficients are
// numbered from 1 (coefficient 1 is the energy-like DC term of the DCT) and
// only [coeff_lo, coeff_hi] are kept.

#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "fdspeech/audio_io.hpp"
#include "fdspeech/segmentation.hpp"

namespace fdspeech {

inline constexpr double kLogEnergyFloor = 1e-10;

struct CepstralConfig {
  std::size_t frame_len = 1024;
  std::size_t hop = 512;
  int n_filters = 26;
  int coeff_lo = 2;
  int coeff_hi = 14;
  int sample_rate = kRequiredSampleRate;

  // Hop 128 for Silence (more frames from the short silent material),
  // 512 otherwise.
  static CepstralConfig ForSegment(SegmentKind kind);

  int n_coeffs() const { return coeff_hi - coeff_lo + 1; }
  void Validate() const;  // throws kInvalidConfig
};

struct CepstralMatrix {
  std::vector<double> values;  // row-major, n_frames x frequencies.size()
  std::vector<int> frequencies;  // 1-based coefficient indices
  std::size_t n_frames = 0;

  std::size_t n_coeffs() const { return frequencies.size(); }
  double at(std::size_t frame, std::size_t coeff) const {
    return values[frame * frequencies.size() + coeff];
  }
  std::vector<double> column(std::size_t coeff) const;
};

// Number of complete frames of `frame_len` at stride `hop` in `n` samples.
std::size_t FrameCount(std::size_t n, const CepstralConfig& config);

// Tapered frames starting at 0, hop, 2*hop, ... that fit entirely.
// Throws kInsufficientData if fewer than one frame fits.
std::vector<std::vector<double>> Frame(const AudioBuffer& buffer,
                                       const CepstralConfig& config);

// Reusable extractor: holds the taper, the filterbank, the DCT basis and the
// FFT plan. Not safe for concurrent use; give every worker its own instance.
class MfccExtractor {
 public:
  explicit MfccExtractor(const CepstralConfig& config = {});
  ~MfccExtractor();
  MfccExtractor(const MfccExtractor&) = delete;
  MfccExtractor& operator=(const MfccExtractor&) = delete;

  const CepstralConfig& config() const { return config_; }

  // Throws kInsufficientData when the buffer holds less than one frame.
  CepstralMatrix Compute(const AudioBuffer& buffer);

  // Full DCT output (coefficients 1..n_filters) for one untapered frame.
  std::vector<double> FrameCepstrum(std::span<const double> frame);

 private:
  struct Filter {
    std::size_t first_bin = 0;
    std::vector<double> weights;
  };

  void CepstrumInto(std::span<const double> frame, int first_coeff,
                    std::span<double> out);

  CepstralConfig config_;
  std::vector<double> taper_;
  std::vector<Filter> filters_;
  std::vector<double> dct_;  // n_filters x n_filters, row k = basis k
  std::vector<double> log_energy_;
  struct Fft;
  std::unique_ptr<Fft> fft_;
};

CepstralMatrix Mfcc(const AudioBuffer& buffer, const CepstralConfig& config = {});

double HzToMel(double hz);
double MelToHz(double mel);

}  // namespace fdspeech
