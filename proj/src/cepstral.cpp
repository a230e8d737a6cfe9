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

#include "fdspeech/cepstral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

#include "fdspeech/error.hpp"

namespace fdspeech {
namespace {

// The FFTW planner is not re-entrant; execution of an existing plan is.
std::mutex& PlannerMutex() {
  static std::mutex mu;
  return mu;
}

}  // namespace

struct MfccExtractor::Fft {
  explicit Fft(std::size_t n) : size(n) {
    in = fftw_alloc_real(n);
    out = fftw_alloc_complex(n / 2 + 1);
    std::lock_guard<std::mutex> lock(PlannerMutex());
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in, out, FFTW_ESTIMATE);
  }
  ~Fft() {
    {
      std::lock_guard<std::mutex> lock(PlannerMutex());
      fftw_destroy_plan(plan);
    }
    fftw_free(in);
    fftw_free(out);
  }
  Fft(const Fft&) = delete;
  Fft& operator=(const Fft&) = delete;

  std::size_t size;
  double* in = nullptr;
  fftw_complex* out = nullptr;
  fftw_plan plan = nullptr;
};

double HzToMel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double MelToHz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

CepstralConfig CepstralConfig::ForSegment(SegmentKind kind) {
  CepstralConfig c;
  c.hop = kind == SegmentKind::kSilence ? 128 : 512;
  return c;
}

void CepstralConfig::Validate() const {
  if (frame_len < 2 || (frame_len & (frame_len - 1)) != 0) {
    throw Error(ErrorCode::kInvalidConfig, "frame_len must be a power of two");
  }
  if (hop == 0 || hop > frame_len) {
    throw Error(ErrorCode::kInvalidConfig, "hop must be in (0, frame_len]");
  }
  if (n_filters < 1 || coeff_lo < 1 || coeff_lo > coeff_hi || coeff_hi > n_filters) {
    throw Error(ErrorCode::kInvalidConfig,
                "coefficient range must satisfy 1 <= lo <= hi <= n_filters");
  }
  if (sample_rate <= 0) throw Error(ErrorCode::kInvalidConfig, "sample_rate must be > 0");
}

std::vector<double> CepstralMatrix::column(std::size_t coeff) const {
  std::vector<double> col(n_frames);
  for (std::size_t w = 0; w < n_frames; ++w) col[w] = at(w, coeff);
  return col;
}

std::size_t FrameCount(std::size_t n, const CepstralConfig& config) {
  if (n < config.frame_len) return 0;
  return (n - config.frame_len) / config.hop + 1;
}

std::vector<std::vector<double>> Frame(const AudioBuffer& buffer,
                                       const CepstralConfig& config) {
  config.Validate();
  const std::size_t count = FrameCount(buffer.size(), config);
  if (count == 0) {
    throw Error(ErrorCode::kInsufficientData,
                buffer.source_id + ": " + std::to_string(buffer.size()) +
                    " samples is less than one frame");
  }
  const std::size_t n = config.frame_len;
  std::vector<std::vector<double>> frames(count, std::vector<double>(n));
  for (std::size_t w = 0; w < count; ++w) {
    const double* src = buffer.samples.data() + w * config.hop;
    for (std::size_t i = 0; i < n; ++i) {
      const double taper =
          0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                               static_cast<double>(n));
      frames[w][i] = src[i] * taper;
    }
  }
  return frames;
}

MfccExtractor::MfccExtractor(const CepstralConfig& config) : config_(config) {
  config_.Validate();
  const std::size_t n = config_.frame_len;
  const std::size_t bins = n / 2 + 1;
  const int m = config_.n_filters;

  taper_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    taper_[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                     static_cast<double>(n));
  }

  const double nyquist = config_.sample_rate / 2.0;
  const double mel_top = HzToMel(nyquist);
  std::vector<double> edges(m + 2);
  for (int i = 0; i < m + 2; ++i) edges[i] = MelToHz(mel_top * i / (m + 1));
  filters_.resize(m);
  for (int f = 0; f < m; ++f) {
    const double lo = edges[f], mid = edges[f + 1], hi = edges[f + 2];
    Filter& filter = filters_[f];
    bool started = false;
    for (std::size_t k = 0; k < bins; ++k) {
      const double hz = static_cast<double>(k) * config_.sample_rate / static_cast<double>(n);
      double w = 0.0;
      if (hz > lo && hz <= mid) {
        w = (hz - lo) / (mid - lo);
      } else if (hz > mid && hz < hi) {
        w = (hi - hz) / (hi - mid);
      }
      if (w > 0.0) {
        if (!started) {
          filter.first_bin = k;
          started = true;
        }
        filter.weights.resize(k - filter.first_bin + 1, 0.0);
        filter.weights.back() = w;
      }
    }
  }

  dct_.resize(static_cast<std::size_t>(m) * m);
  for (int k = 0; k < m; ++k) {
    const double scale = std::sqrt((k == 0 ? 1.0 : 2.0) / m);
    for (int i = 0; i < m; ++i) {
      dct_[k * m + i] = scale * std::cos(std::numbers::pi * k * (i + 0.5) / m);
    }
  }
  log_energy_.resize(m);
  fft_ = std::make_unique<Fft>(n);
}

MfccExtractor::~MfccExtractor() = default;

void MfccExtractor::CepstrumInto(std::span<const double> frame, int first_coeff,
                                 std::span<double> out) {
  const std::size_t n = config_.frame_len;
  for (std::size_t i = 0; i < n; ++i) fft_->in[i] = frame[i] * taper_[i];
  fftw_execute_dft_r2c(fft_->plan, fft_->in, fft_->out);
  const int m = config_.n_filters;
  for (int f = 0; f < m; ++f) {
    const Filter& filter = filters_[f];
    double energy = 0.0;
    for (std::size_t j = 0; j < filter.weights.size(); ++j) {
      const fftw_complex& c = fft_->out[filter.first_bin + j];
      energy += filter.weights[j] * (c[0] * c[0] + c[1] * c[1]);
    }
    log_energy_[f] = std::log(std::max(energy, kLogEnergyFloor));
  }
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double* basis = &dct_[(first_coeff - 1 + k) * m];
    double acc = 0.0;
    for (int i = 0; i < m; ++i) acc += basis[i] * log_energy_[i];
    out[k] = acc;
  }
}

std::vector<double> MfccExtractor::FrameCepstrum(std::span<const double> frame) {
  if (frame.size() != config_.frame_len) {
    throw Error(ErrorCode::kLengthError, "frame length mismatch");
  }
  std::vector<double> out(config_.n_filters);
  CepstrumInto(frame, 1, out);
  return out;
}

CepstralMatrix MfccExtractor::Compute(const AudioBuffer& buffer) {
  const std::size_t count = FrameCount(buffer.size(), config_);
  if (count == 0) {
    throw Error(ErrorCode::kInsufficientData,
                buffer.source_id + ": " + std::to_string(buffer.size()) +
                    " samples is less than one frame");
  }
  CepstralMatrix matrix;
  matrix.n_frames = count;
  for (int c = config_.coeff_lo; c <= config_.coeff_hi; ++c) matrix.frequencies.push_back(c);
  const std::size_t nc = matrix.frequencies.size();
  matrix.values.resize(count * nc);
  const std::span<const double> all(buffer.samples);
  for (std::size_t w = 0; w < count; ++w) {
    CepstrumInto(all.subspan(w * config_.hop, config_.frame_len), config_.coeff_lo,
                 std::span<double>(matrix.values).subspan(w * nc, nc));
  }
  return matrix;
}

CepstralMatrix Mfcc(const AudioBuffer& buffer, const CepstralConfig& config) {
  MfccExtractor extractor(config);
  return extractor.Compute(buffer);
}

}  // namespace fdspeech
