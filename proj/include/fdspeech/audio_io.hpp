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

// Waveform ingestion: RIFF/WAVE linear-PCM decoding, zero stripping and peak
// normalization. Only 16 kHz mono material is accepted; anything else must be
// transcoded before it reaches this library.

#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace fdspeech {

inline constexpr int kRequiredSampleRate = 16000;

struct AudioBuffer {
  std::vector<double> samples;
  int sample_rate = kRequiredSampleRate;
  std::string source_id;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
};

enum class PcmEncoding { kInt16, kInt24, kInt32, kFloat32 };

// Reads a mono 16 kHz linear-PCM RIFF/WAVE file. Integer samples are mapped to
// reals by dividing by 2^(bits-1); float samples are taken as-is. The
// source_id of the result is the file stem.
//
// Throws Error with kUnsupportedFormat, kChannelError, kRateError or
// kIoError.
AudioBuffer DecodeWav(const std::filesystem::path& path);

// Writes `buffer` as a mono RIFF/WAVE file. Integer encodings round to the
// nearest level and saturate at full scale.
void EncodeWav(const std::filesystem::path& path, const AudioBuffer& buffer,
               PcmEncoding encoding = PcmEncoding::kInt16);

// Removes every sample that is exactly 0.0, preserving order.
// Throws kEmptySignal if nothing is left.
AudioBuffer StripZeros(const AudioBuffer& buffer);

// Scales samples by 1/max|x| so the peak magnitude is exactly 1.0.
// Throws kEmptySignal for empty or all-zero input.
AudioBuffer PeakNormalize(const AudioBuffer& buffer);

// Throws kDomainError if any sample is NaN or infinite.
void CheckFinite(const AudioBuffer& buffer);

}  // namespace fdspeech
