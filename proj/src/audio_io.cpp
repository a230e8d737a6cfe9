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

#include "fdspeech/audio_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

#include "fdspeech/error.hpp"

namespace fdspeech {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint32_t ReadLe32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t ReadLe16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void PutLe(std::string& out, std::uint32_t value, int bytes) {
  for (int i = 0; i < bytes; ++i) {
    out.push_back(static_cast<char>((value >> (8 * i)) & 0xFF));
  }
}

struct FormatChunk {
  std::uint16_t format = 0;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t bits = 0;
};

}  // namespace

AudioBuffer DecodeWav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                         std::istreambuf_iterator<char>());
  const std::string name = path.string();
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw Error(ErrorCode::kUnsupportedFormat, name + " is not a RIFF/WAVE file");
  }

  FormatChunk fmt;
  bool have_fmt = false;
  const unsigned char* data = nullptr;
  std::size_t data_size = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    const std::size_t size = ReadLe32(chunk + 4);
    const std::size_t body = pos + 8;
    const std::size_t avail = bytes.size() - body;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16 || size > avail) {
        throw Error(ErrorCode::kUnsupportedFormat, name + ": truncated fmt chunk");
      }
      const unsigned char* f = bytes.data() + body;
      fmt.format = ReadLe16(f);
      fmt.channels = ReadLe16(f + 2);
      fmt.sample_rate = ReadLe32(f + 4);
      fmt.bits = ReadLe16(f + 14);
      if (fmt.format == kFormatExtensible) {
        if (size < 40) {
          throw Error(ErrorCode::kUnsupportedFormat,
                      name + ": truncated extensible fmt chunk");
        }
        // The first two bytes of the sub-format GUID carry the format tag.
        fmt.format = ReadLe16(f + 24);
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = bytes.data() + body;
      data_size = std::min(size, avail);
    }
    pos = body + size + (size & 1);
  }
  if (!have_fmt || data == nullptr) {
    throw Error(ErrorCode::kUnsupportedFormat, name + ": missing fmt or data chunk");
  }

  const bool int_pcm = fmt.format == kFormatPcm &&
                       (fmt.bits == 16 || fmt.bits == 24 || fmt.bits == 32);
  const bool float_pcm = fmt.format == kFormatFloat && fmt.bits == 32;
  if (!int_pcm && !float_pcm) {
    throw Error(ErrorCode::kUnsupportedFormat,
                name + ": format tag " + std::to_string(fmt.format) + " with " +
                    std::to_string(fmt.bits) + " bits is not linear PCM");
  }
  if (fmt.channels != 1) {
    throw Error(ErrorCode::kChannelError,
                name + ": " + std::to_string(fmt.channels) + " channels");
  }
  if (fmt.sample_rate != static_cast<std::uint32_t>(kRequiredSampleRate)) {
    throw Error(ErrorCode::kRateError,
                name + ": sample rate " + std::to_string(fmt.sample_rate));
  }

  const std::size_t width = fmt.bits / 8;
  const std::size_t count = data_size / width;
  AudioBuffer out;
  out.sample_rate = kRequiredSampleRate;
  out.source_id = path.stem().string();
  out.samples.resize(count);
  const double scale = std::ldexp(1.0, -(fmt.bits - 1));
  for (std::size_t i = 0; i < count; ++i) {
    const unsigned char* s = data + i * width;
    double value = 0.0;
    if (float_pcm) {
      float f;
      const std::uint32_t raw = ReadLe32(s);
      std::memcpy(&f, &raw, sizeof f);
      value = f;
    } else if (fmt.bits == 16) {
      value = static_cast<std::int16_t>(ReadLe16(s)) * scale;
    } else if (fmt.bits == 24) {
      std::int32_t v = s[0] | (s[1] << 8) | (s[2] << 16);
      if (v & 0x800000) v -= 0x1000000;
      value = v * scale;
    } else {
      value = static_cast<std::int32_t>(ReadLe32(s)) * scale;
    }
    out.samples[i] = value;
  }
  CheckFinite(out);
  return out;
}

void EncodeWav(const std::filesystem::path& path, const AudioBuffer& buffer,
               PcmEncoding encoding) {
  int bits = 16;
  std::uint16_t tag = kFormatPcm;
  switch (encoding) {
    case PcmEncoding::kInt16: bits = 16; break;
    case PcmEncoding::kInt24: bits = 24; break;
    case PcmEncoding::kInt32: bits = 32; break;
    case PcmEncoding::kFloat32: bits = 32; tag = kFormatFloat; break;
  }
  const std::uint32_t width = bits / 8;
  const std::uint32_t data_size = static_cast<std::uint32_t>(buffer.size()) * width;

  std::string out;
  out.reserve(44 + data_size);
  out += "RIFF";
  PutLe(out, 36 + data_size, 4);
  out += "WAVEfmt ";
  PutLe(out, 16, 4);
  PutLe(out, tag, 2);
  PutLe(out, 1, 2);
  PutLe(out, static_cast<std::uint32_t>(buffer.sample_rate), 4);
  PutLe(out, static_cast<std::uint32_t>(buffer.sample_rate) * width, 4);
  PutLe(out, width, 2);
  PutLe(out, static_cast<std::uint32_t>(bits), 2);
  out += "data";
  PutLe(out, data_size, 4);

  const double full_scale = std::ldexp(1.0, bits - 1);
  for (double x : buffer.samples) {
    if (encoding == PcmEncoding::kFloat32) {
      const float f = static_cast<float>(x);
      std::uint32_t raw;
      std::memcpy(&raw, &f, sizeof raw);
      PutLe(out, raw, 4);
      continue;
    }
    const double level = std::clamp(std::nearbyint(x * full_scale), -full_scale,
                                    full_scale - 1.0);
    const auto v = static_cast<std::int64_t>(level);
    PutLe(out, static_cast<std::uint32_t>(v), static_cast<int>(width));
  }

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
}

AudioBuffer StripZeros(const AudioBuffer& buffer) {
  AudioBuffer out{{}, buffer.sample_rate, buffer.source_id};
  out.samples.reserve(buffer.size());
  std::copy_if(buffer.samples.begin(), buffer.samples.end(),
               std::back_inserter(out.samples), [](double x) { return x != 0.0; });
  if (out.empty()) {
    throw Error(ErrorCode::kEmptySignal, buffer.source_id + ": all samples are zero");
  }
  return out;
}

AudioBuffer PeakNormalize(const AudioBuffer& buffer) {
  double peak = 0.0;
  for (double x : buffer.samples) peak = std::max(peak, std::abs(x));
  if (peak == 0.0) {
    throw Error(ErrorCode::kEmptySignal, buffer.source_id + ": empty or all-zero signal");
  }
  AudioBuffer out{buffer.samples, buffer.sample_rate, buffer.source_id};
  // Division (not multiplication by 1/peak) keeps the peak sample at exactly 1.
  for (double& x : out.samples) x /= peak;
  return out;
}

void CheckFinite(const AudioBuffer& buffer) {
  for (double x : buffer.samples) {
    if (!std::isfinite(x)) {
      throw Error(ErrorCode::kDomainError, buffer.source_id + ": non-finite sample");
    }
  }
}

}  // namespace fdspeech
