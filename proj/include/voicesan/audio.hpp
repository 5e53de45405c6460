// Copyright 2026 The voicesan authors
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

#ifndef VOICESAN_AUDIO_HPP
#define VOICESAN_AUDIO_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "voicesan/common.hpp"

namespace voicesan {

// Normalized PCM audio. Samples live in [-1, 1]; the unit of all pipeline
// I/O. The only on-disk format is 16-bit mono RIFF/WAVE.
struct AudioClip {
  std::vector<double> samples;
  int sample_rate_hz = 16000;

  double duration_s() const {
    return static_cast<double>(samples.size()) / sample_rate_hz;
  }

  void validate() const {
    static constexpr std::array<int, 5> kRates = {8000, 16000, 22050, 44100,
                                                  48000};
    if (samples.empty()) throw ArgumentError("audio clip has no samples");
    if (std::find(kRates.begin(), kRates.end(), sample_rate_hz) ==
        kRates.end()) {
      throw ArgumentError("unsupported sample rate " +
                          std::to_string(sample_rate_hz));
    }
    for (double s : samples) {
      if (!(s >= -1.0 && s <= 1.0)) {
        throw ArgumentError("sample out of [-1,1] range");
      }
    }
  }
};

namespace detail {

inline std::uint32_t read_u32le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

inline std::uint16_t read_u16le(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

inline void put_u32le(std::vector<unsigned char>& v, std::uint32_t x) {
  v.push_back(x & 0xff);
  v.push_back((x >> 8) & 0xff);
  v.push_back((x >> 16) & 0xff);
  v.push_back((x >> 24) & 0xff);
}

inline void put_u16le(std::vector<unsigned char>& v, std::uint16_t x) {
  v.push_back(x & 0xff);
  v.push_back((x >> 8) & 0xff);
}

}  // namespace detail

// Reads a PCM 16-bit mono RIFF/WAVE file. Chunks other than fmt/data are
// skipped, so files with LIST/INFO metadata still parse.
inline AudioClip read_wav(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path);
  std::vector<unsigned char> raw((std::istreambuf_iterator<char>(f)),
                                 std::istreambuf_iterator<char>());
  if (raw.size() < 12 || std::memcmp(raw.data(), "RIFF", 4) != 0 ||
      std::memcmp(raw.data() + 8, "WAVE", 4) != 0) {
    throw FormatError(path + ": not a RIFF/WAVE file");
  }

  std::uint16_t audio_format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const unsigned char* data = nullptr;
  std::uint32_t data_size = 0;
  bool have_fmt = false;

  std::size_t pos = 12;
  while (pos + 8 <= raw.size()) {
    const char* id = reinterpret_cast<const char*>(raw.data() + pos);
    std::uint32_t size = detail::read_u32le(raw.data() + pos + 4);
    pos += 8;
    if (pos + size > raw.size()) throw FormatError(path + ": truncated chunk");
    if (std::memcmp(id, "fmt ", 4) == 0) {
      if (size < 16) throw FormatError(path + ": fmt chunk too small");
      audio_format = detail::read_u16le(raw.data() + pos);
      channels = detail::read_u16le(raw.data() + pos + 2);
      rate = detail::read_u32le(raw.data() + pos + 4);
      bits = detail::read_u16le(raw.data() + pos + 14);
      have_fmt = true;
    } else if (std::memcmp(id, "data", 4) == 0) {
      data = raw.data() + pos;
      data_size = size;
    }
    pos += size + (size & 1);  // chunks are word-aligned
  }

  if (!have_fmt || data == nullptr) {
    throw FormatError(path + ": missing fmt or data chunk");
  }
  if (audio_format != 1) {
    throw FormatError(path + ": unsupported format (non-PCM)");
  }
  if (channels != 1) {
    throw FormatError(path + ": unsupported format (not mono)");
  }
  if (bits != 16) {
    throw FormatError(path + ": unsupported format (not 16-bit)");
  }

  AudioClip clip;
  clip.sample_rate_hz = static_cast<int>(rate);
  std::size_t n = data_size / 2;
  clip.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::int16_t s = static_cast<std::int16_t>(
        detail::read_u16le(data + 2 * i));
    clip.samples[i] = static_cast<double>(s) / 32768.0;
  }
  clip.validate();
  return clip;
}

// Writes PCM 16-bit mono. Round-to-nearest, clamped at +-full scale, so
// read_wav(write_wav(x)) reproduces x within 1/32768.
inline void write_wav(const AudioClip& clip, const std::string& path) {
  clip.validate();
  std::vector<unsigned char> out;
  std::uint32_t data_size = static_cast<std::uint32_t>(clip.samples.size() * 2);
  out.reserve(44 + data_size);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  detail::put_u32le(out, 36 + data_size);
  out.insert(out.end(), {'W', 'A', 'V', 'E'});
  out.insert(out.end(), {'f', 'm', 't', ' '});
  detail::put_u32le(out, 16);
  detail::put_u16le(out, 1);  // PCM
  detail::put_u16le(out, 1);  // mono
  detail::put_u32le(out, static_cast<std::uint32_t>(clip.sample_rate_hz));
  detail::put_u32le(out, static_cast<std::uint32_t>(clip.sample_rate_hz * 2));
  detail::put_u16le(out, 2);
  detail::put_u16le(out, 16);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  detail::put_u32le(out, data_size);
  for (double s : clip.samples) {
    long q = std::lround(s * 32768.0);
    q = std::clamp(q, -32768L, 32767L);
    detail::put_u16le(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path + " for writing");
  f.write(reinterpret_cast<const char*>(out.data()),
          static_cast<std::streamsize>(out.size()));
  if (!f) throw IoError("write failed on " + path);
}

}  // namespace voicesan

#endif  // VOICESAN_AUDIO_HPP
