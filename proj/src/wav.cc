// src/wav.cc


// Copyright 2026  The SAEP Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "saep/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

#include "saep/error.hpp"

namespace saep {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint32_t ReadU32(const unsigned char* p) {
  return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 |
         std::uint32_t(p[2]) << 16 | std::uint32_t(p[3]) << 24;
}

std::uint16_t ReadU16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | p[1] << 8);
}

void PutU32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>(v >> (8 * i)));
}

void PutU16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>(v >> 8));
}

}  // namespace

AudioClip LoadWav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    Fail(ErrorCode::kFileNotFound, "cannot open wav file " + path.string());
  const std::vector<unsigned char> bytes(
      (std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::string where = path.string() + ": ";
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    Fail(ErrorCode::kUnsupportedFormat, where + "not a RIFF/WAVE file");

  bool have_fmt = false;
  std::uint16_t channels = 0, bits = 0;
  std::uint32_t rate = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* hdr = bytes.data() + pos;
    const std::uint32_t size = ReadU32(hdr + 4);
    const std::size_t body = pos + 8;
    if (std::memcmp(hdr, "fmt ", 4) == 0) {
      if (size < 16 || body + size > bytes.size())
        Fail(ErrorCode::kTruncated, where + "short fmt chunk");
      std::uint16_t format = ReadU16(bytes.data() + body);
      channels = ReadU16(bytes.data() + body + 2);
      rate = ReadU32(bytes.data() + body + 4);
      bits = ReadU16(bytes.data() + body + 14);
      if (format == kFormatExtensible && size >= 26)
        format = ReadU16(bytes.data() + body + 24);
      if (format != kFormatPcm)
        Fail(ErrorCode::kUnsupportedFormat,
             where + "encoding " + std::to_string(format) + " is not PCM");
      have_fmt = true;
    } else if (std::memcmp(hdr, "data", 4) == 0) {
      if (!have_fmt)
        Fail(ErrorCode::kUnsupportedFormat, where + "data before fmt chunk");
      if (bits != 16)
        Fail(ErrorCode::kUnsupportedFormat,
             where + std::to_string(bits) + "-bit samples; need 16-bit");
      if (channels != 1)
        Fail(ErrorCode::kChannelCount,
             where + std::to_string(channels) + " channels; need mono");
      if (rate == 0) Fail(ErrorCode::kUnsupportedFormat, where + "zero rate");
      if (body + size > bytes.size())
        Fail(ErrorCode::kTruncated, where + "data chunk runs past end of file");
      AudioClip clip;
      clip.sample_rate = static_cast<int>(rate);
      clip.samples.resize(size / 2);
      for (std::size_t i = 0; i < clip.samples.size(); ++i) {
        const auto s = static_cast<std::int16_t>(ReadU16(bytes.data() + body + 2 * i));
        clip.samples[i] = static_cast<float>(s) / 32768.0f;
      }
      return clip;
    }
    pos = body + size + (size & 1);
  }
  Fail(have_fmt ? ErrorCode::kTruncated : ErrorCode::kUnsupportedFormat,
       where + "no data chunk");
}

void SaveWavPcm16(const std::filesystem::path& path,
                  std::span<const std::int16_t> interleaved, int channels,
                  int sample_rate) {
  const auto data_bytes =
      static_cast<std::uint32_t>(interleaved.size() * sizeof(std::int16_t));
  std::string out;
  out.reserve(44 + data_bytes);
  out += "RIFF";
  PutU32(out, 36 + data_bytes);
  out += "WAVEfmt ";
  PutU32(out, 16);
  PutU16(out, kFormatPcm);
  PutU16(out, static_cast<std::uint16_t>(channels));
  PutU32(out, static_cast<std::uint32_t>(sample_rate));
  PutU32(out, static_cast<std::uint32_t>(sample_rate * channels * 2));
  PutU16(out, static_cast<std::uint16_t>(channels * 2));
  PutU16(out, 16);
  out += "data";
  PutU32(out, data_bytes);
  for (std::int16_t s : interleaved) PutU16(out, static_cast<std::uint16_t>(s));
  std::ofstream f(path, std::ios::binary);
  if (!f) Fail(ErrorCode::kIo, "cannot write " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) Fail(ErrorCode::kIo, "write failed for " + path.string());
}

void SaveWav(const std::filesystem::path& path, const AudioClip& clip) {
  std::vector<std::int16_t> pcm(clip.samples.size());
  for (std::size_t i = 0; i < pcm.size(); ++i) {
    const float s = std::clamp(clip.samples[i], -1.0f, 1.0f);
    pcm[i] = static_cast<std::int16_t>(
        std::clamp(std::lround(s * 32768.0f), -32768L, 32767L));
  }
  SaveWavPcm16(path, pcm, 1, clip.sample_rate);
}

}  // namespace saep
