// saep/wav.hpp


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

#ifndef SAEP_WAV_HPP_
#define SAEP_WAV_HPP_

#include <filesystem>
#include <span>
#include <vector>

namespace saep {

struct AudioClip {
  std::vector<float> samples;  // in [-1, 1]
  int sample_rate = 16000;

  double duration_seconds() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

// Reads a RIFF/WAVE file holding 16-bit PCM mono audio. Samples are scaled
// by 1/32768. Errors: kFileNotFound, kUnsupportedFormat (not RIFF/WAVE, not
// PCM, not 16-bit), kChannelCount (not mono), kTruncated.
AudioClip LoadWav(const std::filesystem::path& path);

// Writes 16-bit PCM mono; samples are clipped to [-1, 1).
void SaveWav(const std::filesystem::path& path, const AudioClip& clip);

// Writes an arbitrary 16-bit PCM file; used to produce fixtures.
void SaveWavPcm16(const std::filesystem::path& path,
                  std::span<const std::int16_t> interleaved, int channels,
                  int sample_rate);

}  // namespace saep

#endif  // SAEP_WAV_HPP_
