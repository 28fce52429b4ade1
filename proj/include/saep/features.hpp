// saep/features.hpp


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

#ifndef SAEP_FEATURES_HPP_
#define SAEP_FEATURES_HPP_

#include <cstddef>
#include <filesystem>
#include <string>

#include "saep/random.hpp"
#include "saep/tensor.hpp"
#include "saep/wav.hpp"

namespace saep {

// Front-end convention. Only the coefficient count and the 25 ms / 10 ms
// framing are fixed by the model; the rest are conventional choices:
// periodic Hann window, 512-point FFT of the zero-padded frame, power
// spectrum, 40 triangular HTK-mel filters over 0-8 kHz (unnormalised), no
// pre-emphasis, natural log floored at 1e-10, orthonormal DCT-II, no
// liftering.
struct MfccOptions {
  static constexpr int kSampleRate = 16000;
  static constexpr std::size_t kWindow = 400;
  static constexpr std::size_t kHop = 160;
  static constexpr std::size_t kFftSize = 512;
  static constexpr std::size_t kNumMelFilters = 40;
  static constexpr double kLowHz = 0.0;
  static constexpr double kHighHz = 8000.0;
  static constexpr double kLogFloor = 1e-10;
  static constexpr std::size_t kNumCeps = 30;
};

inline constexpr std::size_t kFeatureDim = 3 * MfccOptions::kNumCeps;
inline constexpr std::size_t kChunkFrames = 300;

// T x 90 CMVN-normalised [static | delta | delta-delta] frames.
struct FeatureSequence {
  Tensor frames;
  std::string utterance_id;

  std::size_t num_frames() const { return frames.empty() ? 0 : frames.dim(0); }
};

// 1 + floor((num_samples - 400) / 160) for num_samples >= 400, else 0.
std::size_t NumFrames(std::size_t num_samples);

// T x 30 cepstra. Errors: kTooShort below one window, kUnsupportedFormat for
// a sample rate other than 16 kHz.
Tensor Mfcc(const AudioClip& clip);

// Regression deltas over +-2 frames with edge replication:
//   d_t = sum_{n=1..2} n (c_{t+n} - c_{t-n}) / 10
// Returns [static | delta | delta(delta)].
Tensor AppendDeltas(const Tensor& statics);

// Per-utterance, per-column zero mean / unit (population) variance, with
// the variance floored at 1e-8.
Tensor Cmvn(const Tensor& feats);

// Random contiguous window of `length` rows; sequences shorter than
// `length` are tiled from row 0 (row i = frames[i mod T]).
Tensor Chunk(const Tensor& frames, Rng& rng, std::size_t length = kChunkFrames);

// Mfcc -> AppendDeltas -> Cmvn.
FeatureSequence ComputeFeatures(const AudioClip& clip, std::string utterance_id);

// Feature cache: one record file per utterance with a single "feats" record.
void SaveFeatureCache(const std::filesystem::path& path,
                      const FeatureSequence& feats);
FeatureSequence LoadFeatureCache(const std::filesystem::path& path,
                                 std::string utterance_id);

}  // namespace saep

#endif  // SAEP_FEATURES_HPP_
