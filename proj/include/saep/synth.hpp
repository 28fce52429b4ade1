// saep/synth.hpp


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

#ifndef SAEP_SYNTH_HPP_
#define SAEP_SYNTH_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "saep/eval.hpp"
#include "saep/random.hpp"
#include "saep/wav.hpp"

namespace saep {

struct SynthOptions {
  int n_speakers = 10;
  int utts_per_speaker = 20;
  std::uint64_t seed = 7;
  double duration_seconds = 3.0;
  double snr_db = 20.0;
  // Harmonics are drawn from base_hz * {min_harmonic .. max_harmonic}.
  double base_hz = 50.0;
  int min_harmonic = 2;
  int max_harmonic = 60;
  // Per utterance, every harmonic's level is scaled by a factor uniform in
  // [1 - amplitude_jitter, 1 + amplitude_jitter].
  double amplitude_jitter = 0.5;
  // Every utterance also carries distractor_tones sinusoids at frequencies
  // drawn afresh from [distractor_min_hz, distractor_max_hz], above the
  // harmonic range, gated with the speaker's tones. They carry no identity
  // but dominate the spectrum of an untrained model's view.
  int distractor_tones = 3;
  double distractor_min_hz = 3500.0;
  double distractor_max_hz = 7500.0;
  // Distractor levels are uniform in [distractor_min_level,
  // distractor_max_level]; speaker tones use [0.5, 1].
  double distractor_min_level = 3.0;
  double distractor_max_level = 6.0;

  void Validate() const;
};

struct SynthSpeaker {
  std::string name;
  std::array<int, 3> harmonics;  // ascending harmonic numbers
  std::array<double, 3> weights;
};

// Distinct harmonic triples; a draw that repeats an earlier speaker's triple
// is thrown away and drawn again.
std::vector<SynthSpeaker> DrawSpeakers(const SynthOptions& options, Rng& rng);

// One utterance: the speaker's three harmonics with random phases and
// jittered levels and the distractor tones, gated by a random
// syllable-like on/off envelope, plus white noise at the configured SNR.
AudioClip SynthesizeUtterance(const SynthSpeaker& speaker,
                              const SynthOptions& options, Rng& rng);

struct SynthCorpus {
  std::vector<SynthSpeaker> speakers;
  std::filesystem::path manifest;        // every utterance
  std::filesystem::path train_manifest;  // all but the held-out utterances
  std::filesystem::path trials;          // pairs among held-out utterances
  std::size_t num_utterances = 0;
  std::size_t num_targets = 0;
  std::size_t num_nontargets = 0;
};

// The last max(2, utts_per_speaker / 4) utterances of every speaker are held
// out of train_manifest.txt. trials.txt pairs held-out utterances: every
// same-speaker pair as a target and as many distinct cross-speaker pairs as
// nontargets. Paths in the manifests are relative to out_dir.
SynthCorpus GenerateCorpus(const SynthOptions& options,
                           const std::filesystem::path& out_dir);

}  // namespace saep

#endif  // SAEP_SYNTH_HPP_
