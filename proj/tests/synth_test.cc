// tests/synth_test.cc


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

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <string>

#include "doctest.h"
#include "saep/error.hpp"
#include "saep/eval.hpp"
#include "saep/synth.hpp"
#include "saep/training.hpp"
#include "saep/wav.hpp"
#include "test_util.hpp"

using namespace saep;
namespace fs = std::filesystem;

namespace {

std::string ReadBytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// |DFT| at one frequency, normalised by length.
double ToneMagnitude(const std::vector<float>& x, double hz, double rate) {
  double re = 0.0, im = 0.0;
  const double w = 2.0 * std::numbers::pi * hz / rate;
  for (std::size_t i = 0; i < x.size(); ++i) {
    re += x[i] * std::cos(w * static_cast<double>(i));
    im -= x[i] * std::sin(w * static_cast<double>(i));
  }
  return std::hypot(re, im) / static_cast<double>(x.size());
}

}  // namespace

TEST_CASE("synth: default toy corpus layout and determinism") {
  const SynthOptions opts;  // 10 speakers x 20 utterances, seed 7
  CHECK(opts.n_speakers == 10);
  CHECK(opts.utts_per_speaker == 20);
  CHECK(opts.seed == 7);
  CHECK(opts.duration_seconds == 3.0);
  CHECK(opts.snr_db == 20.0);

  const fs::path a = saep::testing::TempDir("synth_a");
  const fs::path b = saep::testing::TempDir("synth_b");
  const SynthCorpus ca = GenerateCorpus(opts, a);
  const SynthCorpus cb = GenerateCorpus(opts, b);

  std::size_t wavs = 0;
  for (const auto& entry : fs::directory_iterator(a / "wav")) {
    ++wavs;
    CHECK(ReadBytes(entry.path()) == ReadBytes(b / "wav" / entry.path().filename()));
  }
  CHECK(wavs == 200);
  CHECK(ca.num_utterances == 200);
  for (const char* f : {"manifest.txt", "train_manifest.txt", "trials.txt"})
    CHECK(ReadBytes(a / f) == ReadBytes(b / f));

  const Manifest all = LoadManifest(ca.manifest);
  CHECK(all.size() == 200);
  CHECK(all.num_speakers() == 10);
  const AudioClip clip = LoadWav(all.entries[0].wav_path);
  CHECK(clip.sample_rate == 16000);
  CHECK(clip.samples.size() == 48000);

  // Distinct harmonic triples.
  std::set<std::array<int, 3>> triples;
  for (const auto& s : ca.speakers) {
    CHECK(s.harmonics[0] < s.harmonics[1]);
    CHECK(s.harmonics[1] < s.harmonics[2]);
    triples.insert(s.harmonics);
  }
  CHECK(triples.size() == ca.speakers.size());

  // Balanced trials over held-out utterances only.
  const auto trials = LoadTrialList(ca.trials);
  std::size_t targets = 0, nontargets = 0;
  for (const auto& t : trials) (t.label == 1 ? targets : nontargets)++;
  CHECK(targets == ca.num_targets);
  CHECK(nontargets == ca.num_nontargets);
  CHECK(targets + 1 >= nontargets);
  CHECK(nontargets + 1 >= targets);
  CHECK(targets == 100);

  const Manifest train = LoadManifest(ca.train_manifest);
  CHECK(train.size() == 150);
  CHECK(train.num_speakers() == 10);
  std::set<std::string> train_ids;
  std::map<std::string, std::string> speaker_of;
  for (const auto& e : train.entries) train_ids.insert(e.utterance_id);
  for (const auto& e : all.entries) speaker_of[e.utterance_id] = e.speaker;
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& t : trials) {
    CHECK(train_ids.count(t.enroll_id) == 0);
    CHECK(train_ids.count(t.test_id) == 0);
    CHECK((speaker_of.at(t.enroll_id) == speaker_of.at(t.test_id)) == (t.label == 1));
    CHECK(t.enroll_id != t.test_id);
    CHECK(seen.insert({t.enroll_id, t.test_id}).second);
  }
}

TEST_CASE("synth: speaker tones carry the energy below the distractor band") {
  SynthOptions opts;
  Rng rng(11);
  const auto speakers = DrawSpeakers(opts, rng);
  for (int trial = 0; trial < 5; ++trial) {
    const SynthSpeaker& s = speakers[static_cast<std::size_t>(trial)];
    Rng utt(100 + trial);
    const AudioClip clip = SynthesizeUtterance(s, opts, utt);
    double weakest_own = 1e9, strongest_other = 0.0;
    for (int h : s.harmonics)
      weakest_own = std::min(weakest_own, ToneMagnitude(clip.samples, opts.base_hz * h, 16000));
    for (int h = opts.min_harmonic; h <= opts.max_harmonic; ++h) {
      if (std::find(s.harmonics.begin(), s.harmonics.end(), h) != s.harmonics.end()) continue;
      strongest_other =
          std::max(strongest_other, ToneMagnitude(clip.samples, opts.base_hz * h, 16000));
    }
    // At 20 dB SNR the white floor spreads over 24000 bins; any own tone is
    // orders of magnitude above a bin without a tone.
    CHECK(weakest_own > 10.0 * strongest_other);
    float peak = 0.0f;
    for (float v : clip.samples) peak = std::max(peak, std::abs(v));
    CHECK(peak == doctest::Approx(0.5f).epsilon(1e-6));
  }
}

TEST_CASE("synth: rejects bad options") {
  auto code = [](SynthOptions o) {
    try {
      o.Validate();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kOk;
  };
  CHECK(code(SynthOptions{}) == ErrorCode::kOk);
  SynthOptions o;
  o.n_speakers = 1;
  CHECK(code(o) == ErrorCode::kConfig);
  o = {};
  o.utts_per_speaker = 2;
  CHECK(code(o) == ErrorCode::kConfig);
  o = {};
  o.distractor_min_hz = 2000.0;  // overlaps the harmonic range
  CHECK(code(o) == ErrorCode::kConfig);
  o = {};
  o.distractor_max_hz = 9000.0;
  CHECK(code(o) == ErrorCode::kConfig);
  o = {};
  o.max_harmonic = 3;
  CHECK(code(o) == ErrorCode::kConfig);
}
