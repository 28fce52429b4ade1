// src/synth.cc


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

#include "saep/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <set>


#include "saep/error.hpp"

namespace saep {
namespace {

constexpr int kSampleRate = 16000;

std::string Padded(const char* prefix, int i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%02d", prefix, i);
  return buf;
}

std::string UttId(int speaker, int utt) {
  return Padded("spk", speaker) + "_" + Padded("utt", utt);
}

int HeldOut(const SynthOptions& o) { return std::max(2, o.utts_per_speaker / 4); }

// Alternating on/off gate with 10 ms raised-cosine edges.
std::vector<float> SyllableEnvelope(std::size_t n, Rng& rng) {
  std::vector<float> env(n, 0.0f);
  const std::size_t ramp = kSampleRate / 100;
  bool on = rng.Uniform() < 0.5;
  for (std::size_t pos = 0; pos < n;) {
    const double ms = on ? rng.Uniform(150.0, 400.0) : rng.Uniform(50.0, 250.0);
    const std::size_t len = static_cast<std::size_t>(ms * kSampleRate / 1000.0);
    const std::size_t end = std::min(n, pos + len);
    if (on) {
      for (std::size_t i = pos; i < end; ++i) {
        const std::size_t from_edge = std::min(i - pos, end - 1 - i);
        env[i] = from_edge >= ramp
                     ? 1.0f
                     : static_cast<float>(0.5 - 0.5 * std::cos(std::numbers::pi *
                                                               from_edge / ramp));
      }
    }
    pos = end;
    on = !on;
  }
  return env;
}

void WriteText(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) Fail(ErrorCode::kIo, "cannot write " + path.string());
  out << text;
  if (!out) Fail(ErrorCode::kIo, "write failed: " + path.string());
}

}  // namespace

void SynthOptions::Validate() const {
  if (n_speakers < 2) Fail(ErrorCode::kConfig, "synth needs at least 2 speakers");
  if (utts_per_speaker < 3)
    Fail(ErrorCode::kConfig, "synth needs at least 3 utterances per speaker");
  if (!(duration_seconds >= 0.05) || !std::isfinite(duration_seconds))
    Fail(ErrorCode::kConfig, "synth duration must be at least 0.05 s");
  if (!std::isfinite(snr_db)) Fail(ErrorCode::kConfig, "synth SNR must be finite");
  if (min_harmonic < 1 || max_harmonic - min_harmonic < 2)
    Fail(ErrorCode::kConfig, "synth harmonic range must hold at least 3 harmonics");
  if (!(base_hz > 0.0) || base_hz * max_harmonic >= kSampleRate / 2.0)
    Fail(ErrorCode::kConfig, "synth harmonics must stay below Nyquist");
  if (!(amplitude_jitter >= 0.0 && amplitude_jitter < 1.0))
    Fail(ErrorCode::kConfig, "synth amplitude jitter must lie in [0, 1)");
  if (distractor_tones < 0)
    Fail(ErrorCode::kConfig, "synth distractor tone count must be >= 0");
  if (!(distractor_min_hz > 0.0 && distractor_min_hz <= distractor_max_hz &&
        distractor_max_hz < kSampleRate / 2.0))
    Fail(ErrorCode::kConfig, "synth distractor band must lie in (0, Nyquist)");
  if (base_hz * max_harmonic >= distractor_min_hz)
    Fail(ErrorCode::kConfig, "synth distractor band must lie above the harmonic range");
  if (!(distractor_min_level >= 0.0 && distractor_min_level <= distractor_max_level))
    Fail(ErrorCode::kConfig, "synth distractor levels are inconsistent");
  const double span = max_harmonic - min_harmonic + 1;
  if (span * (span - 1) * (span - 2) / 6 < n_speakers)
    Fail(ErrorCode::kConfig, "not enough distinct harmonic triples for the speakers");
}

std::vector<SynthSpeaker> DrawSpeakers(const SynthOptions& options, Rng& rng) {
  options.Validate();
  std::set<std::array<int, 3>> used;
  std::vector<SynthSpeaker> speakers;
  const std::uint64_t span = options.max_harmonic - options.min_harmonic + 1;
  while (static_cast<int>(speakers.size()) < options.n_speakers) {
    std::array<int, 3> h;
    for (int& x : h) x = options.min_harmonic + static_cast<int>(rng.UniformInt(span));
    std::sort(h.begin(), h.end());
    if (h[0] == h[1] || h[1] == h[2] || !used.insert(h).second) continue;
    SynthSpeaker s;
    s.name = Padded("spk", static_cast<int>(speakers.size()));
    s.harmonics = h;
    for (double& w : s.weights) w = rng.Uniform(0.5, 1.0);
    speakers.push_back(s);
  }
  return speakers;
}

AudioClip SynthesizeUtterance(const SynthSpeaker& speaker,
                              const SynthOptions& options, Rng& rng) {
  const std::size_t n =
      static_cast<std::size_t>(std::lround(options.duration_seconds * kSampleRate));
  std::vector<double> freqs, weights(speaker.weights.begin(), speaker.weights.end());
  for (int h : speaker.harmonics) freqs.push_back(options.base_hz * h);
  for (int d = 0; d < options.distractor_tones; ++d) {
    freqs.push_back(rng.Uniform(options.distractor_min_hz, options.distractor_max_hz));
    weights.push_back(
        rng.Uniform(options.distractor_min_level, options.distractor_max_level));
  }
  const std::size_t tones = freqs.size();
  std::vector<double> phase(tones), level(tones), omega(tones);
  for (std::size_t k = 0; k < tones; ++k) {
    phase[k] = rng.Uniform(0.0, 2.0 * std::numbers::pi);
    level[k] = weights[k] *
               rng.Uniform(1.0 - options.amplitude_jitter, 1.0 + options.amplitude_jitter);
    omega[k] = 2.0 * std::numbers::pi * freqs[k] / kSampleRate;
  }
  const std::vector<float> env = SyllableEnvelope(n, rng);
  std::vector<double> signal(n);
  double power = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < tones; ++k)
      s += level[k] * std::sin(omega[k] * static_cast<double>(i) + phase[k]);
    signal[i] = env[i] * s;
    power += signal[i] * signal[i];
  }
  power /= static_cast<double>(n);
  if (power == 0.0) power = 1.0;  // fully gated off: noise at a nominal level
  const double noise_sd = std::sqrt(power / std::pow(10.0, options.snr_db / 10.0));
  double peak = 0.0;
  for (double& v : signal) {
    v += noise_sd * rng.Normal();
    peak = std::max(peak, std::abs(v));
  }
  AudioClip clip;
  clip.sample_rate = kSampleRate;
  clip.samples.resize(n);
  const double gain = peak > 0.0 ? 0.5 / peak : 1.0;
  for (std::size_t i = 0; i < n; ++i) clip.samples[i] = static_cast<float>(gain * signal[i]);
  return clip;
}

SynthCorpus GenerateCorpus(const SynthOptions& options,
                           const std::filesystem::path& out_dir) {
  options.Validate();
  std::error_code ec;
  std::filesystem::create_directories(out_dir / "wav", ec);
  if (ec) Fail(ErrorCode::kIo, "cannot create " + (out_dir / "wav").string() + ": " + ec.message());

  Rng rng(options.seed);
  SynthCorpus corpus;
  corpus.speakers = DrawSpeakers(options, rng);
  const int held = HeldOut(options);
  std::string manifest, train_manifest;
  for (int s = 0; s < options.n_speakers; ++s) {
    for (int u = 0; u < options.utts_per_speaker; ++u) {
      // Every utterance has its own stream, so changing the corpus size
      // leaves existing utterances untouched.
      Rng utt_rng(MixSeed(options.seed, (std::uint64_t(s) << 32) | std::uint64_t(u)));
      const std::string id = UttId(s, u);
      const std::string rel = "wav/" + id + ".wav";
      SaveWav(out_dir / rel, SynthesizeUtterance(corpus.speakers[s], options, utt_rng));
      const std::string line = id + " " + corpus.speakers[s].name + " " + rel + "\n";
      manifest += line;
      if (u < options.utts_per_speaker - held) train_manifest += line;
      ++corpus.num_utterances;
    }
  }

  std::vector<Trial> targets, nontargets;
  const int first_held = options.utts_per_speaker - held;
  for (int s = 0; s < options.n_speakers; ++s)
    for (int a = first_held; a < options.utts_per_speaker; ++a)
      for (int b = a + 1; b < options.utts_per_speaker; ++b)
        targets.push_back({1, UttId(s, a), UttId(s, b)});
  for (int s = 0; s < options.n_speakers; ++s)
    for (int t = s + 1; t < options.n_speakers; ++t)
      for (int a = first_held; a < options.utts_per_speaker; ++a)
        for (int b = first_held; b < options.utts_per_speaker; ++b)
          nontargets.push_back({0, UttId(s, a), UttId(t, b)});
  // Partial Fisher-Yates: the first targets.size() entries are a uniform
  // sample without replacement.
  const std::size_t keep = std::min(targets.size(), nontargets.size());
  for (std::size_t i = 0; i < keep; ++i)
    std::swap(nontargets[i], nontargets[i + rng.UniformInt(nontargets.size() - i)]);
  nontargets.resize(keep);
  std::vector<Trial> trials;
  for (std::size_t i = 0; i < std::max(targets.size(), keep); ++i) {
    if (i < targets.size()) trials.push_back(targets[i]);
    if (i < keep) trials.push_back(nontargets[i]);
  }

  corpus.manifest = out_dir / "manifest.txt";
  corpus.train_manifest = out_dir / "train_manifest.txt";
  corpus.trials = out_dir / "trials.txt";
  WriteText(corpus.manifest, manifest);
  WriteText(corpus.train_manifest, train_manifest);
  WriteText(corpus.trials, FormatTrialList(trials));
  corpus.num_targets = targets.size();
  corpus.num_nontargets = keep;
  return corpus;
}

}  // namespace saep
