// tests/features_test.cc


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

#include <cmath>
#include <fstream>
#include <vector>

#include "doctest.h"
#include "saep/error.hpp"
#include "saep/features.hpp"
#include "test_util.hpp"

using namespace saep;
using saep::testing::RandomTensor;
using saep::testing::TempDir;

namespace {

AudioClip Tone(double hz, std::size_t samples, double amplitude = 0.5) {
  AudioClip clip;
  clip.samples.resize(samples);
  for (std::size_t n = 0; n < samples; ++n)
    clip.samples[n] = static_cast<float>(
        amplitude * std::sin(2.0 * M_PI * hz * double(n) / 16000.0));
  return clip;
}

ErrorCode CodeOf(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kOk;
}

}  // namespace

TEST_CASE("load_audio") {
  const auto dir = TempDir("wav");
  SUBCASE("one second at 16 kHz") {
    std::vector<std::int16_t> pcm(16000);
    for (std::size_t i = 0; i < pcm.size(); ++i)
      pcm[i] = static_cast<std::int16_t>((i * 37) % 2000 - 1000);
    SaveWavPcm16(dir / "a.wav", pcm, 1, 16000);
    AudioClip clip = LoadWav(dir / "a.wav");
    CHECK(clip.samples.size() == 16000);
    CHECK(clip.duration_seconds() == 1.0);
    CHECK(clip.samples[1] == float(pcm[1]) / 32768.0f);
  }
  SUBCASE("silence") {
    std::vector<std::int16_t> pcm(800, 0);
    SaveWavPcm16(dir / "z.wav", pcm, 1, 16000);
    for (float s : LoadWav(dir / "z.wav").samples) CHECK(s == 0.0f);
  }
  SUBCASE("full-scale samples stay in [-1, 1]") {
    std::vector<std::int16_t> pcm = {-32768, 32767};
    SaveWavPcm16(dir / "f.wav", pcm, 1, 16000);
    AudioClip clip = LoadWav(dir / "f.wav");
    CHECK(clip.samples[0] == -1.0f);
    CHECK(clip.samples[1] < 1.0f);
  }
  SUBCASE("distinct error cases") {
    std::vector<std::int16_t> pcm(800, 0);
    SaveWavPcm16(dir / "s.wav", pcm, 2, 16000);
    CHECK(CodeOf([&] { LoadWav(dir / "s.wav"); }) == ErrorCode::kChannelCount);
    CHECK(CodeOf([&] { LoadWav(dir / "missing.wav"); }) ==
          ErrorCode::kFileNotFound);
    {
      std::ofstream f(dir / "junk.wav", std::ios::binary);
      f << "not a wave file at all";
    }
    CHECK(CodeOf([&] { LoadWav(dir / "junk.wav"); }) ==
          ErrorCode::kUnsupportedFormat);
    // Rewrite the format tag of a valid file to IEEE float (3).
    SaveWavPcm16(dir / "fl.wav", pcm, 1, 16000);
    {
      std::fstream f(dir / "fl.wav",
                     std::ios::binary | std::ios::in | std::ios::out);
      f.seekp(20);
      f.put(3);
    }
    CHECK(CodeOf([&] { LoadWav(dir / "fl.wav"); }) ==
          ErrorCode::kUnsupportedFormat);
  }
}

TEST_CASE("mfcc") {
  SUBCASE("framing arithmetic") {
    Tensor m = Mfcc(Tone(440, 16000));
    CHECK(m.dim(0) == 98);
    CHECK(m.dim(1) == 30);
    Rng rng(2);
    for (int i = 0; i < 30; ++i) {
      const std::size_t n = 400 + rng.UniformInt(6000);
      CHECK(Mfcc(Tone(300, n)).dim(0) == 1 + (n - 400) / 160);
    }
    CHECK(Mfcc(Tone(300, 400)).dim(0) == 1);
  }
  SUBCASE("silence gives identical frames") {
    AudioClip clip;
    clip.samples.assign(4000, 0.0f);
    Tensor m = Mfcc(clip);
    for (std::size_t t = 1; t < m.dim(0); ++t)
      for (std::size_t c = 0; c < 30; ++c) CHECK(m.at(t, c) == m.at(0, c));
    Tensor f = ComputeFeatures(clip, "sil").frames;
    for (float v : f.data()) CHECK(v == 0.0f);
  }
  SUBCASE("different tones give different cepstra") {
    Tensor a = Mfcc(Tone(1000, 4000));
    Tensor b = Mfcc(Tone(2000, 4000));
    double dist = 0.0;
    for (std::size_t c = 0; c < 30; ++c) {
      const double d = a.at(5, c) - b.at(5, c);
      dist += d * d;
    }
    CHECK(std::sqrt(dist) > 1.0);
    // A tone's energy sits in the filters around its frequency; the 1 kHz
    // tone must have more low-filter energy than the 2 kHz tone, which shows
    // up as a larger first cepstral slope coefficient.
    CHECK(a.at(5, 1) > b.at(5, 1));
  }
  SUBCASE("errors") {
    CHECK(CodeOf([] { Mfcc(Tone(100, 399)); }) == ErrorCode::kTooShort);
    AudioClip clip = Tone(100, 8000);
    clip.sample_rate = 8000;
    CHECK(CodeOf([&] { Mfcc(clip); }) == ErrorCode::kUnsupportedFormat);
  }
}

TEST_CASE("append_deltas") {
  SUBCASE("constant sequence") {
    Tensor d = AppendDeltas(Tensor({10, 3}, 2.5f));
    for (std::size_t t = 0; t < 10; ++t)
      for (std::size_t j = 3; j < 9; ++j) CHECK(d.at(t, j) == 0.0f);
  }
  SUBCASE("linear ramp") {
    const std::size_t frames = 20;
    Tensor ramp({frames, 2});
    for (std::size_t t = 0; t < frames; ++t) {
      ramp.at(t, 0) = float(t);
      ramp.at(t, 1) = -2.0f * float(t);
    }
    Tensor d = AppendDeltas(ramp);
    for (std::size_t t = 2; t + 2 < frames; ++t) {
      CHECK(d.at(t, 2) == doctest::Approx(1.0));
      CHECK(d.at(t, 3) == doctest::Approx(-2.0));
    }
    for (std::size_t t = 4; t + 4 < frames; ++t) {
      CHECK(d.at(t, 4) == doctest::Approx(0.0));
      CHECK(d.at(t, 5) == doctest::Approx(0.0));
    }
    // Edge replication: at t = 0 the window sees c = {0, 0, 0, 1, 2}.
    CHECK(d.at(0, 2) == doctest::Approx((1 * 1 + 2 * 2) / 10.0));
  }
  SUBCASE("single frame") {
    Rng rng(1);
    Tensor d = AppendDeltas(RandomTensor({1, 30}, rng));
    for (std::size_t j = 30; j < 90; ++j) CHECK(d.at(0, j) == 0.0f);
  }
  SUBCASE("static block is preserved bit-exactly") {
    Rng rng(9);
    for (int trial = 0; trial < 10; ++trial) {
      Tensor s = RandomTensor({1 + rng.UniformInt(50), 30}, rng);
      Tensor d = AppendDeltas(s);
      for (std::size_t t = 0; t < s.dim(0); ++t)
        for (std::size_t j = 0; j < 30; ++j) CHECK(d.at(t, j) == s.at(t, j));
    }
  }
}

TEST_CASE("cmvn") {
  SUBCASE("two-point column") {
    Tensor c = Cmvn(Tensor::Matrix(2, 1, {2, 4}));
    CHECK(c[0] == doctest::Approx(-1.0));
    CHECK(c[1] == doctest::Approx(1.0));
  }
  SUBCASE("constant column") {
    Tensor c = Cmvn(Tensor({7, 2}, 3.0f));
    for (float v : c.data()) CHECK(v == 0.0f);
  }
  SUBCASE("statistics and idempotence") {
    Rng rng(4);
    Tensor x = RandomTensor({50, 90}, rng, 5.0);
    for (float& v : x.data()) v += 3.0f;
    Tensor c = Cmvn(x);
    for (std::size_t j = 0; j < 90; ++j) {
      double mean = 0.0, var = 0.0;
      for (std::size_t t = 0; t < 50; ++t) mean += c.at(t, j);
      mean /= 50;
      for (std::size_t t = 0; t < 50; ++t)
        var += (c.at(t, j) - mean) * (c.at(t, j) - mean);
      var /= 50;
      CHECK(std::abs(mean) < 1e-4);
      CHECK(std::abs(var - 1.0) < 1e-3);
    }
    Tensor cc = Cmvn(c);
    for (std::size_t i = 0; i < c.size(); ++i)
      CHECK(std::abs(cc[i] - c[i]) < 1e-4);
  }
}

TEST_CASE("chunk") {
  Rng data_rng(6);
  SUBCASE("exact length returns the whole sequence") {
    Tensor x = RandomTensor({300, 90}, data_rng);
    for (std::uint64_t seed : {0, 1, 99}) {
      Rng rng(seed);
      CHECK(Chunk(x, rng) == x);
    }
  }
  SUBCASE("long sequence: deterministic window") {
    Tensor x({600, 90});
    for (std::size_t t = 0; t < 600; ++t)
      for (std::size_t j = 0; j < 90; ++j) x.at(t, j) = float(t);
    Rng a(42), b(42);
    Tensor ca = Chunk(x, a), cb = Chunk(x, b);
    CHECK(ca == cb);
    const float start = ca.at(0, 0);
    CHECK(start >= 0.0f);
    CHECK(start <= 300.0f);
    for (std::size_t t = 0; t < 300; ++t) CHECK(ca.at(t, 0) == start + t);
  }
  SUBCASE("short sequence wraps with its own period") {
    Tensor x = RandomTensor({100, 90}, data_rng);
    Rng rng(5);
    Tensor c = Chunk(x, rng);
    CHECK(c.shape() == Shape{300, 90});
    for (std::size_t t = 0; t < 300; ++t)
      for (std::size_t j = 0; j < 90; ++j) CHECK(c.at(t, j) == x.at(t % 100, j));
  }
  SUBCASE("shape is always 300 x 90") {
    Rng rng(8);
    for (int i = 0; i < 20; ++i) {
      Tensor x = RandomTensor({1 + rng.UniformInt(900), 90}, rng);
      CHECK(Chunk(x, rng).shape() == Shape{300, 90});
    }
  }
}

TEST_CASE("feature pipeline and cache") {
  AudioClip clip = Tone(700, 16000);
  Rng rng(3);
  for (float& s : clip.samples) s += static_cast<float>(0.05 * rng.Normal());
  FeatureSequence f = ComputeFeatures(clip, "utt1");
  CHECK(f.frames.shape() == Shape{98, kFeatureDim});
  for (std::size_t j = 0; j < kFeatureDim; ++j) {
    double mean = 0.0;
    for (std::size_t t = 0; t < 98; ++t) mean += f.frames.at(t, j);
    CHECK(std::abs(mean / 98) < 1e-4);
  }
  const auto dir = TempDir("featcache");
  SaveFeatureCache(dir / "utt1.feats", f);
  FeatureSequence g = LoadFeatureCache(dir / "utt1.feats", "utt1");
  CHECK(g.frames == f.frames);
}
