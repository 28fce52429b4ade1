// src/features.cc


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

#include "saep/features.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <vector>

#include "saep/error.hpp"
#include "saep/records.hpp"

namespace saep {
namespace {

using Opt = MfccOptions;
constexpr std::size_t kNumBins = Opt::kFftSize / 2 + 1;

double HzToMel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double MelToHz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

struct FrontEnd {
  std::vector<float> window;
  // kNumMelFilters x kNumBins, row-major.
  std::vector<float> mel;
  // kNumCeps x kNumMelFilters, row-major.
  std::vector<float> dct;
  fftwf_plan plan = nullptr;

  FrontEnd() {
    window.resize(Opt::kWindow);
    for (std::size_t n = 0; n < Opt::kWindow; ++n)
      window[n] = static_cast<float>(
          0.5 - 0.5 * std::cos(2.0 * M_PI * double(n) / double(Opt::kWindow)));

    const double lo = HzToMel(Opt::kLowHz), hi = HzToMel(Opt::kHighHz);
    std::vector<double> edges(Opt::kNumMelFilters + 2);
    for (std::size_t i = 0; i < edges.size(); ++i)
      edges[i] = MelToHz(lo + (hi - lo) * double(i) / double(edges.size() - 1));
    mel.assign(Opt::kNumMelFilters * kNumBins, 0.0f);
    for (std::size_t m = 0; m < Opt::kNumMelFilters; ++m) {
      const double left = edges[m], center = edges[m + 1], right = edges[m + 2];
      for (std::size_t k = 0; k < kNumBins; ++k) {
        const double f = double(k) * Opt::kSampleRate / double(Opt::kFftSize);
        double w = 0.0;
        if (f > left && f <= center) w = (f - left) / (center - left);
        else if (f > center && f < right) w = (right - f) / (right - center);
        mel[m * kNumBins + k] = static_cast<float>(w);
      }
    }

    const double n_mel = double(Opt::kNumMelFilters);
    dct.resize(Opt::kNumCeps * Opt::kNumMelFilters);
    for (std::size_t k = 0; k < Opt::kNumCeps; ++k) {
      const double scale =
          k == 0 ? std::sqrt(1.0 / n_mel) : std::sqrt(2.0 / n_mel);
      for (std::size_t n = 0; n < Opt::kNumMelFilters; ++n)
        dct[k * Opt::kNumMelFilters + n] = static_cast<float>(
            scale * std::cos(M_PI * double(k) * (2.0 * double(n) + 1.0) /
                             (2.0 * n_mel)));
    }

    float* in = fftwf_alloc_real(Opt::kFftSize);
    fftwf_complex* out = fftwf_alloc_complex(kNumBins);
    plan = fftwf_plan_dft_r2c_1d(static_cast<int>(Opt::kFftSize), in, out,
                                 FFTW_ESTIMATE);
    fftwf_free(in);
    fftwf_free(out);
  }
};

// FFTW planning is not thread-safe; the plan is built once and only the
// new-array execute interface (which is thread-safe) is used afterwards.
const FrontEnd& GetFrontEnd() {
  static std::once_flag once;
  static std::unique_ptr<FrontEnd> front;
  std::call_once(once, [] { front = std::make_unique<FrontEnd>(); });
  return *front;
}

struct FftwFree {
  void operator()(void* p) const { fftwf_free(p); }
};

}  // namespace

std::size_t NumFrames(std::size_t num_samples) {
  if (num_samples < Opt::kWindow) return 0;
  return 1 + (num_samples - Opt::kWindow) / Opt::kHop;
}

Tensor Mfcc(const AudioClip& clip) {
  if (clip.sample_rate != Opt::kSampleRate)
    Fail(ErrorCode::kUnsupportedFormat,
         "sample rate " + std::to_string(clip.sample_rate) +
             " Hz; features need 16000 Hz");
  const std::size_t frames = NumFrames(clip.samples.size());
  if (frames == 0)
    Fail(ErrorCode::kTooShort, "clip of " +
                                   std::to_string(clip.samples.size()) +
                                   " samples is shorter than one 400-sample "
                                   "window");
  const FrontEnd& fe = GetFrontEnd();
  std::unique_ptr<float, FftwFree> in(fftwf_alloc_real(Opt::kFftSize));
  std::unique_ptr<fftwf_complex, FftwFree> spec(fftwf_alloc_complex(kNumBins));
  std::vector<float> power(kNumBins), log_mel(Opt::kNumMelFilters);
  Tensor out({frames, Opt::kNumCeps});
  for (std::size_t t = 0; t < frames; ++t) {
    const float* src = clip.samples.data() + t * Opt::kHop;
    float* buf = in.get();
    for (std::size_t n = 0; n < Opt::kWindow; ++n) buf[n] = src[n] * fe.window[n];
    std::fill(buf + Opt::kWindow, buf + Opt::kFftSize, 0.0f);
    fftwf_execute_dft_r2c(fe.plan, buf, spec.get());
    for (std::size_t k = 0; k < kNumBins; ++k)
      power[k] = spec.get()[k][0] * spec.get()[k][0] +
                 spec.get()[k][1] * spec.get()[k][1];
    for (std::size_t m = 0; m < Opt::kNumMelFilters; ++m) {
      double e = 0.0;
      const float* w = fe.mel.data() + m * kNumBins;
      for (std::size_t k = 0; k < kNumBins; ++k) e += double(w[k]) * power[k];
      log_mel[m] = static_cast<float>(std::log(std::max(e, Opt::kLogFloor)));
    }
    for (std::size_t c = 0; c < Opt::kNumCeps; ++c) {
      double acc = 0.0;
      const float* row = fe.dct.data() + c * Opt::kNumMelFilters;
      for (std::size_t m = 0; m < Opt::kNumMelFilters; ++m)
        acc += double(row[m]) * log_mel[m];
      out.at(t, c) = static_cast<float>(acc);
    }
  }
  return out;
}

namespace {

// Regression delta of columns [col0, col0 + d) of src, written to columns
// [dcol0, dcol0 + d) of dst.
void Delta(const Tensor& src, std::size_t col0, Tensor& dst, std::size_t dcol0,
           std::size_t d) {
  const std::size_t frames = src.dim(0);
  const auto clamp = [&](std::ptrdiff_t t) {
    return static_cast<std::size_t>(
        std::clamp<std::ptrdiff_t>(t, 0, static_cast<std::ptrdiff_t>(frames) - 1));
  };
  for (std::size_t t = 0; t < frames; ++t) {
    const auto ti = static_cast<std::ptrdiff_t>(t);
    for (std::size_t j = 0; j < d; ++j) {
      double acc = 0.0;
      for (int n = 1; n <= 2; ++n)
        acc += n * (double(src.at(clamp(ti + n), col0 + j)) -
                    double(src.at(clamp(ti - n), col0 + j)));
      dst.at(t, dcol0 + j) = static_cast<float>(acc / 10.0);
    }
  }
}

}  // namespace

Tensor AppendDeltas(const Tensor& statics) {
  if (statics.rank() != 2 || statics.dim(0) == 0)
    Fail(ErrorCode::kDimension, "append_deltas needs a non-empty T x d "
                                "matrix, got " + ShapeToString(statics.shape()));
  const std::size_t frames = statics.dim(0), d = statics.dim(1);
  Tensor out({frames, 3 * d});
  for (std::size_t t = 0; t < frames; ++t)
    for (std::size_t j = 0; j < d; ++j) out.at(t, j) = statics.at(t, j);
  Delta(out, 0, out, d, d);
  Delta(out, d, out, 2 * d, d);
  return out;
}

Tensor Cmvn(const Tensor& feats) {
  if (feats.rank() != 2 || feats.dim(0) == 0)
    Fail(ErrorCode::kDimension, "cmvn needs a non-empty T x d matrix, got " +
                                    ShapeToString(feats.shape()));
  const std::size_t frames = feats.dim(0), d = feats.dim(1);
  Tensor out(feats.shape());
  for (std::size_t j = 0; j < d; ++j) {
    double mean = 0.0;
    for (std::size_t t = 0; t < frames; ++t) mean += feats.at(t, j);
    mean /= double(frames);
    double var = 0.0;
    for (std::size_t t = 0; t < frames; ++t) {
      const double c = feats.at(t, j) - mean;
      var += c * c;
    }
    var /= double(frames);
    const double inv = 1.0 / std::sqrt(std::max(var, 1e-8));
    for (std::size_t t = 0; t < frames; ++t)
      out.at(t, j) = static_cast<float>((feats.at(t, j) - mean) * inv);
  }
  return out;
}

Tensor Chunk(const Tensor& frames, Rng& rng, std::size_t length) {
  if (frames.rank() != 2 || frames.dim(0) == 0)
    Fail(ErrorCode::kEmptyInput, "cannot chunk an empty feature sequence");
  const std::size_t total = frames.dim(0), width = frames.dim(1);
  if (total >= length) {
    const std::size_t start = rng.UniformInt(total - length + 1);
    return frames.SliceRows(start, start + length);
  }
  Tensor out({length, width});
  for (std::size_t i = 0; i < length; ++i)
    std::copy_n(frames.ptr() + (i % total) * width, width,
                out.ptr() + i * width);
  return out;
}

FeatureSequence ComputeFeatures(const AudioClip& clip,
                                std::string utterance_id) {
  return {Cmvn(AppendDeltas(Mfcc(clip))), std::move(utterance_id)};
}

void SaveFeatureCache(const std::filesystem::path& path,
                      const FeatureSequence& feats) {
  RecordFile file;
  file.Add("feats", feats.frames);
  file.Save(path);
}

FeatureSequence LoadFeatureCache(const std::filesystem::path& path,
                                 std::string utterance_id) {
  const RecordFile file = RecordFile::Load(path);
  const Tensor& frames = file.Get("feats");
  if (frames.rank() != 2 || frames.dim(1) != kFeatureDim)
    Fail(ErrorCode::kShapeMismatch, path.string() + ": cached features have "
                                    "shape " + ShapeToString(frames.shape()));
  return {frames, std::move(utterance_id)};
}

}  // namespace saep
