// src/c_api.cc


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

#include "saep/saep.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <exception>
#include <limits>
#include <memory>
#include <new>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "saep/config.hpp"
#include "saep/error.hpp"
#include "saep/eval.hpp"
#include "saep/features.hpp"
#include "saep/random.hpp"
#include "saep/records.hpp"
#include "saep/synth.hpp"
#include "saep/training.hpp"
#include "saep/wav.hpp"

struct saep_config {
  saep::RunConfig value;
};

struct saep_model {
  saep::SaepModel value;
};

namespace {

thread_local std::string g_last_error;
std::atomic<unsigned> g_threads{1};

saep_status Record(saep_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

template <typename F>
saep_status Guard(F&& body) {
  try {
    body();
    return SAEP_OK;
  } catch (const saep::Error& e) {
    return Record(static_cast<saep_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return Record(SAEP_ERR_INTERNAL, "out of memory");
  } catch (const std::filesystem::filesystem_error& e) {
    return Record(SAEP_ERR_IO, e.what());
  } catch (const std::exception& e) {
    return Record(SAEP_ERR_INTERNAL, e.what());
  } catch (...) {
    return Record(SAEP_ERR_INTERNAL, "unknown exception");
  }
}

void Require(const void* p, const char* what) {
  if (p == nullptr)
    saep::Fail(saep::ErrorCode::kInvalidArgument, std::string(what) + " is NULL");
}

saep::FeatureSequence Shuffled(const saep::FeatureSequence& feats, std::uint64_t seed) {
  const std::size_t t = feats.num_frames(), d = saep::kFeatureDim;
  std::vector<std::size_t> order(t);
  std::iota(order.begin(), order.end(), 0);
  saep::Rng rng(seed);
  for (std::size_t i = t; i > 1; --i) std::swap(order[i - 1], order[rng.UniformInt(i)]);
  saep::FeatureSequence out{saep::Tensor({t, d}), feats.utterance_id};
  for (std::size_t i = 0; i < t; ++i)
    std::copy_n(feats.frames.ptr() + order[i] * d, d, out.frames.ptr() + i * d);
  return out;
}

void CopyEmbedding(const saep::SpeakerEmbedding& e, float* out, std::size_t out_size) {
  if (out_size < e.vector.size())
    saep::Fail(saep::ErrorCode::kDimension,
               "output holds " + std::to_string(out_size) + " floats, embedding has " +
                   std::to_string(e.vector.size()));
  std::copy(e.vector.begin(), e.vector.end(), out);
}

}  // namespace

extern "C" {

const char* saep_version(void) { return "0.1.0"; }

const char* saep_status_name(saep_status status) {
  if (status < SAEP_OK || status > SAEP_ERR_INTERNAL) return "unknown";
  return saep::ErrorCodeName(static_cast<saep::ErrorCode>(status));
}

const char* saep_last_error(void) { return g_last_error.c_str(); }

void saep_set_num_threads(unsigned threads) {
  g_threads = threads == 0 ? 1 : threads;
  Eigen::setNbThreads(static_cast<int>(g_threads.load()));
}

saep_status saep_config_new(saep_config** out) {
  return Guard([&] {
    Require(out, "out");
    *out = new saep_config{};
  });
}

saep_status saep_config_load(const char* path, saep_config** out) {
  return Guard([&] {
    Require(path, "path");
    Require(out, "out");
    *out = new saep_config{saep::LoadRunConfig(path)};
  });
}

saep_status saep_config_parse(const char* text, saep_config** out) {
  return Guard([&] {
    Require(text, "text");
    Require(out, "out");
    *out = new saep_config{saep::ParseRunConfig(text)};
  });
}

void saep_config_free(saep_config* config) { delete config; }

size_t saep_config_key_count(void) { return saep::RunConfigKeys().size(); }

const char* saep_config_key(size_t index) {
  const auto& keys = saep::RunConfigKeys();
  return index < keys.size() ? keys[index].c_str() : nullptr;
}

saep_status saep_config_set(saep_config* config, const char* key, const char* value) {
  return Guard([&] {
    Require(config, "config");
    Require(key, "key");
    Require(value, "value");
    saep::SetRunConfigValue(config->value, key, value);
  });
}

saep_status saep_config_get(const saep_config* config, const char* key, char* buffer,
                            size_t size, size_t* needed) {
  return Guard([&] {
    Require(config, "config");
    Require(key, "key");
    const std::string v = saep::GetRunConfigValue(config->value, key);
    if (needed) *needed = v.size() + 1;
    if (buffer == nullptr && size == 0) return;
    if (buffer == nullptr || size <= v.size())
      saep::Fail(saep::ErrorCode::kInvalidArgument,
                 "buffer too small for '" + std::string(key) + "'");
    std::memcpy(buffer, v.c_str(), v.size() + 1);
  });
}

saep_status saep_config_validate(const saep_config* config) {
  return Guard([&] {
    Require(config, "config");
    config->value.Validate();
  });
}

void saep_synth_options_init(saep_synth_options* options) {
  if (options == nullptr) return;
  const saep::SynthOptions d;
  options->n_speakers = d.n_speakers;
  options->utts_per_speaker = d.utts_per_speaker;
  options->seed = d.seed;
  options->duration_seconds = d.duration_seconds;
  options->snr_db = d.snr_db;
}

saep_status saep_synth(const saep_synth_options* options, const char* out_dir,
                       saep_synth_report* report) {
  return Guard([&] {
    Require(options, "options");
    Require(out_dir, "out_dir");
    saep::SynthOptions o;
    o.n_speakers = options->n_speakers;
    o.utts_per_speaker = options->utts_per_speaker;
    o.seed = options->seed;
    o.duration_seconds = options->duration_seconds;
    o.snr_db = options->snr_db;
    const saep::SynthCorpus corpus = saep::GenerateCorpus(o, out_dir);
    if (report) {
      report->num_utterances = corpus.num_utterances;
      report->num_targets = corpus.num_targets;
      report->num_nontargets = corpus.num_nontargets;
    }
  });
}

void saep_train_options_init(saep_train_options* options) {
  if (options == nullptr) return;
  *options = saep_train_options{};
  options->accuracy_chunks = 4;
}

saep_status saep_train(const saep_config* config, const char* manifest,
                       const char* out_checkpoint, const saep_train_options* options,
                       saep_train_report* report) {
  return Guard([&] {
    Require(config, "config");
    Require(out_checkpoint, "out_checkpoint");
    saep_train_options opts;
    saep_train_options_init(&opts);
    if (options) opts = *options;
    config->value.Validate();
    const saep::RunConfig& cfg = config->value;

    std::unique_ptr<saep::Trainer> trainer;
    if (opts.resume_path) {
      saep::Checkpoint ck = saep::LoadCheckpoint(opts.resume_path, cfg.model);
      trainer = std::make_unique<saep::Trainer>(std::move(ck.model), std::move(ck.adam),
                                                ck.seed, cfg.train);
    } else {
      trainer = std::make_unique<saep::Trainer>(cfg.model, cfg.train);
    }
    saep_train_report r{trainer->step(), trainer->step(),
                        std::numeric_limits<double>::quiet_NaN(),
                        std::numeric_limits<double>::quiet_NaN()};
    if (opts.init_only) {
      saep::SaveCheckpoint(*trainer, out_checkpoint);
      if (report) *report = r;
      return;
    }
    Require(manifest, "manifest");
    const saep::Manifest m = saep::LoadManifest(manifest);
    const auto features = saep::ComputeManifestFeatures(
        m, g_threads, opts.feature_cache_dir ? opts.feature_cache_dir : "");

    std::unique_ptr<std::FILE, int (*)(std::FILE*)> csv(nullptr, &std::fclose);
    if (opts.loss_csv_path) {
      csv.reset(std::fopen(opts.loss_csv_path, "w"));
      if (!csv)
        saep::Fail(saep::ErrorCode::kIo, std::string("cannot write ") + opts.loss_csv_path);
      std::fputs("step,loss\n", csv.get());
    }
    saep::Train(*trainer, m, features, out_checkpoint, [&](const saep::StepStats& s) {
      if (csv) std::fprintf(csv.get(), "%llu,%.8g\n", static_cast<unsigned long long>(s.step), s.loss);
      r.final_loss = s.loss;
      if (opts.on_step) opts.on_step(s.step, s.loss, s.accuracy, opts.user);
    });
    if (csv && std::fflush(csv.get()) != 0)
      saep::Fail(saep::ErrorCode::kIo, std::string("write failed: ") + opts.loss_csv_path);
    saep::SaveCheckpoint(*trainer, out_checkpoint);
    r.end_step = trainer->step();
    if (opts.accuracy_chunks > 0)
      r.train_chunk_accuracy = saep::ChunkAccuracy(trainer->model(), m, features,
                                                   opts.accuracy_chunks,
                                                   saep::MixSeed(trainer->seed(), 0));
    if (report) *report = r;
  });
}

saep_status saep_model_load(const char* checkpoint, saep_model** out) {
  return Guard([&] {
    Require(checkpoint, "checkpoint");
    Require(out, "out");
    *out = new saep_model{saep::LoadCheckpoint(checkpoint).model};
  });
}

void saep_model_free(saep_model* model) { delete model; }

size_t saep_model_embed_dim(const saep_model* model) {
  return model ? static_cast<size_t>(model->value.config().embed_dim) : 0;
}

saep_status saep_model_embed_features(const saep_model* model, const float* frames,
                                      size_t num_frames, float* out, size_t out_size) {
  return Guard([&] {
    Require(model, "model");
    Require(out, "out");
    if (num_frames > 0) Require(frames, "frames");
    saep::FeatureSequence feats{saep::Tensor({num_frames, saep::kFeatureDim}), ""};
    if (num_frames > 0)
      std::copy_n(frames, num_frames * saep::kFeatureDim, feats.frames.ptr());
    CopyEmbedding(saep::ExtractEmbedding(model->value, feats), out, out_size);
  });
}

saep_status saep_model_embed_wav(const saep_model* model, const char* wav_path,
                                 float* out, size_t out_size) {
  return Guard([&] {
    Require(model, "model");
    Require(wav_path, "wav_path");
    Require(out, "out");
    const auto feats = saep::ComputeFeatures(saep::LoadWav(wav_path), wav_path);
    CopyEmbedding(saep::ExtractEmbedding(model->value, feats), out, out_size);
  });
}

void saep_extract_options_init(saep_extract_options* options) {
  if (options == nullptr) return;
  *options = saep_extract_options{};
  options->permute_tolerance = 1e-5;
}

saep_status saep_extract(const char* checkpoint, const char* manifest,
                         const char* out_archive, const saep_extract_options* options,
                         saep_extract_report* report) {
  return Guard([&] {
    Require(checkpoint, "checkpoint");
    Require(manifest, "manifest");
    Require(out_archive, "out_archive");
    saep_extract_options opts;
    saep_extract_options_init(&opts);
    if (options) opts = *options;
    const saep::SaepModel model = saep::LoadCheckpoint(checkpoint).model;
    const saep::Manifest m = saep::LoadManifest(manifest);
    const auto features = saep::ComputeManifestFeatures(
        m, g_threads, opts.feature_cache_dir ? opts.feature_cache_dir : "");
    const auto embeddings = saep::ExtractEmbeddings(model, features, g_threads);

    double max_diff = 0.0;
    if (opts.permute_check) {
      std::vector<double> diff(features.size(), 0.0);
      saep::ParallelFor(features.size(), g_threads, [&](std::size_t i) {
        const auto shuffled = saep::ExtractEmbedding(
            model, Shuffled(features[i], saep::MixSeed(opts.permute_seed, i)));
        for (std::size_t k = 0; k < shuffled.vector.size(); ++k)
          diff[i] = std::max(diff[i], static_cast<double>(std::abs(
                                          shuffled.vector[k] - embeddings[i].vector[k])));
      });
      const auto worst = std::max_element(diff.begin(), diff.end());
      max_diff = worst == diff.end() ? 0.0 : *worst;
      if (max_diff > opts.permute_tolerance) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.3g > %.3g", max_diff, opts.permute_tolerance);
        saep::Fail(saep::ErrorCode::kContract,
                   "permute check failed on " +
                       m.entries[static_cast<std::size_t>(worst - diff.begin())].utterance_id +
                       ": max coordinate change " + buf);
      }
    }

    saep::RecordFile archive;
    for (const auto& e : embeddings) {
      saep::Tensor t({e.vector.size()});
      std::copy(e.vector.begin(), e.vector.end(), t.ptr());
      archive.Add(e.utterance_id, std::move(t));
    }
    archive.Save(out_archive);
    if (report) {
      report->num_embeddings = embeddings.size();
      report->max_permute_diff = max_diff;
    }
  });
}

saep_status saep_cosine_score(const float* a, const float* b, size_t dim, double* out) {
  return Guard([&] {
    Require(a, "a");
    Require(b, "b");
    Require(out, "out");
    *out = saep::CosineScore({a, dim}, {b, dim});
  });
}

saep_status saep_score(const char* embeddings, const char* trials, const char* out_scores,
                       size_t* num_trials) {
  return Guard([&] {
    Require(embeddings, "embeddings");
    Require(trials, "trials");
    Require(out_scores, "out_scores");
    const auto list = saep::LoadTrialList(trials);
    const auto archive = saep::RecordFile::Load(embeddings);
    saep::EmbeddingTable table;
    for (const auto& r : archive.records)
      table[r.name].assign(r.tensor.ptr(), r.tensor.ptr() + r.tensor.size());
    const auto scores = saep::ScoreTrials(list, table);
    saep::SaveScores(scores, out_scores);
    if (num_trials) *num_trials = scores.size();
  });
}

saep_status saep_compute_eer(const double* scores, const int* labels, size_t count,
                             double* eer, double* threshold) {
  return Guard([&] {
    if (count > 0) {
      Require(scores, "scores");
      Require(labels, "labels");
    }
    std::vector<saep::ScoredTrial> trials(count);
    for (size_t i = 0; i < count; ++i) {
      if (labels[i] != 0 && labels[i] != 1)
        saep::Fail(saep::ErrorCode::kInvalidArgument,
                   "label " + std::to_string(labels[i]) + " at index " +
                       std::to_string(i) + " is not 0 or 1");
      trials[i].score = scores[i];
      trials[i].label = labels[i];
    }
    const saep::EerResult r = saep::ComputeEer(trials);
    if (eer) *eer = r.eer;
    if (threshold) *threshold = r.threshold;
  });
}

saep_status saep_eval(const char* scores, double* eer, double* threshold) {
  return Guard([&] {
    Require(scores, "scores");
    const saep::EerResult r = saep::ComputeEer(saep::LoadScores(scores));
    if (eer) *eer = r.eer;
    if (threshold) *threshold = r.threshold;
  });
}

saep_status saep_count_params(const saep_config* config, saep_param_counts* out) {
  return Guard([&] {
    Require(config, "config");
    Require(out, "out");
    config->value.model.Validate();
    const saep::ParamBreakdown b = saep::CountParams(config->value.model);
    out->encoder = b.encoder;
    out->pooling = b.pooling;
    out->head_fc1 = b.head_fc1;
    out->head_fc2 = b.head_fc2;
    out->head_fc3 = b.head_fc3;
    out->output = b.output;
    out->total_all = b.Total(saep::ParamConvention::kAll);
    out->total_excluding_output = b.Total(saep::ParamConvention::kExcludingOutput);
    out->total_embedding_extractor = b.Total(saep::ParamConvention::kEmbeddingExtractor);
  });
}

}  // extern "C"
