// saep/training.hpp


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

#ifndef SAEP_TRAINING_HPP_
#define SAEP_TRAINING_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "saep/adam.hpp"
#include "saep/features.hpp"
#include "saep/model.hpp"
#include "saep/random.hpp"
#include "saep/records.hpp"

namespace saep {

struct ManifestEntry {
  std::string utterance_id;
  std::string speaker;
  std::filesystem::path wav_path;
  int label = 0;
};

// Text manifest, one `<utterance_id> <speaker_label> <wav_path>` per line.
// Labels are dense and assigned in sorted speaker order, so two manifests
// over the same speakers agree on the mapping.
struct Manifest {
  std::vector<ManifestEntry> entries;
  std::map<std::string, int> label_map;

  std::size_t size() const { return entries.size(); }
  std::size_t num_speakers() const { return label_map.size(); }
};

// Relative wav paths are resolved against `base_dir`. Blank lines and lines
// starting with '#' are skipped.
Manifest ParseManifest(const std::string& text,
                       const std::filesystem::path& base_dir = {},
                       const std::string& origin = "<memory>");
// Relative wav paths are resolved against the manifest's directory.
Manifest LoadManifest(const std::filesystem::path& path);

// Runs work(0 .. n-1) on up to `threads` workers (0: one per core). The
// exception of the lowest failing index is rethrown after all workers end.
void ParallelFor(std::size_t n, unsigned threads,
                 const std::function<void(std::size_t)>& work);

// Features for every manifest entry, in manifest order. With a cache
// directory, each utterance is read from `<cache>/<utt_id>.feats` when
// present and written there otherwise. Work is spread over `threads`
// workers (0 means hardware concurrency).
std::vector<FeatureSequence> ComputeManifestFeatures(
    const Manifest& manifest, unsigned threads = 1,
    const std::filesystem::path& cache_dir = {});

// ExtractEmbedding over every sequence, in order.
std::vector<SpeakerEmbedding> ExtractEmbeddings(
    const SaepModel& model, const std::vector<FeatureSequence>& features,
    unsigned threads = 1);

struct Batch {
  Tensor data;  // [B, 300, 90]
  std::vector<int> labels;
  std::vector<std::size_t> indices;  // manifest rows that were drawn
};

// Uniform draws with replacement, one fresh random chunk per draw.
Batch MakeBatch(const Manifest& manifest,
                const std::vector<FeatureSequence>& features,
                std::size_t batch_size, Rng& rng);

struct TrainConfig {
  std::size_t batch_size = 32;
  std::size_t steps = 2000;
  std::uint64_t seed = 0;
  // 0 disables periodic checkpoints.
  std::size_t checkpoint_every = 500;
  AdamOptions adam;

  void Validate() const;
  bool operator==(const TrainConfig&) const = default;
};

struct StepStats {
  std::uint64_t step = 0;  // 1-based index of the step just taken
  float loss = 0.0f;
  float accuracy = 0.0f;  // fraction of the batch classified correctly
};

// Model, optimiser state and step counter. The batch and dropout draws of
// step k come from Rng(MixSeed(seed, k)), so a trainer restored from a
// checkpoint continues exactly where the original run would have been.
class Trainer {
 public:
  Trainer(const ModelConfig& model_config, const TrainConfig& train_config);
  Trainer(SaepModel model, AdamState adam, std::uint64_t seed,
          const TrainConfig& train_config);

  // Throws kNonFinite naming the step when the loss or any intermediate
  // value stops being finite; the model is left as before the step.
  StepStats Step(const Manifest& manifest,
                 const std::vector<FeatureSequence>& features);

  const SaepModel& model() const { return model_; }
  SaepModel& model() { return model_; }
  const AdamState& adam() const { return adam_; }
  const TrainConfig& train_config() const { return train_config_; }
  std::uint64_t seed() const { return train_config_.seed; }
  std::uint64_t step() const { return adam_.step; }

 private:
  SaepModel model_;
  AdamState adam_;
  TrainConfig train_config_;
};

using StepCallback = std::function<void(const StepStats&)>;

// Runs until trainer.step() == config.steps. Every checkpoint_every steps
// the checkpoint is written to `checkpoint_path` (when non-empty).
std::vector<StepStats> Train(Trainer& trainer, const Manifest& manifest,
                             const std::vector<FeatureSequence>& features,
                             const std::filesystem::path& checkpoint_path = {},
                             const StepCallback& on_step = {});

// Eval-mode accuracy over `chunks_per_utt` random 300-frame chunks of every
// manifest utterance.
double ChunkAccuracy(const SaepModel& model, const Manifest& manifest,
                     const std::vector<FeatureSequence>& features,
                     std::size_t chunks_per_utt, std::uint64_t seed);

// Checkpoint records: the parameters under their own names, the model
// config under `cfg.`, and the optimiser under `opt.` (`opt.step`,
// `opt.seed`, the Adam hyperparameters, `opt.m.<param>`, `opt.v.<param>`).
RecordFile CheckpointRecords(const Trainer& trainer);
void SaveCheckpoint(const Trainer& trainer, const std::filesystem::path& path);

struct Checkpoint {
  ModelConfig model_config;
  std::uint64_t seed = 0;
  SaepModel model;
  AdamState adam;
};

// Errors: kBadMagic, kBadVersion, kTruncated, kUnresolvedId for missing
// records, kShapeMismatch for tensors that disagree with the stored config.
Checkpoint CheckpointFromRecords(const RecordFile& records);
Checkpoint LoadCheckpoint(const std::filesystem::path& path);
// As above, and additionally kShapeMismatch when the stored model config
// differs from `expected` in any shape-determining field.
Checkpoint LoadCheckpoint(const std::filesystem::path& path,
                          const ModelConfig& expected);

// Model config as `cfg.*` scalar records and back.
void AppendModelConfig(const ModelConfig& config, RecordFile& records);
ModelConfig ModelConfigFromRecords(const RecordFile& records);

}  // namespace saep

#endif  // SAEP_TRAINING_HPP_
