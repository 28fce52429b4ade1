// src/training.cc


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

#include "saep/training.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "saep/error.hpp"
#include "saep/wav.hpp"

namespace saep {
namespace {

// Stream used for weight initialisation; steps use their own index.
constexpr std::uint64_t kInitStream = ~std::uint64_t{0};

std::string ReadText(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kFileNotFound, "cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Tensor ScalarRecord(double value) {
  return Tensor({1}, static_cast<float>(value));
}

double ReadScalar(const RecordFile& records, const std::string& name) {
  const Tensor& t = records.Get(name);
  if (t.size() != 1)
    Fail(ErrorCode::kShapeMismatch, "record " + name + " should hold one value, has " +
                                        ShapeToString(t.shape()));
  return t[0];
}

std::size_t ReadCount(const RecordFile& records, const std::string& name) {
  const double v = ReadScalar(records, name);
  if (!(v >= 0.0) || v != std::floor(v))
    Fail(ErrorCode::kConfig, "record " + name + " is not a count");
  return static_cast<std::size_t>(v);
}

// A u64 as four exactly representable 16-bit pieces.
Tensor EncodeU64(std::uint64_t v) {
  Tensor t({4});
  for (std::size_t i = 0; i < 4; ++i)
    t[i] = static_cast<float>((v >> (16 * i)) & 0xffff);
  return t;
}

std::uint64_t DecodeU64(const Tensor& t, const std::string& name) {
  if (t.size() != 4)
    Fail(ErrorCode::kShapeMismatch, "record " + name + " should hold 4 values");
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    if (!(t[i] >= 0.0f && t[i] < 65536.0f) || t[i] != std::floor(t[i]))
      Fail(ErrorCode::kConfig, "record " + name + " is malformed");
    v |= static_cast<std::uint64_t>(t[i]) << (16 * i);
  }
  return v;
}

bool SameShapes(const ModelConfig& a, const ModelConfig& b) {
  return a.n_blocks == b.n_blocks && a.d_model == b.d_model && a.d_k == b.d_k &&
         a.d_v == b.d_v && a.d_ff == b.d_ff && a.fc1_dim == b.fc1_dim &&
         a.embed_dim == b.embed_dim && a.n_speakers == b.n_speakers &&
         a.loss == b.loss;
}

}  // namespace

Manifest ParseManifest(const std::string& text,
                       const std::filesystem::path& base_dir,
                       const std::string& origin) {
  Manifest manifest;
  std::set<std::string> seen;
  std::istringstream lines(text);
  std::string line;
  for (std::size_t line_no = 1; std::getline(lines, line); ++line_no) {
    std::istringstream fields(line);
    std::string utt, speaker, wav, extra;
    if (!(fields >> utt) || utt[0] == '#') continue;
    if (!(fields >> speaker >> wav) || (fields >> extra))
      Fail(ErrorCode::kConfig, origin + ":" + std::to_string(line_no) +
                                   ": expected `<utterance_id> <speaker> <wav_path>`");
    if (!seen.insert(utt).second)
      Fail(ErrorCode::kConfig, origin + ":" + std::to_string(line_no) +
                                   ": duplicate utterance id " + utt);
    std::filesystem::path path(wav);
    if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
    manifest.entries.push_back({utt, speaker, path, 0});
    manifest.label_map.emplace(speaker, 0);
  }
  if (manifest.entries.empty())
    Fail(ErrorCode::kEmptyInput, origin + ": manifest has no entries");
  int next = 0;
  for (auto& [speaker, label] : manifest.label_map) label = next++;
  for (auto& e : manifest.entries) e.label = manifest.label_map.at(e.speaker);
  return manifest;
}

Manifest LoadManifest(const std::filesystem::path& path) {
  return ParseManifest(ReadText(path), path.parent_path(), path.string());
}

void ParallelFor(std::size_t n, unsigned threads,
                 const std::function<void(std::size_t)>& work) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) work(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex error_mu;
  std::size_t error_index = n;
  std::exception_ptr error;
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i; (i = next++) < n;) {
        try {
          work(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          // Report the first failing index, as a sequential run would.
          if (i < error_index) {
            error_index = i;
            error = std::current_exception();
          }
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::vector<FeatureSequence> ComputeManifestFeatures(
    const Manifest& manifest, unsigned threads,
    const std::filesystem::path& cache_dir) {
  std::vector<FeatureSequence> out(manifest.size());
  if (!cache_dir.empty()) std::filesystem::create_directories(cache_dir);
  auto work = [&](std::size_t i) {
    const ManifestEntry& e = manifest.entries[i];
    if (!cache_dir.empty()) {
      const auto cached = cache_dir / (e.utterance_id + ".feats");
      if (std::filesystem::exists(cached)) {
        out[i] = LoadFeatureCache(cached, e.utterance_id);
        return;
      }
      out[i] = ComputeFeatures(LoadWav(e.wav_path), e.utterance_id);
      SaveFeatureCache(cached, out[i]);
      return;
    }
    out[i] = ComputeFeatures(LoadWav(e.wav_path), e.utterance_id);
  };
  ParallelFor(manifest.size(), threads, work);
  return out;
}

std::vector<SpeakerEmbedding> ExtractEmbeddings(
    const SaepModel& model, const std::vector<FeatureSequence>& features,
    unsigned threads) {
  std::vector<SpeakerEmbedding> out(features.size());
  ParallelFor(features.size(), threads,
              [&](std::size_t i) { out[i] = ExtractEmbedding(model, features[i]); });
  return out;
}

Batch MakeBatch(const Manifest& manifest,
                const std::vector<FeatureSequence>& features,
                std::size_t batch_size, Rng& rng) {
  if (manifest.entries.empty())
    Fail(ErrorCode::kEmptyInput, "make_batch: manifest is empty");
  if (features.size() != manifest.size())
    Fail(ErrorCode::kDimension, "make_batch: " + std::to_string(features.size()) +
                                    " feature sequences for " +
                                    std::to_string(manifest.size()) + " entries");
  if (batch_size == 0) Fail(ErrorCode::kInvalidArgument, "make_batch: batch_size is 0");
  Batch batch;
  batch.data = Tensor({batch_size, kChunkFrames, kFeatureDim});
  const std::size_t chunk_size = kChunkFrames * kFeatureDim;
  for (std::size_t b = 0; b < batch_size; ++b) {
    const std::size_t i = rng.UniformInt(manifest.size());
    Tensor chunk = Chunk(features[i].frames, rng);
    std::copy_n(chunk.ptr(), chunk_size, batch.data.ptr() + b * chunk_size);
    batch.labels.push_back(manifest.entries[i].label);
    batch.indices.push_back(i);
  }
  return batch;
}

void TrainConfig::Validate() const {
  if (batch_size < 1) Fail(ErrorCode::kConfig, "batch_size must be >= 1");
  if (steps < 1) Fail(ErrorCode::kConfig, "steps must be >= 1");
  if (!(adam.lr >= 0.0f) || !std::isfinite(adam.lr))
    Fail(ErrorCode::kConfig, "lr must be finite and >= 0");
  if (!(adam.beta1 >= 0.0f && adam.beta1 < 1.0f) ||
      !(adam.beta2 >= 0.0f && adam.beta2 < 1.0f))
    Fail(ErrorCode::kConfig, "Adam betas must lie in [0, 1)");
  if (!(adam.eps > 0.0f)) Fail(ErrorCode::kConfig, "Adam eps must be > 0");
}

Trainer::Trainer(const ModelConfig& model_config,
                 const TrainConfig& train_config)
    : model_(model_config, MixSeed(train_config.seed, kInitStream)),
      adam_(model_.parameters(), train_config.adam),
      train_config_(train_config) {
  train_config_.Validate();
}

Trainer::Trainer(SaepModel model, AdamState adam, std::uint64_t seed,
                 const TrainConfig& train_config)
    : model_(std::move(model)), adam_(std::move(adam)),
      train_config_(train_config) {
  train_config_.seed = seed;
  train_config_.adam = adam_.options;
  train_config_.Validate();
}

StepStats Trainer::Step(const Manifest& manifest,
                        const std::vector<FeatureSequence>& features) {
  const std::uint64_t step = adam_.step + 1;
  Rng rng(MixSeed(train_config_.seed, step));
  Batch batch = MakeBatch(manifest, features, train_config_.batch_size, rng);
  if (manifest.num_speakers() >
      static_cast<std::size_t>(model_.config().n_speakers))
    Fail(ErrorCode::kConfig, "manifest has " +
                                 std::to_string(manifest.num_speakers()) +
                                 " speakers but the model only " +
                                 std::to_string(model_.config().n_speakers) +
                                 " classes");
  StepStats stats;
  stats.step = step;
  try {
    Tape tape;
    LossResult r = ForwardLoss(tape, model_, batch.data, batch.labels,
                               Mode::kTrain, rng);
    stats.loss = r.loss.value()[0];
    stats.accuracy = static_cast<float>(r.correct) /
                     static_cast<float>(batch.labels.size());
    tape.Backward(r.loss);
    for (std::size_t i = 0; i < model_.parameters().size(); ++i) {
      const Parameter& p = model_.parameters()[i];
      if (p.has_grad && !p.grad.AllFinite())
        Fail(ErrorCode::kNonFinite, "gradient of " + p.name + " is not finite");
    }
  } catch (const Error& e) {
    model_.parameters().ZeroGrad();
    if (e.code() == ErrorCode::kNonFinite)
      Fail(ErrorCode::kNonFinite, "training step " + std::to_string(step) +
                                      ": non-finite value (" + e.what() + ")");
    throw;
  }
  AdamStep(model_.parameters(), adam_);
  return stats;
}

std::vector<StepStats> Train(Trainer& trainer, const Manifest& manifest,
                             const std::vector<FeatureSequence>& features,
                             const std::filesystem::path& checkpoint_path,
                             const StepCallback& on_step) {
  std::vector<StepStats> trace;
  const TrainConfig& cfg = trainer.train_config();
  while (trainer.step() < cfg.steps) {
    StepStats stats = trainer.Step(manifest, features);
    trace.push_back(stats);
    if (on_step) on_step(stats);
    if (!checkpoint_path.empty() && cfg.checkpoint_every > 0 &&
        stats.step % cfg.checkpoint_every == 0)
      SaveCheckpoint(trainer, checkpoint_path);
  }
  return trace;
}

double ChunkAccuracy(const SaepModel& model, const Manifest& manifest,
                     const std::vector<FeatureSequence>& features,
                     std::size_t chunks_per_utt, std::uint64_t seed) {
  if (manifest.entries.empty() || features.size() != manifest.size())
    Fail(ErrorCode::kEmptyInput, "chunk accuracy needs features for every entry");
  Rng rng(seed);
  std::size_t correct = 0, total = 0;
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    Tensor batch({chunks_per_utt, kChunkFrames, kFeatureDim});
    const std::size_t chunk_size = kChunkFrames * kFeatureDim;
    for (std::size_t c = 0; c < chunks_per_utt; ++c) {
      Tensor chunk = Chunk(features[i].frames, rng);
      std::copy_n(chunk.ptr(), chunk_size, batch.ptr() + c * chunk_size);
    }
    std::vector<int> labels(chunks_per_utt, manifest.entries[i].label);
    Tape tape;
    tape.set_grad_enabled(false);
    correct += ForwardLoss(tape, model, batch, labels, Mode::kEval, rng).correct;
    total += chunks_per_utt;
  }
  return total == 0 ? 0.0 : static_cast<double>(correct) / total;
}

void AppendModelConfig(const ModelConfig& c, RecordFile& records) {
  records.Add("cfg.n_blocks", ScalarRecord(c.n_blocks));
  records.Add("cfg.d_model", ScalarRecord(c.d_model));
  records.Add("cfg.d_k", ScalarRecord(c.d_k));
  records.Add("cfg.d_v", ScalarRecord(c.d_v));
  records.Add("cfg.d_ff", ScalarRecord(c.d_ff));
  records.Add("cfg.fc1_dim", ScalarRecord(c.fc1_dim));
  records.Add("cfg.embed_dim", ScalarRecord(c.embed_dim));
  records.Add("cfg.n_speakers", ScalarRecord(c.n_speakers));
  records.Add("cfg.encoder_dropout", Tensor({1}, c.encoder_dropout));
  records.Add("cfg.head_dropout", Tensor({1}, c.head_dropout));
  records.Add("cfg.loss", ScalarRecord(static_cast<int>(c.loss)));
  records.Add("cfg.am_scale", Tensor({1}, c.am_scale));
  records.Add("cfg.am_margin", Tensor({1}, c.am_margin));
}

ModelConfig ModelConfigFromRecords(const RecordFile& records) {
  ModelConfig c;
  c.n_blocks = static_cast<int>(ReadCount(records, "cfg.n_blocks"));
  c.d_model = static_cast<int>(ReadCount(records, "cfg.d_model"));
  c.d_k = static_cast<int>(ReadCount(records, "cfg.d_k"));
  c.d_v = static_cast<int>(ReadCount(records, "cfg.d_v"));
  c.d_ff = static_cast<int>(ReadCount(records, "cfg.d_ff"));
  c.fc1_dim = static_cast<int>(ReadCount(records, "cfg.fc1_dim"));
  c.embed_dim = static_cast<int>(ReadCount(records, "cfg.embed_dim"));
  c.n_speakers = static_cast<int>(ReadCount(records, "cfg.n_speakers"));
  c.encoder_dropout = static_cast<float>(ReadScalar(records, "cfg.encoder_dropout"));
  c.head_dropout = static_cast<float>(ReadScalar(records, "cfg.head_dropout"));
  const std::size_t loss = ReadCount(records, "cfg.loss");
  if (loss > 1) Fail(ErrorCode::kConfig, "cfg.loss holds unknown loss " + std::to_string(loss));
  c.loss = static_cast<LossKind>(loss);
  c.am_scale = static_cast<float>(ReadScalar(records, "cfg.am_scale"));
  c.am_margin = static_cast<float>(ReadScalar(records, "cfg.am_margin"));
  c.Validate();
  return c;
}

RecordFile CheckpointRecords(const Trainer& trainer) {
  RecordFile records;
  AppendModelConfig(trainer.model().config(), records);
  const ParameterSet& params = trainer.model().parameters();
  for (std::size_t i = 0; i < params.size(); ++i)
    records.Add(params[i].name, params[i].value);
  const AdamState& adam = trainer.adam();
  records.Add("opt.step", EncodeU64(adam.step));
  records.Add("opt.seed", EncodeU64(trainer.seed()));
  records.Add("opt.lr", Tensor({1}, adam.options.lr));
  records.Add("opt.beta1", Tensor({1}, adam.options.beta1));
  records.Add("opt.beta2", Tensor({1}, adam.options.beta2));
  records.Add("opt.eps", Tensor({1}, adam.options.eps));
  for (std::size_t i = 0; i < params.size(); ++i) {
    records.Add("opt.m." + params[i].name, adam.m[i]);
    records.Add("opt.v." + params[i].name, adam.v[i]);
  }
  return records;
}

void SaveCheckpoint(const Trainer& trainer, const std::filesystem::path& path) {
  CheckpointRecords(trainer).Save(path);
}

Checkpoint CheckpointFromRecords(const RecordFile& records) {
  ModelConfig config = ModelConfigFromRecords(records);
  SaepModel model(config, 0);
  ParameterSet& params = model.parameters();
  AdamState adam(params, AdamOptions{});
  auto take = [&](const std::string& name, Tensor& dst) {
    const Tensor& src = records.Get(name);
    if (src.shape() != dst.shape())
      Fail(ErrorCode::kShapeMismatch,
           "record " + name + " has shape " + ShapeToString(src.shape()) +
               " but the config implies " + ShapeToString(dst.shape()));
    dst = src;
  };
  for (std::size_t i = 0; i < params.size(); ++i) {
    take(params[i].name, params[i].value);
    take("opt.m." + params[i].name, adam.m[i]);
    take("opt.v." + params[i].name, adam.v[i]);
  }
  adam.step = DecodeU64(records.Get("opt.step"), "opt.step");
  adam.options.lr = static_cast<float>(ReadScalar(records, "opt.lr"));
  adam.options.beta1 = static_cast<float>(ReadScalar(records, "opt.beta1"));
  adam.options.beta2 = static_cast<float>(ReadScalar(records, "opt.beta2"));
  adam.options.eps = static_cast<float>(ReadScalar(records, "opt.eps"));
  const std::uint64_t seed = DecodeU64(records.Get("opt.seed"), "opt.seed");
  return Checkpoint{config, seed, std::move(model), std::move(adam)};
}

Checkpoint LoadCheckpoint(const std::filesystem::path& path) {
  return CheckpointFromRecords(RecordFile::Load(path));
}

Checkpoint LoadCheckpoint(const std::filesystem::path& path,
                          const ModelConfig& expected) {
  RecordFile records = RecordFile::Load(path);
  const ModelConfig stored = ModelConfigFromRecords(records);
  if (!SameShapes(stored, expected))
    Fail(ErrorCode::kShapeMismatch,
         path.string() + ": checkpoint config does not match the supplied config");
  return CheckpointFromRecords(records);
}

}  // namespace saep
