// saep/model.hpp


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

#ifndef SAEP_MODEL_HPP_
#define SAEP_MODEL_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "saep/autograd.hpp"
#include "saep/features.hpp"
#include "saep/random.hpp"

namespace saep {

enum class LossKind { kSoftmax = 0, kAmSoftmax = 1 };
enum class Mode { kTrain, kEval };

const char* LossKindName(LossKind loss);
// Accepts "softmax" and "am_softmax"; throws kConfig otherwise.
LossKind ParseLossKind(const std::string& name);

struct ModelConfig {
  int n_blocks = 2;
  int d_model = 90;
  int d_k = 512;
  int d_v = 512;
  int d_ff = 2048;
  int fc1_dim = 90;
  int embed_dim = 400;
  int n_speakers = 1211;
  float encoder_dropout = 0.1f;
  float head_dropout = 0.2f;
  LossKind loss = LossKind::kSoftmax;
  float am_scale = 30.0f;
  float am_margin = 0.4f;

  // Throws kConfig naming the first offending field.
  void Validate() const;
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// Views into a ParameterSet; the set owns the storage.
struct EncoderBlockParams {
  Parameter* w_q = nullptr;  // d_model x d_k
  Parameter* w_k = nullptr;  // d_model x d_k
  Parameter* w_v = nullptr;  // d_model x d_v
  Parameter* w_o = nullptr;  // d_v x d_model
  Parameter* w_1 = nullptr;  // d_model x d_ff
  Parameter* b_1 = nullptr;  // d_ff
  Parameter* w_2 = nullptr;  // d_ff x d_model
  Parameter* b_2 = nullptr;  // d_model
  Parameter* ln1_gain = nullptr;
  Parameter* ln1_bias = nullptr;
  Parameter* ln2_gain = nullptr;
  Parameter* ln2_bias = nullptr;
};

struct PoolingParams {
  Parameter* w_c = nullptr;  // d_model
};

struct HeadParams {
  Parameter* fc1_w = nullptr;  // d_model x fc1_dim
  Parameter* fc1_b = nullptr;
  Parameter* fc2_w = nullptr;  // fc1_dim x embed_dim
  Parameter* fc2_b = nullptr;
  Parameter* fc3_w = nullptr;  // embed_dim x embed_dim
  Parameter* fc3_b = nullptr;
  Parameter* out_w = nullptr;  // embed_dim x n_speakers
  Parameter* out_b = nullptr;  // softmax loss only
};

struct Qkv {
  Var q, k, v;
};

// Q = X W_Q, K = X W_K, V = X W_V for X of shape [B, T, d_model].
Qkv QkvProject(Tape& tape, Var x, const EncoderBlockParams& p);

struct Attention {
  Var output;   // [B, T, d_v]
  Var weights;  // [B, T, T], row-stochastic
};

// softmax(Q K^T / sqrt(d_k)) V, batched over the leading axis.
Attention ScaledDotAttention(Var q, Var k, Var v);

// max(0, h W_1 + b_1) W_2 + b_2 applied at every position of [B, T, d].
Var PositionFfn(Tape& tape, Var h, const EncoderBlockParams& p);

// S = LN(X + drop(Attn(X) W_O)); out = LN(S + drop(FFN(S))).
// Appends the attention weights to `weights_out` when given.
Var EncoderBlock(Tape& tape, Var x, const EncoderBlockParams& p,
                 float dropout, Mode mode, Rng& rng,
                 std::vector<Var>* weights_out = nullptr);

Var Encode(Tape& tape, Var x, std::span<const EncoderBlockParams> blocks,
           float dropout, Mode mode, Rng& rng,
           std::vector<Var>* weights_out = nullptr);

struct Pooled {
  Var pooled;   // [B, d_model]
  Var weights;  // [B, 1, T]
};

// C = softmax(w_c H^T) H per sequence; a convex combination of frames.
Pooled AttentionPool(Tape& tape, Var h, const PoolingParams& p);

struct HeadOutput {
  Var logits;     // [B, n_speakers]; s * cos for the AM-softmax head
  Var embedding;  // [B, embed_dim], FC2 after ReLU, before dropout
  Var features;   // [B, embed_dim], input to the output layer
};

HeadOutput HeadForward(Tape& tape, Var pooled, const HeadParams& p,
                       const ModelConfig& config, Mode mode, Rng& rng);

// Rows of `features` and columns of `w_out` are L2-normalised; the true
// class logit becomes s (cos - m), the others s cos; mean cross-entropy.
Var AmSoftmaxLoss(Var features, std::span<const int> labels, Var w_out,
                  float scale, float margin);

struct ModelOutput {
  HeadOutput head;
  Pooled pool;
  std::vector<Var> attention_weights;  // one per block
};

class SaepModel {
 public:
  // Xavier-uniform matrices, zero biases, unit layer-norm gains.
  SaepModel(const ModelConfig& config, std::uint64_t seed);
  SaepModel(SaepModel&&) = default;
  SaepModel& operator=(SaepModel&&) = default;

  const ModelConfig& config() const { return config_; }
  ParameterSet& parameters() { return params_; }
  const ParameterSet& parameters() const { return params_; }
  std::span<const EncoderBlockParams> blocks() const { return blocks_; }
  const PoolingParams& pooling() const { return pooling_; }
  const HeadParams& head() const { return head_; }

  // x: [B, T, d_model] (a rank-2 [T, d_model] input is treated as B = 1).
  ModelOutput Forward(Tape& tape, Var x, Mode mode, Rng& rng) const;

 private:
  void Bind();

  ModelConfig config_;
  ParameterSet params_;
  std::vector<EncoderBlockParams> blocks_;
  PoolingParams pooling_;
  HeadParams head_;
};

struct LossResult {
  Var loss;
  Var logits;
  std::size_t correct = 0;  // argmax(logits) == label
};

// Encoder, pooling and head over a [B, T, 90] batch, then the configured
// loss.
LossResult ForwardLoss(Tape& tape, const SaepModel& model, const Tensor& batch,
                       std::span<const int> labels, Mode mode, Rng& rng);

struct SpeakerEmbedding {
  std::vector<float> vector;
  std::string utterance_id;
};

// Full-length eval-mode forward to the FC2 activation. Errors: kEmptyInput.
SpeakerEmbedding ExtractEmbedding(const SaepModel& model,
                                  const FeatureSequence& feats);

enum class ParamConvention {
  kAll,                // every trainable tensor
  kExcludingOutput,    // drops the speaker-dependent output layer
  kEmbeddingExtractor  // encoder + pooling + FC1 + FC2: what computes the
                       // embedding
};

const char* ParamConventionName(ParamConvention convention);

struct ParamBreakdown {
  std::uint64_t encoder = 0;
  std::uint64_t pooling = 0;
  std::uint64_t head_fc1 = 0;
  std::uint64_t head_fc2 = 0;
  std::uint64_t head_fc3 = 0;
  std::uint64_t output = 0;

  std::uint64_t Total(ParamConvention convention) const;
};

// Closed form from the configuration.
ParamBreakdown CountParams(const ModelConfig& config);
// Sum of element counts of the instantiated tensors.
ParamBreakdown CountParams(const SaepModel& model);

}  // namespace saep

#endif  // SAEP_MODEL_HPP_
