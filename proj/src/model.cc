// src/model.cc


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

#include "saep/model.hpp"

#include <algorithm>
#include <cmath>

#include "saep/error.hpp"
#include "saep/ops.hpp"

namespace saep {
namespace {

std::size_t Dim(int v) { return static_cast<std::size_t>(v); }

// [B, T, d_in] -> [B, T, d_out] via a [d_in, d_out] weight.
Var Linear3(Tape& tape, Var x, Parameter& w) {
  return MatMul(x, tape.Param(w));
}

Var Dense(Tape& tape, Var x, Parameter& w, Parameter& b) {
  return AddBias(MatMul(x, tape.Param(w)), tape.Param(b));
}

Var AsBatch(Var x) {
  if (x.shape().size() == 2) return Reshape(x, {1, x.shape()[0], x.shape()[1]});
  if (x.shape().size() != 3)
    Fail(ErrorCode::kDimension, "expected [B, T, d] input, got " +
                                    ShapeToString(x.shape()));
  return x;
}

void CheckWidth(Var x, std::size_t width, const char* what) {
  if (x.shape().empty() || x.shape().back() != width)
    Fail(ErrorCode::kDimension, std::string(what) + ": input " +
                                    ShapeToString(x.shape()) +
                                    " does not have width " +
                                    std::to_string(width));
}

Tensor XavierUniform(std::size_t fan_in, std::size_t fan_out, Shape shape,
                     Rng& rng) {
  const double bound = std::sqrt(6.0 / double(fan_in + fan_out));
  Tensor t(std::move(shape));
  for (float& v : t.data()) v = static_cast<float>(rng.Uniform(-bound, bound));
  return t;
}

}  // namespace

const char* LossKindName(LossKind loss) {
  return loss == LossKind::kAmSoftmax ? "am_softmax" : "softmax";
}

LossKind ParseLossKind(const std::string& name) {
  if (name == "softmax") return LossKind::kSoftmax;
  if (name == "am_softmax" || name == "amsoftmax") return LossKind::kAmSoftmax;
  Fail(ErrorCode::kConfig, "unknown loss '" + name +
                               "' (expected softmax or am_softmax)");
}

void ModelConfig::Validate() const {
  auto positive = [](int v, const char* name) {
    if (v < 1)
      Fail(ErrorCode::kConfig,
           std::string(name) + " must be >= 1, got " + std::to_string(v));
  };
  positive(n_blocks, "n_blocks");
  positive(d_model, "d_model");
  positive(d_k, "d_k");
  positive(d_v, "d_v");
  positive(d_ff, "d_ff");
  positive(fc1_dim, "fc1_dim");
  positive(embed_dim, "embed_dim");
  positive(n_speakers, "n_speakers");
  auto rate = [](float v, const char* name) {
    if (!(v >= 0.0f && v < 1.0f))
      Fail(ErrorCode::kConfig,
           std::string(name) + " must lie in [0, 1), got " + std::to_string(v));
  };
  rate(encoder_dropout, "encoder_dropout");
  rate(head_dropout, "head_dropout");
  if (!(am_scale > 0.0f))
    Fail(ErrorCode::kConfig, "am_scale must be > 0");
  if (!(am_margin >= 0.0f))
    Fail(ErrorCode::kConfig, "am_margin must be >= 0");
}

Qkv QkvProject(Tape& tape, Var x, const EncoderBlockParams& p) {
  x = AsBatch(x);
  CheckWidth(x, p.w_q->value.dim(0), "qkv_project");
  return {Linear3(tape, x, *p.w_q), Linear3(tape, x, *p.w_k),
          Linear3(tape, x, *p.w_v)};
}

Attention ScaledDotAttention(Var q, Var k, Var v) {
  q = AsBatch(q);
  k = AsBatch(k);
  v = AsBatch(v);
  if (q.shape()[2] != k.shape()[2])
    Fail(ErrorCode::kDimension, "attention: query width " +
                                    ShapeToString(q.shape()) +
                                    " differs from key width " +
                                    ShapeToString(k.shape()));
  const float scale = 1.0f / std::sqrt(static_cast<float>(q.shape()[2]));
  Var scores = Scale(BatchMatMul(q, Transpose(k)), scale);
  Var weights = SoftmaxRows(scores);
  return {BatchMatMul(weights, v), weights};
}

Var PositionFfn(Tape& tape, Var h, const EncoderBlockParams& p) {
  h = AsBatch(h);
  CheckWidth(h, p.w_1->value.dim(0), "position_ffn");
  Var hidden = Relu(AddBias(Linear3(tape, h, *p.w_1), tape.Param(*p.b_1)));
  return AddBias(Linear3(tape, hidden, *p.w_2), tape.Param(*p.b_2));
}

Var EncoderBlock(Tape& tape, Var x, const EncoderBlockParams& p, float dropout,
                 Mode mode, Rng& rng, std::vector<Var>* weights_out) {
  x = AsBatch(x);
  const bool train = mode == Mode::kTrain;
  Qkv qkv = QkvProject(tape, x, p);
  Attention attn = ScaledDotAttention(qkv.q, qkv.k, qkv.v);
  if (weights_out) weights_out->push_back(attn.weights);
  Var projected = Linear3(tape, attn.output, *p.w_o);
  Var s1 = LayerNorm(Add(x, Dropout(projected, dropout, train, rng)),
                     tape.Param(*p.ln1_gain), tape.Param(*p.ln1_bias));
  Var ffn = PositionFfn(tape, s1, p);
  return LayerNorm(Add(s1, Dropout(ffn, dropout, train, rng)),
                   tape.Param(*p.ln2_gain), tape.Param(*p.ln2_bias));
}

Var Encode(Tape& tape, Var x, std::span<const EncoderBlockParams> blocks,
           float dropout, Mode mode, Rng& rng, std::vector<Var>* weights_out) {
  if (blocks.empty())
    Fail(ErrorCode::kConfig, "encoder needs at least one block");
  for (const EncoderBlockParams& block : blocks)
    x = EncoderBlock(tape, x, block, dropout, mode, rng, weights_out);
  return x;
}

Pooled AttentionPool(Tape& tape, Var h, const PoolingParams& p) {
  h = AsBatch(h);
  const std::size_t d = p.w_c->value.size();
  CheckWidth(h, d, "attention_pool");
  const std::size_t batch = h.shape()[0], frames = h.shape()[1];
  Var w_c = Reshape(tape.Param(*p.w_c), {d, 1});
  Var scores = MatMul(Reshape(h, {batch * frames, d}), w_c);
  Var weights = SoftmaxRows(Reshape(scores, {batch, 1, frames}));
  Var pooled = Reshape(BatchMatMul(weights, h), {batch, d});
  return {pooled, weights};
}

HeadOutput HeadForward(Tape& tape, Var pooled, const HeadParams& p,
                       const ModelConfig& config, Mode mode, Rng& rng) {
  CheckWidth(pooled, p.fc1_w->value.dim(0), "head_forward");
  if (pooled.shape().size() == 1) pooled = Reshape(pooled, {1, pooled.shape()[0]});
  const bool train = mode == Mode::kTrain;
  const float rate = config.head_dropout;
  Var h1 = Dropout(Relu(Dense(tape, pooled, *p.fc1_w, *p.fc1_b)), rate, train,
                   rng);
  Var embedding = Relu(Dense(tape, h1, *p.fc2_w, *p.fc2_b));
  Var h2 = Dropout(embedding, rate, train, rng);
  Var features =
      Dropout(Relu(Dense(tape, h2, *p.fc3_w, *p.fc3_b)), rate, train, rng);
  Var logits;
  if (config.loss == LossKind::kAmSoftmax) {
    Var cos = MatMul(L2NormalizeRows(features),
                     L2NormalizeColumns(tape.Param(*p.out_w)));
    logits = Scale(cos, config.am_scale);
  } else {
    logits = Dense(tape, features, *p.out_w, *p.out_b);
  }
  return {logits, embedding, features};
}

Var AmSoftmaxLoss(Var features, std::span<const int> labels, Var w_out,
                  float scale, float margin) {
  if (!(scale > 0.0f) || !(margin >= 0.0f))
    Fail(ErrorCode::kInvalidArgument, "am_softmax needs s > 0 and m >= 0");
  Var cos = MatMul(L2NormalizeRows(features), L2NormalizeColumns(w_out));
  const std::size_t batch = cos.shape()[0], classes = cos.shape()[1];
  if (labels.size() != batch)
    Fail(ErrorCode::kDimension, "am_softmax: " + std::to_string(labels.size()) +
                                    " labels for batch of " +
                                    std::to_string(batch));
  Tensor shift({batch, classes});
  for (std::size_t b = 0; b < batch; ++b) {
    if (labels[b] < 0 || static_cast<std::size_t>(labels[b]) >= classes)
      Fail(ErrorCode::kIndex, "am_softmax: label " + std::to_string(labels[b]) +
                                  " outside [0, " + std::to_string(classes) +
                                  ")");
    shift.at(b, static_cast<std::size_t>(labels[b])) = -margin;
  }
  Var logits = Scale(Add(cos, features.tape()->Constant(std::move(shift))), scale);
  return CrossEntropy(logits, labels);
}

SaepModel::SaepModel(const ModelConfig& config, std::uint64_t seed)
    : config_(config) {
  config_.Validate();
  Rng rng(seed);
  const std::size_t dm = Dim(config_.d_model), dk = Dim(config_.d_k),
                    dv = Dim(config_.d_v), dff = Dim(config_.d_ff),
                    fc1 = Dim(config_.fc1_dim), emb = Dim(config_.embed_dim),
                    spk = Dim(config_.n_speakers);
  auto matrix = [&](const std::string& name, std::size_t rows,
                    std::size_t cols) {
    params_.Add(name, XavierUniform(rows, cols, {rows, cols}, rng));
  };
  auto vector = [&](const std::string& name, std::size_t n, float fill) {
    params_.Add(name, Tensor({n}, fill));
  };
  for (int b = 0; b < config_.n_blocks; ++b) {
    const std::string pre = "encoder." + std::to_string(b) + ".";
    matrix(pre + "w_q", dm, dk);
    matrix(pre + "w_k", dm, dk);
    matrix(pre + "w_v", dm, dv);
    matrix(pre + "w_o", dv, dm);
    matrix(pre + "ffn.w_1", dm, dff);
    vector(pre + "ffn.b_1", dff, 0.0f);
    matrix(pre + "ffn.w_2", dff, dm);
    vector(pre + "ffn.b_2", dm, 0.0f);
    vector(pre + "ln1.gain", dm, 1.0f);
    vector(pre + "ln1.bias", dm, 0.0f);
    vector(pre + "ln2.gain", dm, 1.0f);
    vector(pre + "ln2.bias", dm, 0.0f);
  }
  params_.Add("pool.w_c", XavierUniform(dm, 1, {dm}, rng));
  matrix("head.fc1.weight", dm, fc1);
  vector("head.fc1.bias", fc1, 0.0f);
  matrix("head.fc2.weight", fc1, emb);
  vector("head.fc2.bias", emb, 0.0f);
  matrix("head.fc3.weight", emb, emb);
  vector("head.fc3.bias", emb, 0.0f);
  matrix("output.weight", emb, spk);
  if (config_.loss == LossKind::kSoftmax) vector("output.bias", spk, 0.0f);
  Bind();
}

void SaepModel::Bind() {
  blocks_.clear();
  for (int b = 0; b < config_.n_blocks; ++b) {
    const std::string pre = "encoder." + std::to_string(b) + ".";
    EncoderBlockParams p;
    p.w_q = &params_.Get(pre + "w_q");
    p.w_k = &params_.Get(pre + "w_k");
    p.w_v = &params_.Get(pre + "w_v");
    p.w_o = &params_.Get(pre + "w_o");
    p.w_1 = &params_.Get(pre + "ffn.w_1");
    p.b_1 = &params_.Get(pre + "ffn.b_1");
    p.w_2 = &params_.Get(pre + "ffn.w_2");
    p.b_2 = &params_.Get(pre + "ffn.b_2");
    p.ln1_gain = &params_.Get(pre + "ln1.gain");
    p.ln1_bias = &params_.Get(pre + "ln1.bias");
    p.ln2_gain = &params_.Get(pre + "ln2.gain");
    p.ln2_bias = &params_.Get(pre + "ln2.bias");
    blocks_.push_back(p);
  }
  pooling_.w_c = &params_.Get("pool.w_c");
  head_.fc1_w = &params_.Get("head.fc1.weight");
  head_.fc1_b = &params_.Get("head.fc1.bias");
  head_.fc2_w = &params_.Get("head.fc2.weight");
  head_.fc2_b = &params_.Get("head.fc2.bias");
  head_.fc3_w = &params_.Get("head.fc3.weight");
  head_.fc3_b = &params_.Get("head.fc3.bias");
  head_.out_w = &params_.Get("output.weight");
  head_.out_b = params_.Find("output.bias");
}

ModelOutput SaepModel::Forward(Tape& tape, Var x, Mode mode, Rng& rng) const {
  x = AsBatch(x);
  CheckWidth(x, Dim(config_.d_model), "model input");
  if (x.shape()[1] == 0)
    Fail(ErrorCode::kEmptyInput, "model input has no frames");
  ModelOutput out;
  Var encoded = Encode(tape, x, blocks_, config_.encoder_dropout, mode, rng,
                       &out.attention_weights);
  out.pool = AttentionPool(tape, encoded, pooling_);
  out.head = HeadForward(tape, out.pool.pooled, head_, config_, mode, rng);
  return out;
}

LossResult ForwardLoss(Tape& tape, const SaepModel& model, const Tensor& batch,
                       std::span<const int> labels, Mode mode, Rng& rng) {
  if (batch.rank() != 3 || batch.dim(0) != labels.size())
    Fail(ErrorCode::kDimension, "forward_loss: batch " +
                                    ShapeToString(batch.shape()) + " with " +
                                    std::to_string(labels.size()) + " labels");
  ModelOutput out = model.Forward(tape, tape.Constant(batch), mode, rng);
  const ModelConfig& cfg = model.config();
  LossResult result;
  result.logits = out.head.logits;
  if (cfg.loss == LossKind::kAmSoftmax) {
    result.loss = AmSoftmaxLoss(out.head.features, labels,
                                tape.Param(*model.head().out_w), cfg.am_scale,
                                cfg.am_margin);
  } else {
    result.loss = CrossEntropy(out.head.logits, labels);
  }
  const Tensor& logits = out.head.logits.value();
  const std::size_t classes = logits.dim(1);
  for (std::size_t b = 0; b < labels.size(); ++b) {
    const float* row = logits.ptr() + b * classes;
    const auto best = std::max_element(row, row + classes) - row;
    if (best == labels[b]) ++result.correct;
  }
  return result;
}

SpeakerEmbedding ExtractEmbedding(const SaepModel& model,
                                  const FeatureSequence& feats) {
  if (feats.num_frames() == 0)
    Fail(ErrorCode::kEmptyInput,
         "cannot embed empty utterance '" + feats.utterance_id + "'");
  Tape tape;
  tape.set_grad_enabled(false);
  Rng unused(0);
  ModelOutput out =
      model.Forward(tape, tape.Constant(feats.frames), Mode::kEval, unused);
  const Tensor& e = out.head.embedding.value();
  return {std::vector<float>(e.data().begin(), e.data().end()),
          feats.utterance_id};
}

const char* ParamConventionName(ParamConvention convention) {
  switch (convention) {
    case ParamConvention::kAll: return "all";
    case ParamConvention::kExcludingOutput: return "excluding-output";
    case ParamConvention::kEmbeddingExtractor: return "embedding-extractor";
  }
  return "?";
}

std::uint64_t ParamBreakdown::Total(ParamConvention convention) const {
  std::uint64_t total = encoder + pooling + head_fc1 + head_fc2;
  if (convention == ParamConvention::kEmbeddingExtractor) return total;
  total += head_fc3;
  if (convention == ParamConvention::kExcludingOutput) return total;
  return total + output;
}

ParamBreakdown CountParams(const ModelConfig& c) {
  c.Validate();
  const std::uint64_t dm = Dim(c.d_model), dk = Dim(c.d_k), dv = Dim(c.d_v),
                      dff = Dim(c.d_ff), fc1 = Dim(c.fc1_dim),
                      emb = Dim(c.embed_dim), spk = Dim(c.n_speakers);
  ParamBreakdown b;
  const std::uint64_t per_block = 2 * dm * dk + 2 * dm * dv +
                                  (dm * dff + dff) + (dff * dm + dm) + 4 * dm;
  b.encoder = per_block * static_cast<std::uint64_t>(c.n_blocks);
  b.pooling = dm;
  b.head_fc1 = dm * fc1 + fc1;
  b.head_fc2 = fc1 * emb + emb;
  b.head_fc3 = emb * emb + emb;
  b.output = emb * spk + (c.loss == LossKind::kSoftmax ? spk : 0);
  return b;
}

ParamBreakdown CountParams(const SaepModel& model) {
  ParamBreakdown b;
  const ParameterSet& params = model.parameters();
  for (std::size_t i = 0; i < params.size(); ++i) {
    const std::string& name = params[i].name;
    const std::uint64_t n = params[i].value.size();
    if (name.starts_with("encoder.")) b.encoder += n;
    else if (name.starts_with("pool.")) b.pooling += n;
    else if (name.starts_with("head.fc1.")) b.head_fc1 += n;
    else if (name.starts_with("head.fc2.")) b.head_fc2 += n;
    else if (name.starts_with("head.fc3.")) b.head_fc3 += n;
    else b.output += n;
  }
  return b;
}

}  // namespace saep
