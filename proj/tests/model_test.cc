// tests/model_test.cc


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
#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "saep/error.hpp"
#include "saep/gradcheck.hpp"
#include "saep/model.hpp"
#include "saep/ops.hpp"
#include "test_util.hpp"

using namespace saep;
using saep::testing::RandomTensor;

namespace {

ModelConfig TinyConfig(LossKind loss = LossKind::kSoftmax) {
  ModelConfig c;
  c.n_blocks = 1;
  c.d_model = 6;
  c.d_k = 4;
  c.d_v = 4;
  c.d_ff = 8;
  c.embed_dim = 5;
  c.n_speakers = 3;
  c.loss = loss;
  return c;
}

// Brute-force [M x K] . [K x N] in double.
std::vector<double> NaiveMatMul(const Tensor& a, const Tensor& b) {
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  std::vector<double> out(m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t p = 0; p < k; ++p)
        out[i * n + j] += double(a.at(i, p)) * b.at(p, j);
  return out;
}

Tensor PermuteRows(const Tensor& x, const std::vector<std::size_t>& perm) {
  Tensor out(x.shape());
  const std::size_t w = x.dim(1);
  for (std::size_t i = 0; i < perm.size(); ++i)
    std::copy_n(x.ptr() + perm[i] * w, w, out.ptr() + i * w);
  return out;
}

std::vector<std::size_t> RandomPermutation(std::size_t n, Rng& rng) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng.UniformInt(i)]);
  return perm;
}

void Set(Parameter* p, float value) { p->value.Fill(value); }

}  // namespace

TEST_CASE("qkv_project") {
  ModelConfig cfg = TinyConfig();
  cfg.d_k = cfg.d_model;
  SaepModel model(cfg, 1);
  const EncoderBlockParams& p = model.blocks()[0];
  Rng rng(2);
  SUBCASE("identity W_Q") {
    Set(p.w_q, 0.0f);
    for (std::size_t i = 0; i < 6; ++i) p.w_q->value.at(i, i) = 1.0f;
    Tensor x = RandomTensor({5, 6}, rng);
    Tape tape;
    Qkv qkv = QkvProject(tape, tape.Constant(x), p);
    CHECK(qkv.q.value().Reshaped({5, 6}) == x);
  }
  SUBCASE("single row by hand") {
    Tensor x = RandomTensor({1, 6}, rng);
    Tape tape;
    Qkv qkv = QkvProject(tape, tape.Constant(x), p);
    for (std::size_t j = 0; j < 6; ++j) {
      double acc = 0.0;
      for (std::size_t i = 0; i < 6; ++i) acc += double(x[i]) * p.w_q->value.at(i, j);
      CHECK(std::abs(qkv.q.value()[j] - acc) < 1e-6);
    }
  }
  SUBCASE("random input vs brute-force matmul") {
    ModelConfig c = TinyConfig();
    c.d_model = 4;
    SaepModel m(c, 3);
    const EncoderBlockParams& bp = m.blocks()[0];
    Tensor x = RandomTensor({3, 4}, rng);
    Tape tape;
    Qkv qkv = QkvProject(tape, tape.Constant(x), bp);
    const Tensor* outs[] = {&qkv.q.value(), &qkv.k.value(), &qkv.v.value()};
    const Parameter* ws[] = {bp.w_q, bp.w_k, bp.w_v};
    for (int i = 0; i < 3; ++i) {
      auto expected = NaiveMatMul(x, ws[i]->value);
      for (std::size_t e = 0; e < expected.size(); ++e)
        CHECK(std::abs((*outs[i])[e] - expected[e]) < 1e-6);
    }
  }
  SUBCASE("width mismatch") {
    Tape tape;
    CHECK_THROWS_AS(QkvProject(tape, tape.Constant(Tensor({3, 5})), p), Error);
  }
}

TEST_CASE("scaled_dot_attention") {
  Rng rng(4);
  Tape tape;
  SUBCASE("zero queries average the values") {
    Tensor v = RandomTensor({1, 5, 3}, rng);
    Attention a = ScaledDotAttention(tape.Constant(Tensor({1, 5, 2})),
                                     tape.Constant(RandomTensor({1, 5, 2}, rng)),
                                     tape.Constant(v));
    for (std::size_t j = 0; j < 3; ++j) {
      double mean = 0.0;
      for (std::size_t t = 0; t < 5; ++t) mean += v[t * 3 + j];
      mean /= 5;
      for (std::size_t t = 0; t < 5; ++t)
        CHECK(std::abs(a.output.value()[t * 3 + j] - mean) < 1e-6);
    }
  }
  SUBCASE("single position returns V") {
    Tensor v = RandomTensor({1, 1, 4}, rng);
    Attention a = ScaledDotAttention(tape.Constant(RandomTensor({1, 1, 2}, rng)),
                                     tape.Constant(RandomTensor({1, 1, 2}, rng)),
                                     tape.Constant(v));
    CHECK(a.output.value() == v);
  }
  SUBCASE("two positions, scalar oracle") {
    Tensor v({1, 2, 2}, std::vector<float>{1.0f, 2.0f, -3.0f, 5.0f});
    Attention a = ScaledDotAttention(
        tape.Constant(Tensor({1, 2, 1}, std::vector<float>{1, 1})),
        tape.Constant(Tensor({1, 2, 1}, std::vector<float>{10, -10})),
        tape.Constant(v));
    // Each query scores the keys at 10 and -10 (d_k = 1): weight on position
    // 0 is 1 / (1 + e^-20).
    const double w0 = 1.0 / (1.0 + std::exp(-20.0));
    for (std::size_t t = 0; t < 2; ++t) {
      CHECK(std::abs(a.weights.value()[t * 2] - w0) < 1e-7);
      for (std::size_t j = 0; j < 2; ++j) {
        const double expected = w0 * v[j] + (1.0 - w0) * v[2 + j];
        CHECK(std::abs(a.output.value()[t * 2 + j] - expected) < 1e-6);
      }
    }
  }
}

TEST_CASE("position_ffn") {
  SaepModel model(TinyConfig(), 5);
  const EncoderBlockParams& p = model.blocks()[0];
  Rng rng(6);
  Tensor x = RandomTensor({7, 6}, rng);
  SUBCASE("zero weights") {
    Set(p.w_1, 0.0f);
    Set(p.w_2, 0.0f);
    Tape tape;
    for (float v : PositionFfn(tape, tape.Constant(x), p).value().data())
      CHECK(v == 0.0f);
  }
  SUBCASE("row permutation commutes") {
    Set(p.b_1, 0.1f);
    Set(p.b_2, -0.2f);
    auto perm = RandomPermutation(7, rng);
    Tape tape;
    Tensor y = PositionFfn(tape, tape.Constant(x), p).value().Reshaped({7, 6});
    Tensor yp = PositionFfn(tape, tape.Constant(PermuteRows(x, perm)), p)
                    .value()
                    .Reshaped({7, 6});
    Tensor expected = PermuteRows(y, perm);
    for (std::size_t i = 0; i < yp.size(); ++i)
      CHECK(std::abs(yp[i] - expected[i]) < 1e-6);
  }
  SUBCASE("matches a direct loop evaluation") {
    for (float& b : p.b_1->value.data()) b = static_cast<float>(rng.Normal());
    for (float& b : p.b_2->value.data()) b = static_cast<float>(rng.Normal());
    Tape tape;
    Tensor y = PositionFfn(tape, tape.Constant(x), p).value();
    for (std::size_t t = 0; t < 7; ++t) {
      std::vector<double> hidden(8);
      for (std::size_t h = 0; h < 8; ++h) {
        double acc = p.b_1->value[h];
        for (std::size_t i = 0; i < 6; ++i) acc += double(x.at(t, i)) * p.w_1->value.at(i, h);
        hidden[h] = std::max(acc, 0.0);
      }
      for (std::size_t j = 0; j < 6; ++j) {
        double acc = p.b_2->value[j];
        for (std::size_t h = 0; h < 8; ++h) acc += hidden[h] * p.w_2->value.at(h, j);
        CHECK(std::abs(y[t * 6 + j] - acc) < 1e-6);
      }
    }
  }
}

TEST_CASE("encoder_block and encode") {
  Rng rng(7);
  SUBCASE("zero weights stay finite and shape-preserving") {
    SaepModel model(TinyConfig(), 8);
    for (std::size_t i = 0; i < model.parameters().size(); ++i) {
      Parameter& p = model.parameters()[i];
      if (p.name.find("gain") == std::string::npos) p.value.Fill(0.0f);
    }
    Tensor x = RandomTensor({1, 5, 6}, rng);
    Tape tape;
    Var y = EncoderBlock(tape, tape.Constant(x), model.blocks()[0], 0.1f,
                         Mode::kEval, rng);
    CHECK(y.shape() == Shape{1, 5, 6});
    CHECK(y.value().AllFinite());
    // With every sub-layer output zero the block is LN(LN(x)).
    Var ones = tape.Constant(Tensor({6}, 1.0f)), zeros = tape.Constant(Tensor({6}));
    Var twice = LayerNorm(LayerNorm(tape.Constant(x), ones, zeros), ones, zeros);
    for (std::size_t i = 0; i < x.size(); ++i)
      CHECK(std::abs(y.value()[i] - twice.value()[i]) < 1e-5);
  }
  SUBCASE("shape sweep") {
    ModelConfig cfg = TinyConfig();
    cfg.n_blocks = 2;
    SaepModel model(cfg, 9);
    for (std::size_t frames : {1, 7, 300}) {
      Tape tape;
      Var y = Encode(tape, tape.Constant(RandomTensor({2, frames, 6}, rng)),
                     model.blocks(), 0.1f, Mode::kTrain, rng);
      CHECK(y.shape() == Shape{2, frames, 6});
    }
  }
  SUBCASE("permutation equivariance in eval mode") {
    SaepModel model(TinyConfig(), 10);
    for (int trial = 0; trial < 10; ++trial) {
      Tensor x = RandomTensor({9, 6}, rng);
      auto perm = RandomPermutation(9, rng);
      Tape tape;
      Tensor y = EncoderBlock(tape, tape.Constant(x), model.blocks()[0], 0.1f,
                              Mode::kEval, rng)
                     .value()
                     .Reshaped({9, 6});
      Tensor yp = EncoderBlock(tape, tape.Constant(PermuteRows(x, perm)),
                               model.blocks()[0], 0.1f, Mode::kEval, rng)
                      .value()
                      .Reshaped({9, 6});
      Tensor expected = PermuteRows(y, perm);
      for (std::size_t i = 0; i < yp.size(); ++i)
        CHECK(std::abs(yp[i] - expected[i]) < 1e-5);
    }
  }
  SUBCASE("encode composes blocks") {
    ModelConfig cfg = TinyConfig();
    cfg.n_blocks = 2;
    SaepModel model(cfg, 11);
    Tensor x = RandomTensor({1, 4, 6}, rng);
    Tape tape;
    Var one = Encode(tape, tape.Constant(x), model.blocks().subspan(0, 1), 0.0f,
                     Mode::kEval, rng);
    Var single = EncoderBlock(tape, tape.Constant(x), model.blocks()[0], 0.0f,
                              Mode::kEval, rng);
    CHECK(one.value() == single.value());
    Var two = Encode(tape, tape.Constant(x), model.blocks(), 0.0f, Mode::kEval, rng);
    Var chained = EncoderBlock(tape, single, model.blocks()[1], 0.0f,
                               Mode::kEval, rng);
    CHECK(two.value() == chained.value());
  }
  SUBCASE("train mode applies dropout") {
    SaepModel model(TinyConfig(), 12);
    Tensor x = RandomTensor({1, 6, 6}, rng);
    Tape tape;
    Rng a(1), b(2);
    Tensor ya = EncoderBlock(tape, tape.Constant(x), model.blocks()[0], 0.5f,
                             Mode::kTrain, a).value();
    Tensor yb = EncoderBlock(tape, tape.Constant(x), model.blocks()[0], 0.5f,
                             Mode::kTrain, b).value();
    CHECK_FALSE(ya == yb);
  }
}

TEST_CASE("attention_pool") {
  SaepModel model(TinyConfig(), 13);
  const PoolingParams& p = model.pooling();
  Rng rng(14);
  SUBCASE("zero query gives the column mean") {
    Set(p.w_c, 0.0f);
    Tensor h = RandomTensor({1, 6, 6}, rng);
    Tape tape;
    Tensor c = AttentionPool(tape, tape.Constant(h), p).pooled.value();
    for (std::size_t j = 0; j < 6; ++j) {
      double mean = 0.0;
      for (std::size_t t = 0; t < 6; ++t) mean += h[t * 6 + j];
      CHECK(std::abs(c[j] - mean / 6) < 1e-6);
    }
  }
  SUBCASE("single frame") {
    Tensor h = RandomTensor({1, 1, 6}, rng);
    Tape tape;
    CHECK(AttentionPool(tape, tape.Constant(h), p).pooled.value() ==
          h.Reshaped({1, 6}));
  }
  SUBCASE("convex combination bounds") {
    for (int trial = 0; trial < 30; ++trial) {
      for (float& w : p.w_c->value.data()) w = static_cast<float>(3.0 * rng.Normal());
      const std::size_t frames = 1 + rng.UniformInt(20);
      Tensor h = RandomTensor({2, frames, 6}, rng, 4.0);
      Tape tape;
      Pooled out = AttentionPool(tape, tape.Constant(h), p);
      for (std::size_t b = 0; b < 2; ++b)
        for (std::size_t j = 0; j < 6; ++j) {
          float lo = INFINITY, hi = -INFINITY;
          for (std::size_t t = 0; t < frames; ++t) {
            lo = std::min(lo, h[(b * frames + t) * 6 + j]);
            hi = std::max(hi, h[(b * frames + t) * 6 + j]);
          }
          const float c = out.pooled.value()[b * 6 + j];
          CHECK(c >= lo - 1e-5f);
          CHECK(c <= hi + 1e-5f);
        }
    }
  }
}

TEST_CASE("head_forward") {
  SaepModel model(ModelConfig{}, 15);
  Rng rng(16);
  Tensor c = RandomTensor({3, 90}, rng);
  Tape tape;
  HeadOutput a = HeadForward(tape, tape.Constant(c), model.head(),
                             model.config(), Mode::kEval, rng);
  HeadOutput b = HeadForward(tape, tape.Constant(c), model.head(),
                             model.config(), Mode::kEval, rng);
  CHECK(a.logits.value() == b.logits.value());
  CHECK(a.embedding.value() == b.embedding.value());
  CHECK(a.embedding.shape() == Shape{3, 400});
  CHECK(a.logits.shape() == Shape{3, 1211});
  for (float v : a.embedding.value().data()) CHECK(v >= 0.0f);
}

TEST_CASE("am_softmax_loss") {
  Rng rng(17);
  SUBCASE("zero margin equals cross-entropy on scaled cosines") {
    for (int trial = 0; trial < 20; ++trial) {
      Tensor f = RandomTensor({4, 5}, rng);
      Tensor w = RandomTensor({5, 3}, rng);
      std::vector<int> labels = {0, 2, 1, 2};
      Tape tape;
      Var am = AmSoftmaxLoss(tape.Constant(f), labels, tape.Constant(w), 30.0f, 0.0f);
      // Independent route: normalise in double, then a scalar log-sum-exp.
      double expected = 0.0;
      for (std::size_t b = 0; b < 4; ++b) {
        double fn = 0.0;
        for (std::size_t k = 0; k < 5; ++k) fn += double(f.at(b, k)) * f.at(b, k);
        std::vector<double> logits(3);
        for (std::size_t c = 0; c < 3; ++c) {
          double wn = 0.0, dot = 0.0;
          for (std::size_t k = 0; k < 5; ++k) {
            wn += double(w.at(k, c)) * w.at(k, c);
            dot += double(f.at(b, k)) * w.at(k, c);
          }
          logits[c] = 30.0 * dot / std::sqrt(fn * wn);
        }
        const double mx = *std::max_element(logits.begin(), logits.end());
        double z = 0.0;
        for (double l : logits) z += std::exp(l - mx);
        expected += std::log(z) + mx - logits[labels[b]];
      }
      expected /= 4;
      CHECK(std::abs(am.value()[0] - expected) < 1e-5 * std::max(1.0, expected));
    }
  }
  SUBCASE("two-class scalar oracle") {
    // Feature along class 0's column, class 1 orthogonal: logits (s(1-m), 0).
    Tensor f = Tensor::Matrix(1, 2, {2.0f, 0.0f});
    Tensor w = Tensor::Matrix(2, 2, {1.0f, 0.0f, 0.0f, 3.0f});
    std::vector<int> labels = {0};
    Tape tape;
    Var loss = AmSoftmaxLoss(tape.Constant(f), labels, tape.Constant(w), 30.0f, 0.4f);
    const double expected = std::log1p(std::exp(-30.0 * 0.6));
    CHECK(std::abs(loss.value()[0] - expected) < 1e-9);
  }
  SUBCASE("invariant to feature scaling") {
    Tensor f = RandomTensor({3, 4}, rng);
    Tensor w = RandomTensor({4, 5}, rng);
    Tensor f10 = f;
    for (float& v : f10.data()) v *= 10.0f;
    std::vector<int> labels = {4, 0, 1};
    Tape tape;
    const float a =
        AmSoftmaxLoss(tape.Constant(f), labels, tape.Constant(w), 30.0f, 0.4f).value()[0];
    const float b =
        AmSoftmaxLoss(tape.Constant(f10), labels, tape.Constant(w), 30.0f, 0.4f).value()[0];
    CHECK(std::abs(a - b) < 1e-5);
  }
}

TEST_CASE("forward_loss") {
  Rng rng(18);
  SUBCASE("untrained loss near log C") {
    ModelConfig cfg;
    cfg.n_speakers = 4;
    cfg.d_k = cfg.d_v = 64;
    cfg.d_ff = 256;
    SaepModel model(cfg, 19);
    std::vector<int> labels = {2};
    Tape tape;
    LossResult r = ForwardLoss(tape, model, RandomTensor({1, 300, 90}, rng),
                               labels, Mode::kTrain, rng);
    CHECK(std::abs(r.loss.value()[0] - std::log(4.0)) < 0.5);
  }
  SUBCASE("finite across seeds") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      SaepModel model(TinyConfig(seed % 2 ? LossKind::kAmSoftmax : LossKind::kSoftmax),
                      seed);
      Rng r(seed);
      std::vector<int> labels = {0, 2};
      Tape tape;
      LossResult out = ForwardLoss(tape, model, RandomTensor({2, 7, 6}, r, 3.0),
                                   labels, Mode::kTrain, r);
      CHECK(std::isfinite(out.loss.value()[0]));
    }
  }
  SUBCASE("end-to-end gradient check, tiny config") {
    for (LossKind loss : {LossKind::kSoftmax, LossKind::kAmSoftmax}) {
      SaepModel model(TinyConfig(loss), 20);
      // Zero-initialised biases can leave ReLU inputs exactly on the kink,
      // where finite differences are meaningless; move to a generic point.
      for (std::size_t i = 0; i < model.parameters().size(); ++i)
        for (float& v : model.parameters()[i].value.data())
          v += static_cast<float>(0.3 * rng.Normal());
      Tensor batch = RandomTensor({2, 7, 6}, rng);
      std::vector<int> labels = {1, 2};
      auto f = [&](Tape& tape) {
        Rng dropout(99);
        return ForwardLoss(tape, model, batch, labels, Mode::kTrain, dropout).loss;
      };
      GradCheckOptions options;
      options.retry_step = 2.5e-4f;
      auto report = GradientCheckParams(f, model.parameters(), options);
      CHECK_MESSAGE(report.passed, report.Describe());
    }
  }
  SUBCASE("label count mismatch") {
    SaepModel model(TinyConfig(), 21);
    std::vector<int> labels = {0};
    Tape tape;
    CHECK_THROWS_AS(ForwardLoss(tape, model, Tensor({2, 3, 6}), labels,
                                Mode::kEval, rng),
                    Error);
  }
}

TEST_CASE("extract_embedding") {
  ModelConfig cfg;
  cfg.d_k = cfg.d_v = 64;
  cfg.d_ff = 256;
  SaepModel model(cfg, 22);
  Rng rng(23);
  FeatureSequence feats{RandomTensor({120, 90}, rng), "u1"};
  SpeakerEmbedding a = ExtractEmbedding(model, feats);
  SpeakerEmbedding b = ExtractEmbedding(model, feats);
  CHECK(a.vector == b.vector);
  CHECK(a.vector.size() == 400);
  CHECK(a.utterance_id == "u1");
  FeatureSequence shuffled{PermuteRows(feats.frames, RandomPermutation(120, rng)), "u1"};
  SpeakerEmbedding c = ExtractEmbedding(model, shuffled);
  for (std::size_t i = 0; i < 400; ++i) CHECK(std::abs(c.vector[i] - a.vector[i]) < 1e-5);
  CHECK_THROWS_AS(ExtractEmbedding(model, FeatureSequence{Tensor(), "empty"}), Error);
}

TEST_CASE("count_params") {
  SUBCASE("closed form agrees with instantiated tensors") {
    for (LossKind loss : {LossKind::kSoftmax, LossKind::kAmSoftmax}) {
      ModelConfig cfg = TinyConfig(loss);
      cfg.n_blocks = 3;
      SaepModel model(cfg, 1);
      ParamBreakdown a = CountParams(cfg), b = CountParams(model);
      CHECK(a.encoder == b.encoder);
      CHECK(a.pooling == b.pooling);
      CHECK(a.head_fc1 == b.head_fc1);
      CHECK(a.head_fc2 == b.head_fc2);
      CHECK(a.head_fc3 == b.head_fc3);
      CHECK(a.output == b.output);
      CHECK(a.Total(ParamConvention::kAll) == model.parameters().NumElements());
    }
  }
  SUBCASE("a lone d_m x d_k matrix counts d_m * d_k") {
    ParameterSet params;
    params.Add("w_q", Tensor({90, 512}));
    CHECK(params.NumElements() == 90u * 512u);
  }
  SUBCASE("default configuration by hand") {
    // Per block: 4 * 90 * 512 attention + (90*2048 + 2048) + (2048*90 + 90)
    // FFN + 4 * 90 layer norm = 555458.
    ParamBreakdown b = CountParams(ModelConfig{});
    CHECK(b.encoder == 2u * 555458u);
    CHECK(b.pooling == 90u);
    CHECK(b.head_fc1 == 90u * 90u + 90u);
    CHECK(b.head_fc2 == 90u * 400u + 400u);
    CHECK(b.head_fc3 == 400u * 400u + 400u);
    CHECK(b.Total(ParamConvention::kEmbeddingExtractor) == 1155596u);
    CHECK(b.Total(ParamConvention::kExcludingOutput) == 1315996u);
  }
}
