// tests/capi_test.cc


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

// Exercises libsaep through its C header only.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "saep/saep.h"

namespace fs = std::filesystem;

namespace {

fs::path Fresh(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("saep_capi_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string ReadBytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

struct Config {
  saep_config* p = nullptr;
  Config() { REQUIRE(saep_config_new(&p) == SAEP_OK); }
  ~Config() { saep_config_free(p); }
  void Set(const char* key, const char* value) {
    REQUIRE_MESSAGE(saep_config_set(p, key, value) == SAEP_OK, saep_last_error());
  }
};

void Tiny(Config& c, const char* steps) {
  c.Set("n_blocks", "1");
  c.Set("d_k", "8");
  c.Set("d_v", "8");
  c.Set("d_ff", "16");
  c.Set("fc1_dim", "16");
  c.Set("embed_dim", "12");
  c.Set("n_speakers", "3");
  c.Set("loss", "am_softmax");
  c.Set("batch_size", "4");
  c.Set("steps", steps);
  c.Set("checkpoint_every", "0");
  c.Set("lr", "0.001");
  c.Set("seed", "21");
}

fs::path SmallCorpus(const std::string& name) {
  const fs::path dir = Fresh(name);
  saep_synth_options o;
  saep_synth_options_init(&o);
  o.n_speakers = 3;
  o.utts_per_speaker = 4;
  o.duration_seconds = 0.6;
  saep_synth_report r{};
  REQUIRE(saep_synth(&o, dir.c_str(), &r) == SAEP_OK);
  CHECK(r.num_utterances == 12);
  return dir;
}

}  // namespace

TEST_CASE("capi: status names and last error") {
  CHECK(std::string(saep_status_name(SAEP_OK)) == "ok");
  CHECK(std::string(saep_status_name(SAEP_ERR_EMPTY_INPUT)) != "unknown");
  CHECK(std::string(saep_status_name(static_cast<saep_status>(99))) == "unknown");
  saep_config* c = nullptr;
  CHECK(saep_config_load("/nonexistent/run.cfg", &c) == SAEP_ERR_FILE_NOT_FOUND);
  CHECK(c == nullptr);
  CHECK(std::string(saep_last_error()).find("/nonexistent/run.cfg") != std::string::npos);
  CHECK(saep_config_new(nullptr) == SAEP_ERR_INVALID_ARGUMENT);
  CHECK(saep_eval(nullptr, nullptr, nullptr) == SAEP_ERR_INVALID_ARGUMENT);
}

TEST_CASE("capi: config keys") {
  CHECK(saep_config_key_count() == 21);
  CHECK(saep_config_key(saep_config_key_count()) == nullptr);
  Config c;
  char buf[64];
  size_t needed = 0;
  REQUIRE(saep_config_get(c.p, "d_k", buf, sizeof(buf), &needed) == SAEP_OK);
  CHECK(std::string(buf) == "512");
  CHECK(needed == 4);
  CHECK(saep_config_get(c.p, "d_k", buf, 3, nullptr) == SAEP_ERR_INVALID_ARGUMENT);
  CHECK(saep_config_get(c.p, "loss", nullptr, 0, &needed) == SAEP_OK);
  CHECK(needed == 8);  // "softmax"
  c.Set("d_k", "64");
  REQUIRE(saep_config_get(c.p, "d_k", buf, sizeof(buf), nullptr) == SAEP_OK);
  CHECK(std::string(buf) == "64");
  CHECK(saep_config_set(c.p, "bogus", "1") == SAEP_ERR_CONFIG);
  CHECK(saep_config_set(c.p, "d_k", "x") == SAEP_ERR_CONFIG);
  c.Set("d_k", "0");
  CHECK(saep_config_validate(c.p) == SAEP_ERR_CONFIG);

  saep_config* parsed = nullptr;
  CHECK(saep_config_parse("d_k = 5\nnope = 1\n", &parsed) == SAEP_ERR_CONFIG);
  CHECK(std::string(saep_last_error()).find(":2") != std::string::npos);
}

TEST_CASE("capi: count params") {
  Config c;
  saep_param_counts n{};
  REQUIRE(saep_count_params(c.p, &n) == SAEP_OK);
  CHECK(n.encoder + n.pooling + n.head_fc1 + n.head_fc2 + n.head_fc3 + n.output ==
        n.total_all);
  CHECK(n.total_all - n.output == n.total_excluding_output);
  CHECK(n.encoder + n.pooling + n.head_fc1 + n.head_fc2 == n.total_embedding_extractor);
  CHECK(n.total_embedding_extractor == 1155596);
  CHECK(n.total_excluding_output == 1315996);
  c.Set("d_k", "0");
  CHECK(saep_count_params(c.p, &n) == SAEP_ERR_CONFIG);
}

TEST_CASE("capi: cosine and eer") {
  const float a[] = {1.0f, 0.0f}, b[] = {1.0f, 1.0f}, z[] = {0.0f, 0.0f};
  double s = 0.0;
  REQUIRE(saep_cosine_score(a, b, 2, &s) == SAEP_OK);
  CHECK(s == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(saep_cosine_score(a, z, 2, &s) == SAEP_ERR_INVALID_ARGUMENT);

  const double scores[] = {0.9, 0.8, 0.2, 0.7, 0.1, 0.05};
  const int labels[] = {1, 1, 1, 0, 0, 0};
  double eer = -1.0, thr = 0.0;
  REQUIRE(saep_compute_eer(scores, labels, 6, &eer, &thr) == SAEP_OK);
  CHECK(eer == 1.0 / 3.0);
  CHECK(thr > 0.2);
  CHECK(thr <= 0.7);
  const int bad[] = {1, 2, 0, 0, 0, 0};
  CHECK(saep_compute_eer(scores, bad, 6, &eer, &thr) == SAEP_ERR_INVALID_ARGUMENT);
  CHECK(saep_compute_eer(scores, labels, 3, &eer, &thr) == SAEP_ERR_EMPTY_INPUT);
}

TEST_CASE("capi: pipeline on a small corpus") {
  const fs::path dir = SmallCorpus("pipeline");
  Config c;
  Tiny(c, "6");
  const std::string ckpt = (dir / "model.ckpt").string();
  const std::string csv = (dir / "loss.csv").string();
  saep_train_options opts;
  saep_train_options_init(&opts);
  opts.loss_csv_path = csv.c_str();
  saep_train_report r{};
  const std::string manifest = (dir / "train_manifest.txt").string();
  REQUIRE_MESSAGE(saep_train(c.p, manifest.c_str(), ckpt.c_str(), &opts, &r) == SAEP_OK,
                  saep_last_error());
  CHECK(r.start_step == 0);
  CHECK(r.end_step == 6);
  CHECK(std::isfinite(r.final_loss));
  CHECK(r.train_chunk_accuracy >= 0.0);
  CHECK(r.train_chunk_accuracy <= 1.0);
  {
    std::istringstream lines(ReadBytes(csv));
    std::string line;
    std::getline(lines, line);
    CHECK(line == "step,loss");
    int rows = 0;
    while (std::getline(lines, line)) {
      ++rows;
      CHECK(line.rfind(std::to_string(rows) + ",", 0) == 0);
    }
    CHECK(rows == 6);
  }

  saep_model* model = nullptr;
  REQUIRE(saep_model_load(ckpt.c_str(), &model) == SAEP_OK);
  CHECK(saep_model_embed_dim(model) == 12);
  std::vector<float> e1(12), e2(12);
  const std::string wav = (dir / "wav" / "spk00_utt00.wav").string();
  REQUIRE(saep_model_embed_wav(model, wav.c_str(), e1.data(), e1.size()) == SAEP_OK);
  CHECK(saep_model_embed_wav(model, wav.c_str(), e2.data(), 11) == SAEP_ERR_DIMENSION);
  std::vector<float> frames(5 * 90);
  for (std::size_t i = 0; i < frames.size(); ++i) frames[i] = std::sin(0.37f * i);
  REQUIRE(saep_model_embed_features(model, frames.data(), 5, e1.data(), 12) == SAEP_OK);
  // Reverse the frame order: same embedding.
  std::vector<float> reversed(frames.size());
  for (std::size_t t = 0; t < 5; ++t)
    std::copy_n(frames.data() + (4 - t) * 90, 90, reversed.data() + t * 90);
  REQUIRE(saep_model_embed_features(model, reversed.data(), 5, e2.data(), 12) == SAEP_OK);
  for (std::size_t k = 0; k < 12; ++k) CHECK(std::abs(e1[k] - e2[k]) <= 1e-5f);
  CHECK(saep_model_embed_features(model, frames.data(), 0, e1.data(), 12) ==
        SAEP_ERR_EMPTY_INPUT);
  saep_model_free(model);

  saep_extract_options ex;
  saep_extract_options_init(&ex);
  CHECK(ex.permute_tolerance == 1e-5);
  ex.permute_check = 1;
  saep_extract_report er{};
  const std::string all = (dir / "manifest.txt").string();
  const std::string arch = (dir / "emb.ark").string();
  const std::string arch2 = (dir / "emb2.ark").string();
  REQUIRE_MESSAGE(saep_extract(ckpt.c_str(), all.c_str(), arch.c_str(), &ex, &er) == SAEP_OK,
                  saep_last_error());
  CHECK(er.num_embeddings == 12);
  CHECK(er.max_permute_diff <= 1e-5);
  saep_set_num_threads(3);
  REQUIRE(saep_extract(ckpt.c_str(), all.c_str(), arch2.c_str(), nullptr, nullptr) == SAEP_OK);
  saep_set_num_threads(1);
  CHECK(ReadBytes(arch) == ReadBytes(arch2));

  size_t n = 0;
  const std::string trials = (dir / "trials.txt").string();
  const std::string scores = (dir / "scores.txt").string();
  REQUIRE(saep_score(arch.c_str(), trials.c_str(), scores.c_str(), &n) == SAEP_OK);
  CHECK(n > 0);
  double eer = -1.0, thr = 0.0;
  REQUIRE(saep_eval(scores.c_str(), &eer, &thr) == SAEP_OK);
  CHECK(eer >= 0.0);
  CHECK(eer <= 1.0);

  // An empty trial list is a named error.
  const fs::path empty = dir / "empty_trials.txt";
  std::ofstream(empty).close();
  CHECK(saep_score(arch.c_str(), empty.c_str(), scores.c_str(), &n) == SAEP_ERR_EMPTY_INPUT);
  CHECK(std::string(saep_last_error()).find("empty") != std::string::npos);

  // Unknown ids name the id.
  const fs::path bad = dir / "bad_trials.txt";
  std::ofstream(bad) << "1 spk00_utt00 ghost\n";
  CHECK(saep_score(arch.c_str(), bad.c_str(), scores.c_str(), &n) == SAEP_ERR_UNRESOLVED_ID);
  CHECK(std::string(saep_last_error()).find("ghost") != std::string::npos);
}

TEST_CASE("capi: init-only, resume and shape checks") {
  const fs::path dir = SmallCorpus("resume");
  const std::string manifest = (dir / "train_manifest.txt").string();
  const std::string full = (dir / "full.ckpt").string();
  const std::string half = (dir / "half.ckpt").string();
  const std::string resumed = (dir / "resumed.ckpt").string();
  const std::string init = (dir / "init.ckpt").string();

  Config c6, c3;
  Tiny(c6, "6");
  Tiny(c3, "3");
  REQUIRE(saep_train(c6.p, manifest.c_str(), full.c_str(), nullptr, nullptr) == SAEP_OK);
  REQUIRE(saep_train(c3.p, manifest.c_str(), half.c_str(), nullptr, nullptr) == SAEP_OK);
  saep_train_options opts;
  saep_train_options_init(&opts);
  opts.resume_path = half.c_str();
  saep_train_report r{};
  REQUIRE(saep_train(c6.p, manifest.c_str(), resumed.c_str(), &opts, &r) == SAEP_OK);
  CHECK(r.start_step == 3);
  CHECK(r.end_step == 6);
  CHECK(ReadBytes(full) == ReadBytes(resumed));

  saep_train_options_init(&opts);
  opts.init_only = 1;
  REQUIRE(saep_train(c6.p, nullptr, init.c_str(), &opts, &r) == SAEP_OK);
  CHECK(r.end_step == 0);
  saep_model* m = nullptr;
  REQUIRE(saep_model_load(init.c_str(), &m) == SAEP_OK);
  saep_model_free(m);

  // Resuming into a different shape fails.
  Config other;
  Tiny(other, "6");
  other.Set("d_ff", "32");
  saep_train_options_init(&opts);
  opts.resume_path = half.c_str();
  CHECK(saep_train(other.p, manifest.c_str(), resumed.c_str(), &opts, nullptr) ==
        SAEP_ERR_SHAPE_MISMATCH);
  CHECK(saep_train(c6.p, nullptr, resumed.c_str(), nullptr, nullptr) ==
        SAEP_ERR_INVALID_ARGUMENT);
}
