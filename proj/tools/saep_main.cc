// tools/saep_main.cc


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

// Command-line front end. Everything goes through the C API in saep/saep.h.

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include "CLI11.hpp"
#include "saep/saep.h"

namespace {

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
};

void AddGlobals(CLI::App& app, Globals& g) {
  app.add_option("--config", g.config, "Run config file (key = value lines)");
  app.add_option("--seed", g.seed,
                 "Seed; overrides the config seed (train), the corpus seed (synth) "
                 "or the shuffle seed (extract --permute-check)")
      ->default_str("config / 7 / 0");
  app.add_option("--threads", g.threads, "Worker threads for feature and embedding extraction")
      ->check(CLI::PositiveNumber);
}

int Report(saep_status status) {
  if (status == SAEP_OK) return 0;
  std::fprintf(stderr, "error: %s: %s\n", saep_status_name(status), saep_last_error());
  return 1;
}

struct ConfigHandle {
  saep_config* p = nullptr;
  ~ConfigHandle() { saep_config_free(p); }
};

saep_status LoadConfig(const Globals& g, const std::vector<std::string>& overrides,
                       ConfigHandle& out) {
  saep_status st = g.config.empty() ? saep_config_new(&out.p)
                                    : saep_config_load(g.config.c_str(), &out.p);
  if (st != SAEP_OK) return st;
  for (const std::string& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "error: --set expects key=value, got '%s'\n", kv.c_str());
      return SAEP_ERR_CONFIG;
    }
    st = saep_config_set(out.p, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str());
    if (st != SAEP_OK) return st;
  }
  if (g.seed) {
    st = saep_config_set(out.p, "seed", std::to_string(*g.seed).c_str());
    if (st != SAEP_OK) return st;
  }
  return saep_config_validate(out.p);
}

const char* OrNull(const std::string& s) { return s.empty() ? nullptr : s.c_str(); }

struct ProgressState {
  std::uint64_t every = 0;
};

void PrintProgress(std::uint64_t step, double loss, double accuracy, void* user) {
  const auto* state = static_cast<ProgressState*>(user);
  if (state->every > 0 && step % state->every == 0)
    std::fprintf(stderr, "step %" PRIu64 " loss %.4f batch_acc %.3f\n", step, loss,
                 accuracy);
}

}  // namespace

int main(int argc, char** argv) {
#if defined(__GLIBC__)
  // Training allocates and frees the same large activations every step;
  // keeping them on the heap avoids repeated mmap/munmap and page faults.
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
#endif

  CLI::App app{"SAEP speaker embeddings: synthetic corpus, training, extraction, scoring"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  Globals g;
  AddGlobals(app, g);

  // synth
  auto* synth = app.add_subcommand("synth", "Generate the synthetic toy corpus");
  AddGlobals(*synth, g);
  std::string synth_out;
  saep_synth_options synth_opts;
  saep_synth_options_init(&synth_opts);
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--speakers", synth_opts.n_speakers, "Number of speakers");
  synth->add_option("--utts", synth_opts.utts_per_speaker, "Utterances per speaker");
  synth->add_option("--duration", synth_opts.duration_seconds, "Utterance length in seconds");
  synth->add_option("--snr", synth_opts.snr_db, "Signal-to-noise ratio in dB");

  // train
  auto* train = app.add_subcommand("train", "Train a model and write a checkpoint");
  AddGlobals(*train, g);
  std::string train_manifest, train_out, loss_csv, resume, train_cache;
  std::vector<std::string> train_set;
  bool init_only = false;
  std::size_t accuracy_chunks = 4;
  ProgressState progress{100};
  train->add_option("--manifest", train_manifest, "Training manifest");
  train->add_option("--out", train_out, "Checkpoint to write")->required();
  train->add_option("--loss-csv", loss_csv, "Write the loss trace (step,loss) here");
  train->add_option("--resume", resume, "Continue from this checkpoint");
  train->add_flag("--init-only", init_only, "Write the initialised model without training");
  train->add_option("--feature-cache", train_cache, "Feature cache directory");
  train->add_option("--accuracy-chunks", accuracy_chunks,
                    "Chunks per utterance for the final train accuracy (0 skips it)");
  train->add_option("--log-every", progress.every, "Print progress every N steps (0: never)");
  train->add_option("--set", train_set, "Override a config key (key=value), repeatable")
      ->default_str("none");

  // extract
  auto* extract = app.add_subcommand("extract", "Extract one embedding per manifest utterance");
  AddGlobals(*extract, g);
  std::string ex_ckpt, ex_manifest, ex_out, ex_cache;
  saep_extract_options ex_opts;
  saep_extract_options_init(&ex_opts);
  bool permute_check = false;
  extract->add_option("--checkpoint", ex_ckpt, "Model checkpoint")->required();
  extract->add_option("--manifest", ex_manifest, "Manifest of utterances")->required();
  extract->add_option("--out", ex_out, "Embedding archive to write")->required();
  extract->add_option("--feature-cache", ex_cache, "Feature cache directory");
  extract->add_flag("--permute-check", permute_check,
                    "Also embed frame-shuffled features and fail if any coordinate moves");
  extract->add_option("--permute-tolerance", ex_opts.permute_tolerance,
                      "Largest allowed change under --permute-check");

  // score
  auto* score = app.add_subcommand("score", "Cosine-score a trial list");
  AddGlobals(*score, g);
  std::string sc_emb, sc_trials, sc_out;
  score->add_option("--embeddings", sc_emb, "Embedding archive")->required();
  score->add_option("--trials", sc_trials, "Trial list")->required();
  score->add_option("--out", sc_out, "Score file to write")->required();

  // eval
  auto* eval = app.add_subcommand("eval", "Equal error rate of a score file");
  AddGlobals(*eval, g);
  std::string ev_scores;
  eval->add_option("--scores", ev_scores, "Score file")->required();

  // count-params
  auto* count = app.add_subcommand("count-params", "Parameter counts for a config");
  AddGlobals(*count, g);
  std::vector<std::string> count_set;
  count->add_option("--set", count_set, "Override a config key (key=value), repeatable")
      ->default_str("none");

  // Every flag shows a default in --help, including the ones without a value.
  for (CLI::App* sub : app.get_subcommands({})) {
    for (CLI::Option* opt : sub->get_options({})) {
      if (opt->get_name() == "--help" || !opt->get_default_str().empty() ||
          opt->get_name() == "--seed")
        continue;
      opt->default_str(opt->get_expected_min() == 0 ? "off" : "none");
    }
  }
  for (CLI::Option* opt : app.get_options({}))
    if (opt->get_name() == "--config") opt->default_str("none");

  CLI11_PARSE(app, argc, argv);
  saep_set_num_threads(g.threads);

  if (*synth) {
    if (g.seed) synth_opts.seed = *g.seed;
    saep_synth_report r{};
    if (int rc = Report(saep_synth(&synth_opts, synth_out.c_str(), &r))) return rc;
    std::printf("utterances=%zu targets=%zu nontargets=%zu\n", r.num_utterances,
                r.num_targets, r.num_nontargets);
    return 0;
  }

  if (*train) {
    ConfigHandle cfg;
    if (int rc = Report(LoadConfig(g, train_set, cfg))) return rc;
    saep_train_options opts;
    saep_train_options_init(&opts);
    opts.resume_path = OrNull(resume);
    opts.loss_csv_path = OrNull(loss_csv);
    opts.feature_cache_dir = OrNull(train_cache);
    opts.init_only = init_only ? 1 : 0;
    opts.accuracy_chunks = accuracy_chunks;
    opts.on_step = &PrintProgress;
    opts.user = &progress;
    saep_train_report r{};
    if (int rc = Report(saep_train(cfg.p, OrNull(train_manifest), train_out.c_str(), &opts, &r)))
      return rc;
    std::printf("steps=%" PRIu64 "..%" PRIu64, r.start_step, r.end_step);
    if (!std::isnan(r.final_loss)) std::printf(" final_loss=%.6f", r.final_loss);
    if (!std::isnan(r.train_chunk_accuracy))
      std::printf(" train_chunk_accuracy=%.4f", r.train_chunk_accuracy);
    std::printf("\n");
    return 0;
  }

  if (*extract) {
    ex_opts.feature_cache_dir = OrNull(ex_cache);
    ex_opts.permute_check = permute_check ? 1 : 0;
    ex_opts.permute_seed = g.seed.value_or(0);
    saep_extract_report r{};
    const saep_status st =
        saep_extract(ex_ckpt.c_str(), ex_manifest.c_str(), ex_out.c_str(), &ex_opts, &r);
    if (int rc = Report(st)) return rc;
    std::printf("embeddings=%zu", r.num_embeddings);
    if (permute_check) std::printf(" max_permute_diff=%.3g", r.max_permute_diff);
    std::printf("\n");
    return 0;
  }

  if (*score) {
    std::size_t n = 0;
    if (int rc = Report(saep_score(sc_emb.c_str(), sc_trials.c_str(), sc_out.c_str(), &n)))
      return rc;
    std::printf("trials=%zu\n", n);
    return 0;
  }

  if (*eval) {
    double eer = 0.0, threshold = 0.0;
    if (int rc = Report(saep_eval(ev_scores.c_str(), &eer, &threshold))) return rc;
    std::printf("EER=%.2f threshold=%.6f\n", 100.0 * eer, threshold);
    return 0;
  }

  if (*count) {
    ConfigHandle cfg;
    if (int rc = Report(LoadConfig(g, count_set, cfg))) return rc;
    saep_param_counts c{};
    if (int rc = Report(saep_count_params(cfg.p, &c))) return rc;
    const std::pair<const char*, std::uint64_t> rows[] = {
        {"encoder", c.encoder},   {"pooling", c.pooling},   {"head_fc1", c.head_fc1},
        {"head_fc2", c.head_fc2}, {"head_fc3", c.head_fc3}, {"output", c.output},
    };
    for (const auto& [name, n] : rows) std::printf("%-28s %12" PRIu64 "\n", name, n);
    std::printf("%-28s %12" PRIu64 "\n", "total_all", c.total_all);
    std::printf("%-28s %12" PRIu64 "\n", "total_excluding_output", c.total_excluding_output);
    std::printf("%-28s %12" PRIu64 "\n", "total_embedding_extractor",
                c.total_embedding_extractor);
    return 0;
  }
  return 0;
}
