// saep/saep.h


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

/* C interface to libsaep. Every call returns a saep_status; on failure the
 * message is available from saep_last_error() on the same thread until the
 * next failing call there. Handles are opaque and owned by the caller. */
#ifndef SAEP_SAEP_H_
#define SAEP_SAEP_H_

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(__GNUC__)
#define SAEP_API __attribute__((visibility("default")))
#else
#define SAEP_API
#endif

typedef enum saep_status {
  SAEP_OK = 0,
  SAEP_ERR_INVALID_ARGUMENT = 1,
  SAEP_ERR_DIMENSION = 2,
  SAEP_ERR_INDEX = 3,
  SAEP_ERR_CONTRACT = 4,
  SAEP_ERR_NON_FINITE = 5,
  SAEP_ERR_FILE_NOT_FOUND = 6,
  SAEP_ERR_IO = 7,
  SAEP_ERR_UNSUPPORTED_FORMAT = 8,
  SAEP_ERR_CHANNEL_COUNT = 9,
  SAEP_ERR_TOO_SHORT = 10,
  SAEP_ERR_BAD_MAGIC = 11,
  SAEP_ERR_BAD_VERSION = 12,
  SAEP_ERR_TRUNCATED = 13,
  SAEP_ERR_SHAPE_MISMATCH = 14,
  SAEP_ERR_UNRESOLVED_ID = 15,
  SAEP_ERR_EMPTY_INPUT = 16,
  SAEP_ERR_CONFIG = 17,
  SAEP_ERR_INTERNAL = 18
} saep_status;

SAEP_API const char* saep_version(void);
SAEP_API const char* saep_status_name(saep_status status);
SAEP_API const char* saep_last_error(void);

/* Worker threads used for feature extraction, embedding extraction and
 * Eigen kernels. 0 restores the default of 1. */
SAEP_API void saep_set_num_threads(unsigned threads);

/* ---- run configuration (model + training hyperparameters) ---- */

typedef struct saep_config saep_config;

SAEP_API saep_status saep_config_new(saep_config** out);
SAEP_API saep_status saep_config_load(const char* path, saep_config** out);
SAEP_API saep_status saep_config_parse(const char* text, saep_config** out);
SAEP_API void saep_config_free(saep_config* config);

SAEP_API size_t saep_config_key_count(void);
SAEP_API const char* saep_config_key(size_t index);
SAEP_API saep_status saep_config_set(saep_config* config, const char* key,
                                     const char* value);
/* Writes the value as text. *needed (optional) receives the length
 * including the terminator; a too small buffer gives
 * SAEP_ERR_INVALID_ARGUMENT. */
SAEP_API saep_status saep_config_get(const saep_config* config, const char* key,
                                     char* buffer, size_t size, size_t* needed);
SAEP_API saep_status saep_config_validate(const saep_config* config);

/* ---- synthetic toy corpus ---- */

typedef struct saep_synth_options {
  int n_speakers;
  int utts_per_speaker;
  uint64_t seed;
  double duration_seconds;
  double snr_db;
} saep_synth_options;

typedef struct saep_synth_report {
  size_t num_utterances;
  size_t num_targets;
  size_t num_nontargets;
} saep_synth_report;

SAEP_API void saep_synth_options_init(saep_synth_options* options);
/* Writes wav/, manifest.txt, train_manifest.txt and trials.txt. */
SAEP_API saep_status saep_synth(const saep_synth_options* options,
                                const char* out_dir, saep_synth_report* report);

/* ---- training ---- */

typedef void (*saep_step_callback)(uint64_t step, double loss, double accuracy,
                                   void* user);

typedef struct saep_train_options {
  const char* resume_path;        /* continue from this checkpoint */
  const char* loss_csv_path;      /* `step,loss` per step run */
  const char* feature_cache_dir;
  int init_only;                  /* write the initial model, no steps */
  size_t accuracy_chunks;         /* per utterance, for the final report */
  saep_step_callback on_step;
  void* user;
} saep_train_options;

typedef struct saep_train_report {
  uint64_t start_step;
  uint64_t end_step;
  double final_loss;          /* NaN when no step ran */
  double train_chunk_accuracy; /* NaN when accuracy_chunks is 0 */
} saep_train_report;

SAEP_API void saep_train_options_init(saep_train_options* options);
/* Trains until the configured step count. `manifest` may be NULL with
 * init_only. On resume the checkpoint's seed and Adam hyperparameters win
 * and its model shape must match the config. */
SAEP_API saep_status saep_train(const saep_config* config, const char* manifest,
                                const char* out_checkpoint,
                                const saep_train_options* options,
                                saep_train_report* report);

/* ---- embeddings ---- */

typedef struct saep_model saep_model;

SAEP_API saep_status saep_model_load(const char* checkpoint, saep_model** out);
SAEP_API void saep_model_free(saep_model* model);
SAEP_API size_t saep_model_embed_dim(const saep_model* model);
/* frames: num_frames x 90 feature rows. out must hold embed_dim floats. */
SAEP_API saep_status saep_model_embed_features(const saep_model* model,
                                               const float* frames,
                                               size_t num_frames, float* out,
                                               size_t out_size);
SAEP_API saep_status saep_model_embed_wav(const saep_model* model,
                                          const char* wav_path, float* out,
                                          size_t out_size);

typedef struct saep_extract_options {
  const char* feature_cache_dir;
  /* Also embed a frame-shuffled copy of every utterance and fail with
   * SAEP_ERR_CONTRACT when any coordinate moves by more than
   * permute_tolerance. */
  int permute_check;
  double permute_tolerance;
  uint64_t permute_seed;
} saep_extract_options;

typedef struct saep_extract_report {
  size_t num_embeddings;
  double max_permute_diff; /* 0 without permute_check */
} saep_extract_report;

SAEP_API void saep_extract_options_init(saep_extract_options* options);
/* One record per manifest utterance, named by utterance id. */
SAEP_API saep_status saep_extract(const char* checkpoint, const char* manifest,
                                  const char* out_archive,
                                  const saep_extract_options* options,
                                  saep_extract_report* report);

/* ---- scoring ---- */

SAEP_API saep_status saep_cosine_score(const float* a, const float* b,
                                       size_t dim, double* out);
SAEP_API saep_status saep_score(const char* embeddings, const char* trials,
                                const char* out_scores, size_t* num_trials);
/* labels: 1 target, 0 nontarget. */
SAEP_API saep_status saep_compute_eer(const double* scores, const int* labels,
                                      size_t count, double* eer,
                                      double* threshold);
SAEP_API saep_status saep_eval(const char* scores, double* eer,
                               double* threshold);

/* ---- parameter counts ---- */

typedef struct saep_param_counts {
  uint64_t encoder;
  uint64_t pooling;
  uint64_t head_fc1;
  uint64_t head_fc2;
  uint64_t head_fc3;
  uint64_t output;
  uint64_t total_all;
  uint64_t total_excluding_output;
  uint64_t total_embedding_extractor;
} saep_param_counts;

SAEP_API saep_status saep_count_params(const saep_config* config,
                                       saep_param_counts* out);

#ifdef __cplusplus
}  /* extern "C" */
#endif

#endif  /* SAEP_SAEP_H_ */
