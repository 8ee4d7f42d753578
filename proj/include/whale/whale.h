// Copyright 2026 The whale-kit Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef WHALE_WHALE_H_
#define WHALE_WHALE_H_

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(__GNUC__)
#define WHALE_API __attribute__((visibility("default")))
#else
#define WHALE_API
#endif

typedef enum whale_status {
  WHALE_OK = 0,
  WHALE_ERR_SHAPE = 1,
  WHALE_ERR_NUMERIC = 2,
  WHALE_ERR_VALIDATION = 3,
  WHALE_ERR_INPUT_TOO_SHORT = 4,
  WHALE_ERR_IMPOSSIBLE_ALIGNMENT = 5,
  WHALE_ERR_UNKNOWN_LANGUAGE = 6,
  WHALE_ERR_VOCAB = 7,
  WHALE_ERR_LENGTH = 8,
  WHALE_ERR_GRAPH = 9,
  WHALE_ERR_IO = 10,
  WHALE_ERR_INVALID_ARGUMENT = 11,  /* null handle or pointer */
  WHALE_ERR_INTERNAL = 12
} whale_status;

typedef struct whale_model whale_model;

/* Message for the last failing call on this thread; never NULL. */
WHALE_API const char* whale_last_error(void);
WHALE_API const char* whale_status_name(whale_status status);
/* Nonzero when the status is caused by bad input rather than a runtime failure. */
WHALE_API int whale_status_is_validation(whale_status status);
/* Frees strings returned through char** out-parameters. */
WHALE_API void whale_string_free(char* s);

/* spec_path may be NULL for the built-in toy corpus. When has_seed is zero
   the spec's seed is used. summary_json (optional) receives counts. */
WHALE_API whale_status whale_gen_data(const char* spec_path, const char* out_dir,
                                      int has_seed, uint64_t seed, char** summary_json);

typedef struct whale_pretrain_options {
  const char* manifest;
  const char* out_dir;
  const char* model_config; /* NULL: toy config */
  int steps;
  int batch_utts;
  double peak_lr;
  int warmup;
  uint64_t seed;
  int log_every;
} whale_pretrain_options;

WHALE_API void whale_pretrain_options_init(whale_pretrain_options* opts);
WHALE_API whale_status whale_pretrain(const whale_pretrain_options* opts, char** summary_json);

typedef struct whale_train_options {
  const char* manifest;
  const char* vocab;        /* NULL: vocab.json next to the manifest */
  const char* out_dir;
  const char* stage_plan;   /* "toy" or "full" */
  double steps_scale;
  const char* config_ini;   /* optional */
  const char* model_config; /* optional */
  const char* init_ssl;     /* optional pretrain output */
  const char* resume;       /* optional checkpoint */
  int has_seed;
  uint64_t seed;
} whale_train_options;

WHALE_API void whale_train_options_init(whale_train_options* opts);
WHALE_API whale_status whale_train(const whale_train_options* opts);

/* dir is a model directory or a training checkpoint. */
WHALE_API whale_status whale_model_load(const char* dir, whale_model** out);
WHALE_API void whale_model_free(whale_model* model);

typedef struct whale_decode_options {
  int beam;
  double lambda_ctc;
  int nbest;
  int max_len;
  const char* language;       /* NULL: each utterance's manifest language */
  const char* adapt_language; /* NULL: no language mask */
} whale_decode_options;

WHALE_API void whale_decode_options_init(whale_decode_options* opts);

/* Decodes every manifest entry. When out_path is set the results are
   written there as JSON lines; results_json (optional) receives them too. */
WHALE_API whale_status whale_decode(const whale_model* model, const char* manifest,
                                    const whale_decode_options* opts, const char* out_path,
                                    char** results_json);

/* hours may be NULL. Writes out_dir/report.{txt,json}; report_text is optional. */
WHALE_API whale_status whale_score(const char* refs, const char* hyps, const char* hours,
                                   const char* out_dir, char** report_text);

WHALE_API whale_status whale_inspect_checkpoint(const char* dir, char** json);

#ifdef __cplusplus
}
#endif

#endif  /* WHALE_WHALE_H_ */
