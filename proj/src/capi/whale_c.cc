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

#include "whale/whale.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <memory>
#include <string>

#include "base/error.h"
#include "json.hpp"
#include "pipeline/commands.h"

struct whale_model {
  std::unique_ptr<whale::AsrModel> model;
};

namespace {

thread_local std::string g_last_error;

whale_status StatusFor(whale::ErrorKind kind) {
  switch (kind) {
    case whale::ErrorKind::kShape: return WHALE_ERR_SHAPE;
    case whale::ErrorKind::kNumeric: return WHALE_ERR_NUMERIC;
    case whale::ErrorKind::kValidation: return WHALE_ERR_VALIDATION;
    case whale::ErrorKind::kInputTooShort: return WHALE_ERR_INPUT_TOO_SHORT;
    case whale::ErrorKind::kImpossibleAlignment: return WHALE_ERR_IMPOSSIBLE_ALIGNMENT;
    case whale::ErrorKind::kUnknownLanguage: return WHALE_ERR_UNKNOWN_LANGUAGE;
    case whale::ErrorKind::kVocab: return WHALE_ERR_VOCAB;
    case whale::ErrorKind::kLength: return WHALE_ERR_LENGTH;
    case whale::ErrorKind::kGraph: return WHALE_ERR_GRAPH;
    case whale::ErrorKind::kIo: return WHALE_ERR_IO;
  }
  return WHALE_ERR_INTERNAL;
}

template <typename Fn>
whale_status Guard(Fn&& fn) {
  g_last_error.clear();
  try {
    fn();
    return WHALE_OK;
  } catch (const whale::Error& e) {
    g_last_error = e.what();
    return StatusFor(e.kind());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return WHALE_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown exception";
    return WHALE_ERR_INTERNAL;
  }
}

whale_status Missing(const char* what) {
  g_last_error = std::string(what) + " must not be null";
  return WHALE_ERR_INVALID_ARGUMENT;
}

std::string Str(const char* s) { return s ? s : ""; }

void Emit(char** out, const std::string& s) {
  if (!out) return;
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  *out = p;
}

}  // namespace

extern "C" {

const char* whale_last_error(void) { return g_last_error.c_str(); }

const char* whale_status_name(whale_status status) {
  switch (status) {
    case WHALE_OK: return "ok";
    case WHALE_ERR_SHAPE: return "shape";
    case WHALE_ERR_NUMERIC: return "numeric";
    case WHALE_ERR_VALIDATION: return "validation";
    case WHALE_ERR_INPUT_TOO_SHORT: return "input_too_short";
    case WHALE_ERR_IMPOSSIBLE_ALIGNMENT: return "impossible_alignment";
    case WHALE_ERR_UNKNOWN_LANGUAGE: return "unknown_language";
    case WHALE_ERR_VOCAB: return "vocab";
    case WHALE_ERR_LENGTH: return "length";
    case WHALE_ERR_GRAPH: return "graph";
    case WHALE_ERR_IO: return "io";
    case WHALE_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case WHALE_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

int whale_status_is_validation(whale_status status) {
  switch (status) {
    case WHALE_ERR_SHAPE:
    case WHALE_ERR_VALIDATION:
    case WHALE_ERR_INPUT_TOO_SHORT:
    case WHALE_ERR_UNKNOWN_LANGUAGE:
    case WHALE_ERR_VOCAB:
    case WHALE_ERR_LENGTH:
    case WHALE_ERR_INVALID_ARGUMENT:
      return 1;
    default:
      return 0;
  }
}

void whale_string_free(char* s) { std::free(s); }

whale_status whale_gen_data(const char* spec_path, const char* out_dir, int has_seed,
                            uint64_t seed, char** summary_json) {
  if (!out_dir) return Missing("out_dir");
  return Guard([&] {
    std::optional<uint64_t> s;
    if (has_seed) s = seed;
    whale::SyntheticCorpus c = whale::RunGenData(Str(spec_path), out_dir, s);
    nlohmann::ordered_json j;
    j["out_dir"] = out_dir;
    j["train_utterances"] = c.train.entries.size();
    j["heldout_utterances"] = c.heldout.entries.size();
    j["vocab_size"] = c.vocab.size();
    Emit(summary_json, j.dump());
  });
}

void whale_pretrain_options_init(whale_pretrain_options* opts) {
  if (!opts) return;
  const whale::PretrainConfig d;
  *opts = whale_pretrain_options{};
  opts->steps = d.steps;
  opts->batch_utts = d.batch_utts;
  opts->peak_lr = d.lr.peak;
  opts->warmup = d.lr.warmup;
  opts->seed = d.seed;
  opts->log_every = d.log_every;
}

whale_status whale_pretrain(const whale_pretrain_options* opts, char** summary_json) {
  if (!opts) return Missing("opts");
  if (!opts->manifest) return Missing("manifest");
  if (!opts->out_dir) return Missing("out_dir");
  return Guard([&] {
    whale::PretrainOptions o;
    o.manifest = opts->manifest;
    o.out_dir = opts->out_dir;
    o.model_config = Str(opts->model_config);
    o.cfg.steps = opts->steps;
    o.cfg.batch_utts = opts->batch_utts;
    o.cfg.lr.peak = opts->peak_lr;
    o.cfg.lr.warmup = opts->warmup;
    o.cfg.seed = opts->seed;
    o.cfg.log_every = opts->log_every;
    o.cfg.Validate();
    whale::PretrainSummary s = whale::RunPretrain(o);
    nlohmann::ordered_json j;
    j["steps"] = s.steps;
    j["first_loss"] = s.first_loss;
    j["final_loss"] = s.final_loss;
    j["eval_accuracy"] = s.eval_accuracy;
    Emit(summary_json, j.dump());
  });
}

void whale_train_options_init(whale_train_options* opts) {
  if (!opts) return;
  *opts = whale_train_options{};
  opts->stage_plan = "toy";
  opts->steps_scale = 1.0;
}

whale_status whale_train(const whale_train_options* opts) {
  if (!opts) return Missing("opts");
  if (!opts->manifest) return Missing("manifest");
  if (!opts->out_dir) return Missing("out_dir");
  return Guard([&] {
    whale::TrainOptions o;
    o.manifest = opts->manifest;
    o.vocab = Str(opts->vocab);
    o.out_dir = opts->out_dir;
    o.stage_plan = opts->stage_plan ? opts->stage_plan : "toy";
    o.steps_scale = opts->steps_scale;
    o.config_ini = Str(opts->config_ini);
    o.model_config = Str(opts->model_config);
    o.init_ssl = Str(opts->init_ssl);
    o.resume = Str(opts->resume);
    if (opts->has_seed) o.seed = opts->seed;
    whale::RunTrain(o);
  });
}

whale_status whale_model_load(const char* dir, whale_model** out) {
  if (!dir) return Missing("dir");
  if (!out) return Missing("out");
  *out = nullptr;
  return Guard([&] {
    auto m = std::make_unique<whale_model>();
    m->model = whale::LoadModelDir(dir);
    *out = m.release();
  });
}

void whale_model_free(whale_model* model) { delete model; }

void whale_decode_options_init(whale_decode_options* opts) {
  if (!opts) return;
  const whale::BeamConfig d;
  *opts = whale_decode_options{};
  opts->beam = d.beam_size;
  opts->lambda_ctc = d.lambda_ctc;
  opts->nbest = d.nbest;
  opts->max_len = d.max_len;
}

whale_status whale_decode(const whale_model* model, const char* manifest,
                          const whale_decode_options* opts, const char* out_path,
                          char** results_json) {
  if (!model) return Missing("model");
  if (!manifest) return Missing("manifest");
  if (!opts) return Missing("opts");
  return Guard([&] {
    whale::DecodeOptions o;
    o.beam.beam_size = opts->beam;
    o.beam.lambda_ctc = opts->lambda_ctc;
    o.beam.nbest = opts->nbest;
    o.beam.max_len = opts->max_len;
    o.beam.Validate();
    o.language = Str(opts->language);
    o.adapt_language = Str(opts->adapt_language);
    whale::Manifest data = whale::LoadManifest(manifest);
    std::vector<whale::DecodeResult> results = whale::DecodeManifest(*model->model, data, o);
    if (out_path) whale::WriteDecodeResults(out_path, results);
    if (results_json) Emit(results_json, whale::DecodeResultsToJsonl(results));
  });
}

whale_status whale_score(const char* refs, const char* hyps, const char* hours,
                         const char* out_dir, char** report_text) {
  if (!refs) return Missing("refs");
  if (!hyps) return Missing("hyps");
  if (!out_dir) return Missing("out_dir");
  return Guard([&] {
    whale::ScoreReport r = whale::RunScore(refs, hyps, Str(hours), out_dir);
    Emit(report_text, r.ToText());
  });
}

whale_status whale_inspect_checkpoint(const char* dir, char** json) {
  if (!dir) return Missing("dir");
  if (!json) return Missing("json");
  return Guard([&] { Emit(json, whale::InspectCheckpoint(dir)); });
}

}  // extern "C"
