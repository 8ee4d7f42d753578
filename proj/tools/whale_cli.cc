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

// whale_cli: data generation, training, decoding and scoring.

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "whale/whale.h"

namespace {

int ExitCode(whale_status st) {
  if (st == WHALE_OK) return 0;
  std::fprintf(stderr, "error (%s): %s\n", whale_status_name(st), whale_last_error());
  return whale_status_is_validation(st) ? 1 : 2;
}

const char* OrNull(const std::string& s) { return s.empty() ? nullptr : s.c_str(); }

void PrintAndFree(char* s) {
  if (!s) return;
  std::fputs(s, stdout);
  if (*s && s[std::strlen(s) - 1] != '\n') std::fputc('\n', stdout);
  whale_string_free(s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"whale: multilingual speech recognition toolkit"};
  app.require_subcommand(1);

  // gen-data
  std::string spec, data_out;
  std::optional<uint64_t> data_seed;
  auto* gen = app.add_subcommand("gen-data", "Write a synthetic corpus");
  gen->add_option("--spec", spec, "Synthetic spec JSON (default: toy corpus)");
  gen->add_option("--out", data_out, "Output directory")->required();
  gen->add_option("--seed", data_seed, "Override the spec seed");

  // pretrain
  whale_pretrain_options po;
  whale_pretrain_options_init(&po);
  std::string pt_manifest, pt_out, pt_config;
  auto* pre = app.add_subcommand("pretrain", "Self-supervised pretraining of the SSL frontend");
  pre->add_option("--manifest", pt_manifest, "Training manifest")->required();
  pre->add_option("--out", pt_out, "Output directory")->required();
  pre->add_option("--model-config", pt_config, "Model config JSON");
  pre->add_option("--steps", po.steps, "Optimizer steps")->capture_default_str();
  pre->add_option("--batch", po.batch_utts, "Utterances per batch")->capture_default_str();
  pre->add_option("--lr", po.peak_lr, "Peak learning rate")->capture_default_str();
  pre->add_option("--warmup", po.warmup, "Warmup steps")->capture_default_str();
  pre->add_option("--seed", po.seed, "Random seed")->capture_default_str();
  pre->add_option("--log-every", po.log_every, "Metrics interval")->capture_default_str();

  // train
  whale_train_options to;
  whale_train_options_init(&to);
  std::string tr_manifest, tr_vocab, tr_out, tr_plan = "toy", tr_ini, tr_config, tr_ssl,
                                             tr_resume;
  std::optional<uint64_t> tr_seed;
  auto* train = app.add_subcommand("train", "Run the staged training curriculum");
  train->add_option("--manifest", tr_manifest, "Training manifest")->required();
  train->add_option("--vocab", tr_vocab, "Vocabulary (default: vocab.json beside the manifest)");
  train->add_option("--out", tr_out, "Output directory")->required();
  train->add_option("--stage-plan", tr_plan, "toy or full")
      ->check(CLI::IsMember({"toy", "full"}))
      ->capture_default_str();
  train->add_option("--steps-scale", to.steps_scale, "Multiply every stage budget")
      ->capture_default_str();
  train->add_option("--config", tr_ini, "INI overrides for training and stages");
  train->add_option("--model-config", tr_config, "Model config JSON");
  train->add_option("--init-ssl", tr_ssl, "Pretrained SSL directory");
  train->add_option("--resume", tr_resume, "Checkpoint directory to resume from");
  train->add_option("--seed", tr_seed, "Random seed");

  // decode
  whale_decode_options dopt;
  whale_decode_options_init(&dopt);
  std::string de_model, de_manifest, de_out, de_lang, de_adapt;
  std::optional<uint64_t> de_seed;
  auto* dec = app.add_subcommand("decode", "Joint CTC/attention beam search");
  dec->add_option("--model", de_model, "Model or checkpoint directory")->required();
  dec->add_option("--manifest", de_manifest, "Manifest to decode")->required();
  dec->add_option("--out", de_out, "Hypotheses (JSON lines; default stdout)");
  dec->add_option("--beam", dopt.beam, "Beam size")->capture_default_str();
  dec->add_option("--lambda-ctc", dopt.lambda_ctc, "CTC weight in the joint score")
      ->capture_default_str();
  dec->add_option("--nbest", dopt.nbest, "Hypotheses kept per utterance")->capture_default_str();
  dec->add_option("--max-len", dopt.max_len, "Maximum output tokens")->capture_default_str();
  dec->add_option("--language", de_lang, "Decoder language (default: manifest language)");
  dec->add_option("--adapt-language", de_adapt, "Language mask applied at encoder taps");
  dec->add_option("--seed", de_seed, "Random seed (decoding itself is deterministic)");

  // score
  std::string sc_refs, sc_hyps, sc_hours, sc_out;
  auto* score = app.add_subcommand("score", "WER/CER report by language and resource rank");
  score->add_option("--refs", sc_refs, "Reference manifest or text records")->required();
  score->add_option("--hyps", sc_hyps, "Hypotheses from decode")->required();
  score->add_option("--hours", sc_hours, "Training hours per language (JSON lines)");
  score->add_option("--out", sc_out, "Directory for report.txt and report.json")->required();

  // inspect-checkpoint
  std::string ck_dir;
  auto* insp = app.add_subcommand("inspect-checkpoint", "Describe a model or checkpoint");
  insp->add_option("dir", ck_dir, "Model or checkpoint directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n";
    CLI::App* sub = &app;
    for (CLI::App* s : app.get_subcommands()) sub = s;
    std::cerr << sub->help();
    return 1;
  }

  if (*gen) {
    char* summary = nullptr;
    whale_status st = whale_gen_data(OrNull(spec), data_out.c_str(), data_seed.has_value(),
                                     data_seed.value_or(0), &summary);
    PrintAndFree(summary);
    return ExitCode(st);
  }
  if (*pre) {
    po.manifest = pt_manifest.c_str();
    po.out_dir = pt_out.c_str();
    po.model_config = OrNull(pt_config);
    char* summary = nullptr;
    whale_status st = whale_pretrain(&po, &summary);
    PrintAndFree(summary);
    return ExitCode(st);
  }
  if (*train) {
    to.manifest = tr_manifest.c_str();
    to.vocab = OrNull(tr_vocab);
    to.out_dir = tr_out.c_str();
    to.stage_plan = tr_plan.c_str();
    to.config_ini = OrNull(tr_ini);
    to.model_config = OrNull(tr_config);
    to.init_ssl = OrNull(tr_ssl);
    to.resume = OrNull(tr_resume);
    to.has_seed = tr_seed.has_value();
    to.seed = tr_seed.value_or(0);
    return ExitCode(whale_train(&to));
  }
  if (*dec) {
    dopt.language = OrNull(de_lang);
    dopt.adapt_language = OrNull(de_adapt);
    whale_model* model = nullptr;
    whale_status st = whale_model_load(de_model.c_str(), &model);
    if (st != WHALE_OK) return ExitCode(st);
    char* results = nullptr;
    st = whale_decode(model, de_manifest.c_str(), &dopt, OrNull(de_out),
                      de_out.empty() ? &results : nullptr);
    whale_model_free(model);
    PrintAndFree(results);
    return ExitCode(st);
  }
  if (*score) {
    char* text = nullptr;
    whale_status st = whale_score(sc_refs.c_str(), sc_hyps.c_str(), OrNull(sc_hours),
                                  sc_out.c_str(), &text);
    PrintAndFree(text);
    return ExitCode(st);
  }
  if (*insp) {
    char* json = nullptr;
    whale_status st = whale_inspect_checkpoint(ck_dir.c_str(), &json);
    PrintAndFree(json);
    return ExitCode(st);
  }
  return 1;
}
