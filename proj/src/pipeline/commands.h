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

#ifndef WHALE_PIPELINE_COMMANDS_H_
#define WHALE_PIPELINE_COMMANDS_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "data/synthetic.h"
#include "pipeline/pipeline.h"
#include "train/pretrain.h"
#include "train/trainer.h"

namespace whale {

// gen-data: spec_path empty means the built-in toy spec.
SyntheticCorpus RunGenData(const std::string& spec_path, const std::string& out_dir,
                           std::optional<uint64_t> seed);

struct PretrainOptions {
  std::string manifest;
  std::string out_dir;
  std::string model_config;  // JSON file; empty: toy config
  PretrainConfig cfg;
};

struct PretrainSummary {
  double first_loss = 0;
  double final_loss = 0;
  double eval_accuracy = 0;
  int steps = 0;
};

// Writes out_dir/config.json, out_dir/{index.json,params.bin} (the "ssl.*"
// parameters) and out_dir/metrics.jsonl.
PretrainSummary RunPretrain(const PretrainOptions& opts);

struct TrainOptions {
  std::string manifest;
  std::string vocab;         // empty: vocab.json next to the manifest
  std::string out_dir;
  std::string stage_plan = "toy";
  double steps_scale = 1.0;
  std::string config_ini;    // optional overrides
  std::string model_config;  // JSON; empty: init_ssl's config or the toy config
  std::string init_ssl;      // pretrain output directory
  std::string resume;        // checkpoint directory
  std::optional<uint64_t> seed;
};

// Runs the curriculum; the final model is also written to out_dir/final.
void RunTrain(const TrainOptions& opts);

// Accepts a model directory or a trainer checkpoint (with a model/ child).
std::unique_ptr<AsrModel> LoadModelDir(const std::string& dir);

struct DecodeCommand {
  std::string model;
  std::string manifest;
  std::string out;
  DecodeOptions opts;
};
std::vector<DecodeResult> RunDecode(const DecodeCommand& cmd);

ScoreReport RunScore(const std::string& refs, const std::string& hyps,
                     const std::string& hours, const std::string& out_dir);

// Summary of a model or checkpoint directory as JSON.
std::string InspectCheckpoint(const std::string& dir);

}  // namespace whale

#endif  // WHALE_PIPELINE_COMMANDS_H_
