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

#ifndef WHALE_TRAIN_TRAINER_H_
#define WHALE_TRAIN_TRAINER_H_

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "base/rng.h"
#include "data/manifest.h"
#include "model/asr_model.h"
#include "nn/optim.h"
#include "train/stage_plan.h"

namespace whale {

inline constexpr double kCtcWeight = 0.3;
inline constexpr double kAttentionWeight = 0.7;

struct TrainConfig {
  uint64_t seed = 1;
  int batch_frames = 600;     // frame cap per batch
  int max_batch_utts = 8;
  double tap_weight = 0.5;    // split equally over the taps
  int log_every = 10;
  AdamWConfig adamw;

  void Validate() const;
};

// Reads an INI file: a [train] section plus [stage1] ... [stageN] sections.
// Missing keys keep the values already in `cfg` / `plan`.
void LoadTrainIni(const std::string& path, TrainConfig& cfg, StagePlan& plan);
void SaveTrainIni(const std::string& path, const TrainConfig& cfg, const StagePlan& plan);

struct StepMetrics {
  int stage = 0;          // 1-based
  int step = 0;           // within the stage, 1-based
  int global_step = 0;
  double loss_total = 0;  // per-utterance means over the usable samples
  double loss_ctc = 0;
  double loss_att = 0;
  double loss_taps = 0;
  double lr = 0;
  double grad_norm = 0;
  int used_samples = 0;
  long skipped_samples = 0;  // cumulative
};

struct TrainState {
  int stage = 0;              // index of the current (or next) stage
  bool stage_started = false;
  int step_in_stage = 0;
  int global_step = 0;
  long skipped_samples = 0;
  Rng::State rng{};
  std::vector<std::vector<int>> batches;  // current epoch, indices into stage data
  size_t cursor = 0;
};

// Per-utterance loss terms of the joint objective.
struct JointLoss {
  Tensor total;
  Tensor ctc;
  Tensor att;
  Tensor taps;  // mean over taps
};

// 0.3 * ctc + 0.7 * att + tap_weight * mean(tap ctc), each a per-utterance
// sum of negative log-likelihoods. Throws ImpossibleAlignmentError.
JointLoss ComputeJointLoss(const AsrModel& model, const Tensor& ssl_features,
                           std::span<const int> labels, const std::string& language,
                           const RunMode& mode, double tap_weight);

class Trainer {
 public:
  Trainer(std::unique_ptr<AsrModel> model, StagePlan plan, TrainConfig cfg,
          Manifest corpus, std::string out_dir);

  // Restores model, optimizer and TrainState from a checkpoint directory.
  static std::unique_ptr<Trainer> Resume(const std::string& checkpoint_dir, StagePlan plan,
                                         TrainConfig cfg, Manifest corpus,
                                         std::string out_dir);

  // Runs the remaining stages. Writes out_dir/stage<k> after each stage and
  // appends to out_dir/metrics.jsonl.
  void Run();

  // Starts the current stage: grows the encoder, resets the optimizer,
  // filters the data.
  void BeginStage();
  // One optimizer step on the next batch of the current stage.
  StepMetrics Step();
  // Closes the current stage: checkpoint + summary line.
  void EndStage();

  // Writes dir/model, dir/optimizer, dir/state.json atomically (via a
  // temporary sibling). Throws IoError; existing checkpoints are untouched.
  void SaveCheckpoint(const std::string& dir);

  AsrModel& model() { return *model_; }
  const TrainState& state() const { return state_; }
  const StagePlan& plan() const { return plan_; }
  const Stage& current_stage() const { return plan_.stages.at(state_.stage); }
  const Manifest& stage_data() const { return stage_data_; }
  const std::vector<StepMetrics>& history() const { return history_; }

 private:
  void RebuildOptimizer();
  void NewEpoch();
  // SSL output for stage_data_ entry `index`; cached while the SSL frontend
  // is frozen, differentiable otherwise.
  Tensor SslFeatures(int index, const RunMode& mode);
  void AppendMetrics(const std::string& line);

  std::unique_ptr<AsrModel> model_;
  StagePlan plan_;
  TrainConfig cfg_;
  Manifest corpus_;
  std::string out_dir_;
  Rng rng_;
  TrainState state_;
  Manifest stage_data_;
  std::unique_ptr<AdamW> optimizer_;
  std::map<std::string, Tensor> raw_cache_;  // by utt_id
  std::map<std::string, Tensor> ssl_cache_;
  std::vector<StepMetrics> history_;
};

}  // namespace whale

#endif  // WHALE_TRAIN_TRAINER_H_
