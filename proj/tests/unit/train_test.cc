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

#include <gtest/gtest.h>

#include <filesystem>
#include <map>

#include "base/error.h"
#include "data/features.h"
#include "data/synthetic.h"
#include "model/asr_model.h"
#include "pipeline/pipeline.h"
#include "tensor/checkpoint.h"
#include "train/stage_plan.h"
#include "train/trainer.h"

namespace whale {
namespace {

namespace fs = std::filesystem;

fs::path TempDir(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("whale_train_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

using ParamMap = std::map<std::string, std::vector<double>>;

ParamMap ToMap(const NamedTensors& ts) {
  ParamMap m;
  for (const auto& [name, t] : ts) m[name] = t.ToVector();
  return m;
}

ParamMap Params(AsrModel& model) { return ToMap(NamedParameters(model)); }

ParamMap CheckpointParams(const fs::path& ckpt) {
  return ToMap(LoadTensors((ckpt / "model").string()));
}

ParamMap WithPrefix(const ParamMap& m, const std::string& prefix) {
  ParamMap out;
  for (const auto& [k, v] : m) {
    if (k.rfind(prefix + ".", 0) == 0) out[k] = v;
  }
  return out;
}

// Small corpus shared by the trainer tests.
const SyntheticCorpus& Corpus() {
  static const SyntheticCorpus c = [] {
    SyntheticSpec spec = SyntheticSpec::Toy();
    for (SyntheticLanguage& l : spec.languages) {
      l.utterances = 4;
      l.heldout = 1;
    }
    return GenerateSyntheticCorpus(spec, TempDir("corpus").string());
  }();
  return c;
}

StagePlan TinyPlan() {
  StagePlan plan = BuildStagePlan(PlanScale::kToy, "ta", {});
  const int steps[] = {3, 2, 2, 2, 3, 3, 3};
  for (size_t i = 0; i < plan.stages.size(); ++i) plan.stages[i].step_budget = steps[i];
  return plan;
}

TrainConfig TinyConfig() {
  TrainConfig cfg;
  cfg.max_batch_utts = 2;
  cfg.seed = 11;
  return cfg;
}

TEST(StagePlanTest, ToyAndFullPlansAreReplicas) {
  for (PlanScale s : {PlanScale::kToy, PlanScale::kFull}) {
    StagePlan plan = BuildStagePlan(s, "en", {"en", "de"});
    EXPECT_NO_THROW(plan.ValidateReplica());
    ASSERT_EQ(plan.stages.size(), 7u);
    EXPECT_EQ(plan.stages[0].data.languages, std::set<std::string>({"en"}));
    EXPECT_EQ(plan.stages[5].data.languages, std::set<std::string>({"en", "de"}));
    EXPECT_DOUBLE_EQ(plan.stages[4].data.fraction, 0.5);
  }
  StagePlan full = BuildStagePlan(PlanScale::kFull);
  EXPECT_EQ(full.stages[0].encoder_depth, 8);
  EXPECT_EQ(full.stages[1].encoder_depth, 16);
  EXPECT_EQ(full.stages[2].encoder_depth, 24);
  EXPECT_EQ(full.stages[6].encoder_depth, 24);
  // Relative budgets 1, 1, 1, 1, 3, 14, 21.
  const int rel[] = {1, 1, 1, 1, 3, 14, 21};
  for (int i = 0; i < 7; ++i) {
    EXPECT_EQ(full.stages[i].step_budget, rel[i] * full.stages[0].step_budget);
  }
}

TEST(StagePlanTest, ValidationAndScaling) {
  StagePlan plan = BuildStagePlan(PlanScale::kToy);
  StagePlan scaled = plan.Scaled(0.001);
  for (const Stage& s : scaled.stages) EXPECT_EQ(s.step_budget, 1);
  EXPECT_THROW(plan.Scaled(0.0), ValidationError);

  StagePlan bad = plan;
  bad.stages[2].encoder_depth = 1;
  EXPECT_THROW(bad.Validate(), ValidationError);
  bad = plan;
  bad.stages[6].frozen_sets.insert("ssl");
  EXPECT_THROW(bad.ValidateReplica(), ValidationError);
  bad = plan;
  bad.stages[0].frozen_sets.insert("bogus");
  EXPECT_THROW(bad.Validate(), ValidationError);
  bad = plan;
  bad.stages.pop_back();
  EXPECT_THROW(bad.ValidateReplica(), ValidationError);
  EXPECT_THROW(ParsePlanScale("huge"), ValidationError);

  EXPECT_TRUE(IsFrozen({"ssl"}, "ssl.blocks.0.w"));
  EXPECT_FALSE(IsFrozen({"ssl"}, "sslx.w"));
  EXPECT_FALSE(IsFrozen({"ssl"}, "encoder.ssl"));
}

TEST(TrainIniTest, RoundTrip) {
  fs::path dir = TempDir("ini");
  TrainConfig cfg = TinyConfig();
  cfg.tap_weight = 0.25;
  StagePlan plan = TinyPlan();
  plan.stages[3].lr.peak = 7e-4;
  plan.stages[4].data.fraction = 0.25;
  SaveTrainIni((dir / "t.ini").string(), cfg, plan);
  TrainConfig cfg2;
  StagePlan plan2 = BuildStagePlan(PlanScale::kToy, "ta", {});
  LoadTrainIni((dir / "t.ini").string(), cfg2, plan2);
  EXPECT_EQ(cfg2.seed, cfg.seed);
  EXPECT_EQ(cfg2.max_batch_utts, cfg.max_batch_utts);
  EXPECT_DOUBLE_EQ(cfg2.tap_weight, 0.25);
  ASSERT_EQ(plan2.stages.size(), 7u);
  for (size_t i = 0; i < 7; ++i) {
    EXPECT_EQ(plan2.stages[i].step_budget, plan.stages[i].step_budget);
    EXPECT_EQ(plan2.stages[i].frozen_sets, plan.stages[i].frozen_sets);
    EXPECT_EQ(plan2.stages[i].data.languages, plan.stages[i].data.languages);
  }
  EXPECT_DOUBLE_EQ(plan2.stages[3].lr.peak, 7e-4);
  EXPECT_DOUBLE_EQ(plan2.stages[4].data.fraction, 0.25);
}

TEST(AsrModelTest, SaveLoadIsBitExact) {
  const SyntheticCorpus& c = Corpus();
  AsrModel model(ModelConfig::Toy(), c.vocab, 3);
  fs::path dir = TempDir("model");
  model.Save(dir.string());
  auto loaded = AsrModel::Load(dir.string());
  EXPECT_EQ(Params(*loaded), Params(model));
  EXPECT_EQ(loaded->config().ToJson(), model.config().ToJson());

  const ManifestEntry& e = c.heldout.entries[0];
  Tensor feats = ReadFeatures(c.heldout.ResolvePath(e)).ToTensor();
  DecodeOptions o;
  DecodeResult a = DecodeFeatures(model, feats, e.language, o);
  DecodeResult b = DecodeFeatures(*loaded, feats, e.language, o);
  EXPECT_EQ(a.tokens, b.tokens);
  EXPECT_EQ(a.joint, b.joint);
}

TEST(AsrModelTest, GrowthPreservesExistingParameters) {
  AsrModel model(ModelConfig::Toy(), Corpus().vocab, 4);
  const ParamMap before = Params(model);
  const int depth = model.encoder().num_blocks();
  Rng rng(9);
  model.GrowEncoder(depth + 2, rng);
  EXPECT_EQ(model.encoder().num_blocks(), depth + 2);
  EXPECT_EQ(model.config().encoder.num_blocks, depth + 2);
  const ParamMap after = Params(model);
  EXPECT_GT(after.size(), before.size());
  for (const auto& [name, v] : before) {
    ASSERT_TRUE(after.count(name)) << name;
    EXPECT_EQ(after.at(name), v) << name;
  }
}

TEST(AsrModelTest, ConfigJsonRoundTrip) {
  ModelConfig cfg = ModelConfig::Toy();
  cfg.decoder.label_smoothing = 0.15;
  cfg.decoder.token_dropout = 0.05;
  EXPECT_EQ(ModelConfig::FromJson(cfg.ToJson()).ToJson(), cfg.ToJson());
}

class CurriculumTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    out_ = TempDir("run");
    auto model = std::make_unique<AsrModel>(ModelConfig::Toy(), Corpus().vocab, 5);
    initial_ = new ParamMap(Params(*model));
    trainer_ = new Trainer(std::move(model), TinyPlan(), TinyConfig(), Corpus().train,
                           out_.string());
    grown_ok_ = true;
    StagePlan plan = TinyPlan();
    while (trainer_->state().stage < static_cast<int>(plan.stages.size())) {
      const int k = trainer_->state().stage;
      const ParamMap prev = Params(trainer_->model());
      trainer_->BeginStage();
      const ParamMap now = Params(trainer_->model());
      for (const auto& [name, v] : prev) {
        if (!now.count(name) || now.at(name) != v) grown_ok_ = false;
      }
      if (trainer_->model().encoder().num_blocks() != plan.stages[k].encoder_depth) {
        grown_ok_ = false;
      }
      while (trainer_->state().step_in_stage < trainer_->current_stage().step_budget) {
        trainer_->Step();
      }
      trainer_->EndStage();
    }
  }
  static void TearDownTestSuite() {
    delete trainer_;
    delete initial_;
  }

  static fs::path out_;
  static ParamMap* initial_;
  static Trainer* trainer_;
  static bool grown_ok_;
};

fs::path CurriculumTest::out_;
ParamMap* CurriculumTest::initial_ = nullptr;
Trainer* CurriculumTest::trainer_ = nullptr;
bool CurriculumTest::grown_ok_ = false;

TEST_F(CurriculumTest, WritesSevenCheckpoints) {
  for (int k = 1; k <= 7; ++k) {
    fs::path ckpt = out_ / ("stage" + std::to_string(k));
    EXPECT_TRUE(fs::exists(ckpt / "model" / "params.bin")) << ckpt;
    EXPECT_TRUE(fs::exists(ckpt / "optimizer")) << ckpt;
    EXPECT_TRUE(fs::exists(ckpt / "state.json")) << ckpt;
    EXPECT_FALSE(fs::exists(out_ / ("stage" + std::to_string(k) + ".tmp")));
  }
  EXPECT_TRUE(fs::exists(out_ / "metrics.jsonl"));
  EXPECT_EQ(trainer_->history().size(), 18u);
}

TEST_F(CurriculumTest, GrowthKeepsTransferredBlocks) { EXPECT_TRUE(grown_ok_); }

TEST_F(CurriculumTest, SslFrozenUntilLastStage) {
  const ParamMap ssl0 = WithPrefix(*initial_, "ssl");
  ASSERT_FALSE(ssl0.empty());
  for (int k = 1; k <= 6; ++k) {
    EXPECT_EQ(WithPrefix(CheckpointParams(out_ / ("stage" + std::to_string(k))), "ssl"), ssl0)
        << "stage " << k;
  }
  EXPECT_NE(WithPrefix(CheckpointParams(out_ / "stage7"), "ssl"), ssl0);
  // Everything else trains from the first stage on.
  EXPECT_NE(WithPrefix(CheckpointParams(out_ / "stage1"), "decoder"),
            WithPrefix(*initial_, "decoder"));
}

TEST_F(CurriculumTest, ResumeReproducesLaterStages) {
  fs::path out2 = TempDir("resume");
  auto resumed = Trainer::Resume((out_ / "stage4").string(), TinyPlan(), TinyConfig(),
                                 Corpus().train, out2.string());
  EXPECT_EQ(resumed->state().stage, 4);
  resumed->Run();
  std::vector<StepMetrics> want;
  for (const StepMetrics& m : trainer_->history()) {
    if (m.stage >= 5) want.push_back(m);
  }
  const std::vector<StepMetrics>& got = resumed->history();
  ASSERT_EQ(got.size(), want.size());
  for (size_t i = 0; i < got.size(); ++i) {
    EXPECT_EQ(got[i].stage, want[i].stage);
    EXPECT_EQ(got[i].step, want[i].step);
    EXPECT_EQ(got[i].loss_total, want[i].loss_total) << "step " << i;
    EXPECT_EQ(got[i].grad_norm, want[i].grad_norm) << "step " << i;
  }
  EXPECT_EQ(Params(resumed->model()), Params(trainer_->model()));
}

}  // namespace
}  // namespace whale
