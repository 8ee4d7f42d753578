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

#include "train/stage_plan.h"

#include <cmath>

#include "base/error.h"

namespace whale {

namespace {

const std::set<std::string> kKnownSets = {"ssl", "encoder", "decoder"};

Stage MakeStage(std::string name, int depth, DataFilter data, bool ssl_frozen, int steps,
                double peak, int warmup) {
  Stage s;
  s.name = std::move(name);
  s.encoder_depth = depth;
  s.data = std::move(data);
  if (ssl_frozen) s.frozen_sets = {"ssl"};
  s.step_budget = steps;
  s.lr.peak = peak;
  s.lr.warmup = warmup;
  return s;
}

}  // namespace

void StagePlan::Validate() const {
  if (stages.empty()) throw ValidationError("stage plan is empty");
  int prev = 0;
  for (const Stage& s : stages) {
    if (s.encoder_depth < 1) throw ValidationError(s.name + ": encoder_depth must be >= 1");
    if (s.encoder_depth < prev) {
      throw ValidationError(s.name + ": encoder_depth decreases from " +
                            std::to_string(prev));
    }
    prev = s.encoder_depth;
    if (s.step_budget < 0) throw ValidationError(s.name + ": step_budget must be >= 0");
    if (!(s.data.fraction > 0.0 && s.data.fraction <= 1.0)) {
      throw ValidationError(s.name + ": data fraction must be in (0, 1]");
    }
    for (const std::string& f : s.frozen_sets) {
      if (!kKnownSets.count(f)) throw ValidationError(s.name + ": unknown frozen set " + f);
    }
    if (!(s.lr.peak > 0.0) || s.lr.warmup < 0) {
      throw ValidationError(s.name + ": bad learning-rate schedule");
    }
  }
}

void StagePlan::ValidateReplica() const {
  Validate();
  if (stages.size() != 7) throw ValidationError("curriculum plan must have 7 stages");
  for (size_t i = 0; i + 1 < stages.size(); ++i) {
    if (!stages[i].frozen_sets.count("ssl")) {
      throw ValidationError(stages[i].name + ": SSL frontend must be frozen");
    }
  }
  if (stages.back().frozen_sets.count("ssl")) {
    throw ValidationError("final stage must unfreeze the SSL frontend");
  }
}

StagePlan StagePlan::Scaled(double steps_scale) const {
  if (!(steps_scale > 0.0)) throw ValidationError("steps scale must be > 0");
  StagePlan out = *this;
  for (Stage& s : out.stages) {
    if (s.step_budget > 0) {
      s.step_budget = std::max(1, static_cast<int>(std::lround(s.step_budget * steps_scale)));
    }
  }
  return out;
}

StagePlan BuildStagePlan(PlanScale scale, const std::string& primary,
                         const std::set<std::string>& all) {
  const DataFilter single_small{{primary}, 0.5};
  const DataFilter single_all{{primary}, 1.0};
  const DataFilter multi_subset{all, 0.5};
  const DataFilter everything{all, 1.0};
  StagePlan plan;
  if (scale == PlanScale::kFull) {
    // One nominal "day" of training is 10k steps.
    constexpr int kDay = 10000;
    plan.stages = {
        MakeStage("small-encoder", 8, single_small, true, kDay, 1e-3, 2500),
        MakeStage("medium-encoder", 16, single_small, true, kDay, 1e-3, 2500),
        MakeStage("large-encoder", 24, single_small, true, kDay, 1e-3, 2500),
        MakeStage("single-language-all", 24, single_all, true, kDay, 1e-3, 2500),
        MakeStage("multilingual-subset", 24, multi_subset, true, 3 * kDay, 1e-3, 2500),
        MakeStage("all-data", 24, everything, true, 14 * kDay, 1e-3, 2500),
        MakeStage("ssl-update", 24, everything, false, 21 * kDay, 5e-4, 2500),
    };
  } else {
    plan.stages = {
        MakeStage("small-encoder", 2, single_small, true, 450, 3e-3, 40),
        MakeStage("medium-encoder", 4, single_small, true, 300, 3e-3, 20),
        MakeStage("large-encoder", 6, single_small, true, 300, 3e-3, 20),
        MakeStage("single-language-all", 6, single_all, true, 300, 3e-3, 20),
        MakeStage("multilingual-subset", 6, multi_subset, true, 450, 3e-3, 20),
        MakeStage("all-data", 6, everything, true, 1200, 3e-3, 20),
        MakeStage("ssl-update", 6, everything, false, 450, 1e-3, 20),
    };
  }
  plan.Validate();
  return plan;
}

PlanScale ParsePlanScale(const std::string& s) {
  if (s == "toy") return PlanScale::kToy;
  if (s == "full") return PlanScale::kFull;
  throw ValidationError("unknown stage plan '" + s + "' (expected toy or full)");
}

bool IsFrozen(const std::set<std::string>& frozen_sets, const std::string& param) {
  for (const std::string& s : frozen_sets) {
    if (param == s || param.rfind(s + ".", 0) == 0) return true;
  }
  return false;
}

}  // namespace whale
