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

#ifndef WHALE_TRAIN_STAGE_PLAN_H_
#define WHALE_TRAIN_STAGE_PLAN_H_

#include <set>
#include <string>
#include <vector>

#include "nn/optim.h"

namespace whale {

struct DataFilter {
  std::set<std::string> languages;  // empty: every language
  double fraction = 1.0;            // first ceil(fraction * n) per language
};

struct Stage {
  std::string name;
  int encoder_depth = 0;
  DataFilter data;
  std::set<std::string> frozen_sets;  // parameter prefixes: "ssl", "encoder", "decoder"
  int step_budget = 0;
  LrSchedule lr;
};

enum class PlanScale { kToy, kFull };

struct StagePlan {
  std::vector<Stage> stages;

  // Depths non-decreasing, budgets >= 0, fractions in (0, 1], known frozen
  // set names. Throws ValidationError.
  void Validate() const;
  // Seven stages, SSL frozen in every stage but the last. Throws ValidationError.
  void ValidateReplica() const;

  // Multiplies every step budget (rounded, at least 1 when the original was > 0).
  StagePlan Scaled(double steps_scale) const;
};

// `primary` is the single language of the early stages; `all` lists every
// training language (empty means no filter).
StagePlan BuildStagePlan(PlanScale scale, const std::string& primary = "en",
                         const std::set<std::string>& all = {});

PlanScale ParsePlanScale(const std::string& s);

// True when `param` is inside one of the frozen sets.
bool IsFrozen(const std::set<std::string>& frozen_sets, const std::string& param);

}  // namespace whale

#endif  // WHALE_TRAIN_STAGE_PLAN_H_
