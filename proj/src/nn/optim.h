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

#ifndef WHALE_NN_OPTIM_H_
#define WHALE_NN_OPTIM_H_

#include <functional>
#include <string>
#include <vector>

#include "tensor/checkpoint.h"

namespace whale {

// Linear warmup to `peak`, then peak * sqrt(warmup / step). Steps are 1-based.
struct LrSchedule {
  double peak = 1e-3;
  int warmup = 100;
  double At(int step) const;
};

struct AdamWConfig {
  double beta1 = 0.9;
  double beta2 = 0.98;
  double eps = 1e-8;
  double weight_decay = 0.01;
  double clip_norm = 5.0;  // <= 0 disables
};

// Adam with decoupled weight decay. Moments are kept in the parameter dtype
// so the state round-trips exactly through float32 checkpoints.
class AdamW {
 public:
  using FrozenFn = std::function<bool(const std::string& name)>;

  AdamW(NamedTensors params, AdamWConfig cfg = {});

  // Clips the global gradient norm over the non-frozen parameters, then
  // updates them. Parameters without a gradient are left alone.
  // Returns the pre-clip gradient norm.
  double Step(double lr, const FrozenFn& frozen = nullptr);

  // Zeroes moments and the bias-correction counter.
  void Reset();

  int steps() const { return steps_; }
  NamedTensors ExportState() const;
  void ImportState(const NamedTensors& state);

  const NamedTensors& params() const { return params_; }

 private:
  NamedTensors params_;
  AdamWConfig cfg_;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
  int steps_ = 0;
};

}  // namespace whale

#endif  // WHALE_NN_OPTIM_H_
