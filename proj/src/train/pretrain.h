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

#ifndef WHALE_TRAIN_PRETRAIN_H_
#define WHALE_TRAIN_PRETRAIN_H_

#include <string>
#include <vector>

#include "data/manifest.h"
#include "nn/optim.h"
#include "ssl/frontend.h"

namespace whale {

struct PretrainConfig {
  int steps = 400;
  int batch_utts = 4;
  LrSchedule lr{2e-3, 50};
  uint64_t seed = 1;
  int log_every = 10;
  AdamWConfig adamw;

  void Validate() const;
};

struct PretrainStep {
  int step = 0;
  double lr = 0;
  SslMetrics metrics;  // batch means; accuracy weighted by masked frames
};

// Masked-prediction accuracy over `data` with a fixed masking seed.
double EvaluateSslAccuracy(const SslFrontend& ssl, const Manifest& data, uint64_t seed);

// Trains the SSL objective on `data`. Appends one JSON line per log_every
// steps to metrics_path (when non-empty).
std::vector<PretrainStep> RunSslPretraining(SslFrontend& ssl, const Manifest& data,
                                            const PretrainConfig& cfg,
                                            const std::string& metrics_path);

}  // namespace whale

#endif  // WHALE_TRAIN_PRETRAIN_H_
