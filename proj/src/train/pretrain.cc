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

#include "train/pretrain.h"

#include <fstream>

#include "base/error.h"
#include "data/features.h"
#include "json.hpp"
#include "nn/module.h"
#include "tensor/ops.h"

namespace whale {

namespace {

std::vector<Tensor> LoadAll(const Manifest& data) {
  std::vector<Tensor> out;
  for (const ManifestEntry& e : data.entries) {
    out.push_back(ReadFeatures(data.ResolvePath(e)).ToTensor());
  }
  return out;
}

}  // namespace

void PretrainConfig::Validate() const {
  if (steps < 0) throw ValidationError("pretrain steps must be >= 0");
  if (batch_utts < 1) throw ValidationError("pretrain batch_utts must be >= 1");
  if (log_every < 1) throw ValidationError("log_every must be >= 1");
}

double EvaluateSslAccuracy(const SslFrontend& ssl, const Manifest& data, uint64_t seed) {
  NoGradGuard no_grad;
  Rng rng(seed);
  double correct = 0;
  long masked = 0;
  for (const Tensor& x : LoadAll(data)) {
    SslMetrics m;
    ssl.Loss(x, rng, false, &m);
    correct += m.accuracy * m.num_masked;
    masked += m.num_masked;
  }
  return masked ? correct / static_cast<double>(masked) : 0.0;
}

std::vector<PretrainStep> RunSslPretraining(SslFrontend& ssl, const Manifest& data,
                                            const PretrainConfig& cfg,
                                            const std::string& metrics_path) {
  cfg.Validate();
  if (data.entries.empty()) throw ValidationError("pretraining corpus is empty");
  const std::vector<Tensor> feats = LoadAll(data);
  AdamW opt(NamedParameters(ssl), cfg.adamw);
  Rng rng(DeriveSeed(cfg.seed, 0x551));
  std::ofstream metrics;
  if (!metrics_path.empty()) {
    metrics.open(metrics_path, std::ios::app);
    if (!metrics) throw IoError("cannot write " + metrics_path);
  }
  std::vector<int> order(feats.size());
  size_t cursor = order.size();
  std::vector<PretrainStep> history;
  for (int step = 1; step <= cfg.steps; ++step) {
    ZeroGrads(ssl);
    PretrainStep ps;
    ps.step = step;
    ps.lr = cfg.lr.At(step);
    Tensor total;
    double correct = 0;
    int n = 0;
    for (int b = 0; b < cfg.batch_utts; ++b) {
      if (cursor >= order.size()) {
        for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
        for (size_t i = order.size() - 1; i > 0; --i) {
          std::swap(order[i], order[rng.UniformInt(i + 1)]);
        }
        cursor = 0;
      }
      SslMetrics m;
      Tensor l = ssl.Loss(feats[order[cursor++]], rng, true, &m);
      total = total.defined() ? Add(total, l) : l;
      ps.metrics.loss += m.loss;
      ps.metrics.contrastive += m.contrastive;
      ps.metrics.mlm += m.mlm;
      correct += m.accuracy * m.num_masked;
      ps.metrics.num_masked += m.num_masked;
      ++n;
    }
    Scale(total, 1.0 / n).Backward();
    opt.Step(ps.lr);
    ps.metrics.loss /= n;
    ps.metrics.contrastive /= n;
    ps.metrics.mlm /= n;
    ps.metrics.accuracy = ps.metrics.num_masked ? correct / ps.metrics.num_masked : 0.0;
    history.push_back(ps);
    if (metrics.is_open() && (step % cfg.log_every == 0 || step == cfg.steps)) {
      nlohmann::ordered_json j;
      j["step"] = step;
      j["loss"] = ps.metrics.loss;
      j["contrastive"] = ps.metrics.contrastive;
      j["mlm"] = ps.metrics.mlm;
      j["accuracy"] = ps.metrics.accuracy;
      j["lr"] = ps.lr;
      metrics << j.dump() << "\n";
    }
  }
  return history;
}

}  // namespace whale
