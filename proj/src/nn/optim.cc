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

#include "nn/optim.h"

#include <cmath>

#include "base/error.h"

namespace whale {

double LrSchedule::At(int step) const {
  if (step < 1) step = 1;
  if (warmup <= 0) return peak;
  if (step <= warmup) return peak * step / warmup;
  return peak * std::sqrt(static_cast<double>(warmup) / step);
}

AdamW::AdamW(NamedTensors params, AdamWConfig cfg)
    : params_(std::move(params)), cfg_(cfg) {
  for (const auto& [name, p] : params_) {
    m_.push_back(Tensor::Zeros(p.shape(), p.dtype()));
    v_.push_back(Tensor::Zeros(p.shape(), p.dtype()));
  }
}

void AdamW::Reset() {
  for (auto& t : m_) t.mutable_buffer().Fill(0.0);
  for (auto& t : v_) t.mutable_buffer().Fill(0.0);
  steps_ = 0;
}

double AdamW::Step(double lr, const FrozenFn& frozen) {
  std::vector<size_t> active;
  double sq = 0.0;
  for (size_t i = 0; i < params_.size(); ++i) {
    const auto& [name, p] = params_[i];
    if (!p.requires_grad() || !p.has_grad()) continue;
    if (frozen && frozen(name)) continue;
    active.push_back(i);
    const Buffer& g = p.impl()->grad;
    for (size_t k = 0; k < g.size(); ++k) sq += g.Get(k) * g.Get(k);
  }
  const double norm = std::sqrt(sq);
  if (!std::isfinite(norm)) throw NumericError("non-finite gradient norm");
  const double clip =
      cfg_.clip_norm > 0 && norm > cfg_.clip_norm ? cfg_.clip_norm / norm : 1.0;
  ++steps_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, steps_);
  const double bc2 = 1.0 - std::pow(cfg_.beta2, steps_);
  for (size_t i : active) {
    Tensor& p = params_[i].second;
    const Buffer& g = p.impl()->grad;
    Buffer& w = p.mutable_buffer();
    Buffer& m = m_[i].mutable_buffer();
    Buffer& v = v_[i].mutable_buffer();
    for (size_t k = 0; k < w.size(); ++k) {
      const double gk = g.Get(k) * clip;
      const double mk = cfg_.beta1 * m.Get(k) + (1 - cfg_.beta1) * gk;
      const double vk = cfg_.beta2 * v.Get(k) + (1 - cfg_.beta2) * gk * gk;
      m.Set(k, mk);
      v.Set(k, vk);
      const double update = (m.Get(k) / bc1) / (std::sqrt(v.Get(k) / bc2) + cfg_.eps);
      const double wk = w.Get(k);
      w.Set(k, wk - lr * (update + cfg_.weight_decay * wk));
    }
  }
  return norm;
}

NamedTensors AdamW::ExportState() const {
  NamedTensors out;
  out.emplace_back("step", Tensor::FromData({1}, {static_cast<double>(steps_)}));
  for (size_t i = 0; i < params_.size(); ++i) {
    out.emplace_back("m." + params_[i].first, m_[i]);
    out.emplace_back("v." + params_[i].first, v_[i]);
  }
  return out;
}

void AdamW::ImportState(const NamedTensors& state) {
  const Tensor step = FindTensor(state, "step");
  if (!step.defined()) throw IoError("optimizer state lacks 'step'");
  steps_ = static_cast<int>(step.item());
  for (size_t i = 0; i < params_.size(); ++i) {
    const Tensor m = FindTensor(state, "m." + params_[i].first);
    const Tensor v = FindTensor(state, "v." + params_[i].first);
    if (!m.defined() || !v.defined()) {
      // Parameters added by growth start with empty moments.
      m_[i].mutable_buffer().Fill(0.0);
      v_[i].mutable_buffer().Fill(0.0);
      continue;
    }
    m_[i].CopyDataFrom(m);
    v_[i].CopyDataFrom(v);
  }
}

}  // namespace whale
