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

#include "decoder/decoder.h"

#include <cmath>

#include "base/error.h"

namespace whale {

void DecoderConfig::Validate() const {
  if (num_layers < 1) throw ValidationError("decoder needs at least one layer");
  if (vocab_size < 2) throw ValidationError("decoder vocab_size must be set");
  if (max_target_len < 2) throw ValidationError("decoder max_target_len must be >= 2");
  if (!(token_dropout >= 0.0 && token_dropout < 1.0)) {
    throw ValidationError("token_dropout must be in [0, 1)");
  }
  if (!(label_smoothing >= 0.0 && label_smoothing < 1.0)) {
    throw ValidationError("label_smoothing must be in [0, 1)");
  }
}

DecoderLayer::DecoderLayer(const DecoderConfig& cfg, Dtype dtype, Rng& rng)
    : dropout_(cfg.dropout),
      ln_self_(cfg.hidden_dim, dtype), ln_cross_(cfg.hidden_dim, dtype),
      ln_ffn_(cfg.hidden_dim, dtype),
      self_att_(cfg.hidden_dim, cfg.heads, 0, dtype, rng),
      cross_att_(cfg.hidden_dim, cfg.heads, 0, dtype, rng),
      ffn_(cfg.hidden_dim, cfg.ffn_dim, cfg.dropout, dtype, rng) {}

Tensor DecoderLayer::Forward(const Tensor& x, const Tensor& memory,
                             const RunMode& mode) const {
  auto drop = [&](const Tensor& t) {
    return Dropout(t, dropout_, mode.rng, mode.training);
  };
  Tensor h = ln_self_.Forward(x);
  Tensor y = Add(x, drop(self_att_.Forward(h, h, true)));
  y = Add(y, drop(cross_att_.Forward(ln_cross_.Forward(y), memory, false)));
  return Add(y, drop(ffn_.Forward(ln_ffn_.Forward(y), mode)));
}

void DecoderLayer::VisitParams(const std::string& prefix, const ParamVisitor& visit) {
  ln_self_.VisitParams(JoinName(prefix, "ln_self"), visit);
  self_att_.VisitParams(JoinName(prefix, "self_att"), visit);
  ln_cross_.VisitParams(JoinName(prefix, "ln_cross"), visit);
  cross_att_.VisitParams(JoinName(prefix, "cross_att"), visit);
  ln_ffn_.VisitParams(JoinName(prefix, "ln_ffn"), visit);
  ffn_.VisitParams(JoinName(prefix, "ffn"), visit);
}

std::vector<int> WrapTarget(int sos, int language_token, std::span<const int> tokens,
                            int eos) {
  std::vector<int> out = {sos, language_token};
  out.insert(out.end(), tokens.begin(), tokens.end());
  out.push_back(eos);
  return out;
}

Decoder::Decoder(const DecoderConfig& cfg, Dtype dtype, Rng& rng)
    : cfg_(cfg), dtype_(dtype),
      embedding_(UniformParam({cfg.vocab_size, cfg.hidden_dim}, 1.0, dtype, rng)),
      ln_final_(cfg.hidden_dim, dtype),
      out_(cfg.hidden_dim, cfg.vocab_size, dtype, rng),
      positions_(SinusoidalPositions(cfg.max_target_len, cfg.hidden_dim, dtype)) {
  cfg_.Validate();
  for (int i = 0; i < cfg.num_layers; ++i) {
    layers_.push_back(std::make_unique<DecoderLayer>(cfg, dtype, rng));
  }
}

Tensor Decoder::Forward(const Tensor& memory, std::span<const int> inputs,
                        const RunMode& mode) const {
  const int64_t L = static_cast<int64_t>(inputs.size());
  if (L < 1) throw ValidationError("decoder input is empty");
  if (L > cfg_.max_target_len) {
    throw LengthError("decoder prefix of " + std::to_string(L) +
                      " tokens exceeds max_target_len " +
                      std::to_string(cfg_.max_target_len));
  }
  if (memory.rank() != 2 || memory.cols() != cfg_.hidden_dim) {
    throw ShapeError("decoder memory must be T x " + std::to_string(cfg_.hidden_dim) +
                     ", got " + ShapeToString(memory.shape()));
  }
  for (int id : inputs) {
    if (id < 0 || id >= cfg_.vocab_size) {
      throw VocabError("decoder input id " + std::to_string(id) + " out of range");
    }
  }
  std::vector<int> ids(inputs.begin(), inputs.end());
  if (mode.training && cfg_.token_dropout > 0.0 && mode.rng) {
    for (size_t i = cfg_.prompt_len; i < ids.size(); ++i) {
      if (mode.rng->Bernoulli(cfg_.token_dropout)) {
        ids[i] = 1 + static_cast<int>(mode.rng->UniformInt(cfg_.vocab_size - 1));
      }
    }
  }
  Tensor mem = memory;
  if (cfg_.memory_positions) {
    mem = Add(memory, SinusoidalPositions(static_cast<int>(memory.rows()), cfg_.hidden_dim,
                                          memory.dtype()));
  }
  Tensor x = Add(Embedding(embedding_, ids), Slice(positions_, 0, 0, L));
  x = Dropout(x, cfg_.dropout, mode.rng, mode.training);
  for (const auto& layer : layers_) x = layer->Forward(x, mem, mode);
  return out_.Forward(ln_final_.Forward(x));
}

std::vector<double> Decoder::DecodeStep(const EncoderOutput& enc,
                                        std::span<const int> prefix) const {
  NoGradGuard guard;
  Tensor logits = Forward(enc.latent, prefix, RunMode::Eval());
  Tensor last = Slice(logits, 0, logits.rows() - 1, 1);
  return LogSoftmax(last, 1).ToVector();
}

Tensor Decoder::TeacherForcedLoss(const EncoderOutput& enc,
                                  std::span<const int> wrapped,
                                  const RunMode& mode) const {
  if (wrapped.size() < 2) {
    throw ValidationError("teacher forcing needs a wrapped target of length >= 2");
  }
  std::span<const int> inputs = wrapped.subspan(0, wrapped.size() - 1);
  std::span<const int> targets = wrapped.subspan(1);
  const Tensor logits = Forward(enc.latent, inputs, mode);
  const Tensor ce = CrossEntropy(logits, targets);
  const double eps = cfg_.label_smoothing;
  if (eps <= 0.0) return ce;
  // Mean over L x V of -log p is the per-token cross-entropy to a uniform target.
  const Tensor uniform = Scale(Mean(LogSoftmax(logits, 1)), -1.0);
  return Add(Scale(ce, 1.0 - eps), Scale(uniform, eps));
}

void Decoder::VisitParams(const std::string& prefix, const ParamVisitor& visit) {
  visit(JoinName(prefix, "embedding"), embedding_);
  for (size_t i = 0; i < layers_.size(); ++i) {
    layers_[i]->VisitParams(JoinName(prefix, "layers." + std::to_string(i)), visit);
  }
  ln_final_.VisitParams(JoinName(prefix, "ln_final"), visit);
  out_.VisitParams(JoinName(prefix, "out"), visit);
}

}  // namespace whale
