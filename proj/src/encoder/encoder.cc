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

#include "encoder/encoder.h"

#include <algorithm>
#include <cmath>

#include "base/error.h"

namespace whale {

std::vector<int> DefaultTapLayers(int num_blocks) {
  std::vector<int> taps;
  for (int k : {(num_blocks + 2) / 3, (2 * num_blocks + 2) / 3}) {
    if (k >= 1 && k < num_blocks &&
        std::find(taps.begin(), taps.end(), k) == taps.end()) {
      taps.push_back(k);
    }
  }
  return taps;
}

std::vector<int> EncoderConfig::Taps() const {
  return tap_layers.empty() ? DefaultTapLayers(num_blocks) : tap_layers;
}

void EncoderConfig::Validate() const {
  auto fail = [](const std::string& msg) {
    throw ValidationError("encoder config: " + msg);
  };
  if (num_blocks < 1 || hidden_dim < 1 || input_dim < 1) fail("sizes must be positive");
  if (vocab_size < 2) fail("vocab_size must be set");
  if (cgmlp_kernel % 2 == 0 || merge_kernel % 2 == 0) fail("kernels must be odd");
  const std::vector<int> taps = Taps();
  for (size_t i = 0; i < taps.size(); ++i) {
    if (taps[i] < 1 || taps[i] >= num_blocks) fail("tap layers must lie in [1, N)");
    if (i > 0 && taps[i] <= taps[i - 1]) fail("tap layers must be increasing");
  }
}

ConvSubsample::ConvSubsample(int in_dim, int out_dim, Dtype dtype, Rng& rng)
    : in_dim_(in_dim),
      conv_w_(UniformParam({3 * in_dim, out_dim}, 1.0 / std::sqrt(3.0 * in_dim),
                           dtype, rng)),
      conv_b_(ConstantParam({out_dim}, 0.0, dtype)),
      proj_(out_dim, out_dim, dtype, rng) {}

Tensor ConvSubsample::Forward(const Tensor& x) const {
  if (x.rank() != 2 || x.cols() != in_dim_) {
    throw ShapeError("subsampling expects T x " + std::to_string(in_dim_) +
                     ", got " + ShapeToString(x.shape()));
  }
  if (x.rows() < 2) {
    throw InputTooShortError("subsampling needs at least 2 frames, got " +
                             std::to_string(x.rows()));
  }
  return proj_.Forward(Swish(Conv1d(x, conv_w_, conv_b_, 3, 2, 1)));
}

void ConvSubsample::VisitParams(const std::string& prefix,
                                const ParamVisitor& visit) {
  visit(JoinName(prefix, "conv.weight"), conv_w_);
  visit(JoinName(prefix, "conv.bias"), conv_b_);
  proj_.VisitParams(JoinName(prefix, "proj"), visit);
}

CgMlp::CgMlp(int dim, int units, int kernel, Dtype dtype, Rng& rng)
    : units_(units), up_(dim, 2 * units, dtype, rng), gate_norm_(units, dtype),
      gate_conv_(units, kernel, dtype, rng), down_(units, dim, dtype, rng) {}

Tensor CgMlp::Forward(const Tensor& x, const RunMode& mode, double dropout) const {
  Tensor h = Swish(up_.Forward(x));
  Tensor a = Slice(h, 1, 0, units_);
  Tensor b = gate_conv_.Forward(gate_norm_.Forward(Slice(h, 1, units_, units_)));
  Tensor g = Dropout(Mul(a, b), dropout, mode.rng, mode.training);
  return down_.Forward(g);
}

void CgMlp::VisitParams(const std::string& prefix, const ParamVisitor& visit) {
  up_.VisitParams(JoinName(prefix, "up"), visit);
  gate_norm_.VisitParams(JoinName(prefix, "gate_norm"), visit);
  gate_conv_.VisitParams(JoinName(prefix, "gate_conv"), visit);
  down_.VisitParams(JoinName(prefix, "down"), visit);
}

EBranchformerBlock::EBranchformerBlock(const EncoderConfig& cfg, Dtype dtype,
                                       Rng& rng)
    : dim_(cfg.hidden_dim), dropout_(cfg.dropout),
      ln_in_(cfg.hidden_dim, dtype),
      att_(cfg.hidden_dim, cfg.heads, cfg.rel_window, dtype, rng),
      cgmlp_(cfg.hidden_dim, cfg.cgmlp_units, cfg.cgmlp_kernel, dtype, rng),
      merge_conv_(2 * cfg.hidden_dim, cfg.merge_kernel, dtype, rng),
      merge_proj_(2 * cfg.hidden_dim, cfg.hidden_dim, dtype, rng),
      ln_ffn_(cfg.hidden_dim, dtype),
      ffn_(cfg.hidden_dim, cfg.ffn_dim, cfg.dropout, dtype, rng),
      ln_out_(cfg.hidden_dim, dtype) {}

Tensor EBranchformerBlock::Forward(const Tensor& x, const RunMode& mode) const {
  if (x.rank() != 2 || x.cols() != dim_) {
    throw ShapeError("e-branchformer block expects T x " + std::to_string(dim_) +
                     ", got " + ShapeToString(x.shape()));
  }
  auto drop = [&](const Tensor& t) {
    return Dropout(t, dropout_, mode.rng, mode.training);
  };
  Tensor h = ln_in_.Forward(x);
  Tensor global = att_.Forward(h, h, false);
  Tensor local = cgmlp_.Forward(h, mode, dropout_);
  Tensor cat = Concat({global, local}, 1);
  Tensor fused = merge_proj_.Forward(Add(cat, merge_conv_.Forward(cat)));
  Tensor y = Add(x, drop(fused));
  y = Add(y, drop(ffn_.Forward(ln_ffn_.Forward(y), mode)));
  return ln_out_.Forward(y);
}

void EBranchformerBlock::VisitParams(const std::string& prefix,
                                     const ParamVisitor& visit) {
  ln_in_.VisitParams(JoinName(prefix, "ln_in"), visit);
  att_.VisitParams(JoinName(prefix, "att"), visit);
  cgmlp_.VisitParams(JoinName(prefix, "cgmlp"), visit);
  merge_conv_.VisitParams(JoinName(prefix, "merge_conv"), visit);
  merge_proj_.VisitParams(JoinName(prefix, "merge_proj"), visit);
  ln_ffn_.VisitParams(JoinName(prefix, "ln_ffn"), visit);
  ffn_.VisitParams(JoinName(prefix, "ffn"), visit);
  ln_out_.VisitParams(JoinName(prefix, "ln_out"), visit);
}

void EBranchformerBlock::ZeroFusionAndFfn() {
  merge_proj_.ZeroInit();
  ffn_.output().ZeroInit();
}

void EBranchformerBlock::ZeroAttention() { att_.output_proj().ZeroInit(); }

void EBranchformerBlock::ZeroCgMlp() {
  NamedTensors params = NamedParameters(cgmlp_);
  for (auto& [name, p] : params) {
    if (name.rfind("down.", 0) == 0) p.mutable_buffer().Fill(0.0);
  }
}

Encoder::Encoder(const EncoderConfig& cfg, Dtype dtype, Rng& rng)
    : cfg_(cfg), dtype_(dtype),
      subsample_(cfg.input_dim, cfg.hidden_dim, dtype, rng),
      ctc_head_(cfg.hidden_dim, cfg.vocab_size, dtype, rng) {
  cfg_.Validate();
  for (int i = 0; i < cfg.num_blocks; ++i) {
    blocks_.push_back(std::make_unique<EBranchformerBlock>(cfg_, dtype, rng));
  }
  taps_ = cfg_.Taps();
  for (int k : taps_) {
    feedback_[k] = std::make_unique<FeedbackLayer>(cfg.vocab_size, cfg.hidden_dim,
                                                   dtype, rng);
  }
}

EncoderOutput Encoder::Encode(const Tensor& features, const RunMode& mode,
                              const LanguageMask* mask) const {
  EncoderOutput out;
  Tensor h = subsample_.Forward(features);
  out.subsampled_length = static_cast<int>(h.rows());
  out.tap_layers = taps_;
  for (size_t i = 0; i < blocks_.size(); ++i) {
    h = blocks_[i]->Forward(h, mode);
    const int k = static_cast<int>(i) + 1;
    auto fb = feedback_.find(k);
    if (fb == feedback_.end()) continue;
    Tensor lp = LogSoftmax(ctc_head_.Forward(h), 1);
    if (mask != nullptr) lp = ApplyAdaptation(lp, *mask);
    out.tap_log_posteriors.push_back(lp);
    h = cfg_.self_condition ? fb->second->Forward(h, lp) : fb->second->norm().Forward(h);
  }
  out.latent = h;
  out.ctc_log_posteriors = LogSoftmax(ctc_head_.Forward(h), 1);
  return out;
}

void Encoder::Grow(int new_depth, Rng& rng) {
  const int old_depth = num_blocks();
  if (new_depth < old_depth) {
    throw ValidationError("cannot shrink encoder from " + std::to_string(old_depth) +
                          " to " + std::to_string(new_depth) + " blocks");
  }
  if (new_depth == old_depth) return;
  EncoderConfig next = cfg_;
  next.num_blocks = new_depth;
  next.tap_layers.clear();
  next.Validate();
  for (int i = old_depth; i < new_depth; ++i) {
    auto block = std::make_unique<EBranchformerBlock>(next, dtype_, rng);
    block->ZeroFusionAndFfn();
    blocks_.push_back(std::move(block));
  }
  const std::vector<int> new_taps = next.Taps();
  std::vector<std::unique_ptr<FeedbackLayer>> old_layers;
  for (int k : taps_) old_layers.push_back(std::move(feedback_.at(k)));
  feedback_.clear();
  for (size_t i = 0; i < new_taps.size(); ++i) {
    if (i < old_layers.size()) {
      feedback_[new_taps[i]] = std::move(old_layers[i]);
    } else {
      auto fb = std::make_unique<FeedbackLayer>(cfg_.vocab_size, cfg_.hidden_dim,
                                                dtype_, rng);
      fb->projection().ZeroInit();
      feedback_[new_taps[i]] = std::move(fb);
    }
  }
  taps_ = new_taps;
  cfg_ = next;
}

void Encoder::VisitParams(const std::string& prefix, const ParamVisitor& visit) {
  subsample_.VisitParams(JoinName(prefix, "subsample"), visit);
  for (size_t i = 0; i < blocks_.size(); ++i) {
    blocks_[i]->VisitParams(JoinName(prefix, "blocks." + std::to_string(i)), visit);
  }
  // Named by tap ordinal so a layer keeps its name when growth moves it.
  for (size_t i = 0; i < taps_.size(); ++i) {
    feedback_.at(taps_[i])->VisitParams(
        JoinName(prefix, "feedback." + std::to_string(i)), visit);
  }
  ctc_head_.VisitParams(JoinName(prefix, "ctc_head"), visit);
}

}  // namespace whale
