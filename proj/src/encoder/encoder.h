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

#ifndef WHALE_ENCODER_ENCODER_H_
#define WHALE_ENCODER_ENCODER_H_

#include <map>
#include <memory>
#include <vector>

#include "nn/layers.h"
#include "selfcond/selfcond.h"

namespace whale {

// {ceil(N/3), ceil(2N/3)} restricted to [1, N), deduplicated.
std::vector<int> DefaultTapLayers(int num_blocks);

struct EncoderConfig {
  int input_dim = 32;
  int num_blocks = 6;
  int hidden_dim = 32;
  int heads = 4;
  int ffn_dim = 64;
  int cgmlp_units = 32;   // U: up-projection is 2U, gate halves are U
  int cgmlp_kernel = 5;
  int merge_kernel = 3;
  int rel_window = 8;
  double dropout = 0.1;
  int vocab_size = 0;
  std::vector<int> tap_layers;  // empty: DefaultTapLayers(num_blocks)
  bool self_condition = true;

  // Throws ValidationError.
  void Validate() const;
  std::vector<int> Taps() const;
};

// Stride-2 conv (kernel 3, pad 1) -> swish -> linear; ceil(T/2) frames.
class ConvSubsample : public Module {
 public:
  ConvSubsample(int in_dim, int out_dim, Dtype dtype, Rng& rng);
  // Throws InputTooShortError for T < 2.
  Tensor Forward(const Tensor& x) const;
  void VisitParams(const std::string& prefix, const ParamVisitor& visit) override;

 private:
  int in_dim_;
  Tensor conv_w_;  // (3 * in) x out
  Tensor conv_b_;
  Linear proj_;
};

// Convolutional gating MLP: up to 2U, swish, split, LN + depthwise conv on
// the gate half, elementwise product, down to D.
class CgMlp : public Module {
 public:
  CgMlp(int dim, int units, int kernel, Dtype dtype, Rng& rng);
  Tensor Forward(const Tensor& x, const RunMode& mode, double dropout) const;
  void VisitParams(const std::string& prefix, const ParamVisitor& visit) override;

 private:
  int units_;
  Linear up_;
  LayerNormLayer gate_norm_;
  DepthwiseConvLayer gate_conv_;
  Linear down_;
};

class EBranchformerBlock : public Module {
 public:
  EBranchformerBlock(const EncoderConfig& cfg, Dtype dtype, Rng& rng);
  Tensor Forward(const Tensor& x, const RunMode& mode) const;
  void VisitParams(const std::string& prefix, const ParamVisitor& visit) override;

  // Zeroes the merge projection and the FFN output.
  void ZeroFusionAndFfn();
  // Zeroes the attention output (local branch only).
  void ZeroAttention();
  // Zeroes the cgMLP down projection (global branch only).
  void ZeroCgMlp();

 private:
  int dim_;
  double dropout_;
  LayerNormLayer ln_in_;
  MultiHeadAttention att_;
  CgMlp cgmlp_;
  DepthwiseConvLayer merge_conv_;  // over the 2D concat
  Linear merge_proj_;              // 2D -> D
  LayerNormLayer ln_ffn_;
  FeedForward ffn_;
  LayerNormLayer ln_out_;
};

struct EncoderOutput {
  Tensor latent;                          // T' x D
  std::vector<int> tap_layers;            // 1-based block indices
  std::vector<Tensor> tap_log_posteriors; // per tap, T' x V (after adaptation)
  Tensor ctc_log_posteriors;              // final CTC branch, T' x V
  int subsampled_length = 0;
};

class Encoder : public Module {
 public:
  Encoder(const EncoderConfig& cfg, Dtype dtype, Rng& rng);

  const EncoderConfig& config() const { return cfg_; }
  int num_blocks() const { return static_cast<int>(blocks_.size()); }
  const std::vector<int>& tap_layers() const { return taps_; }

  // features: T x input_dim. `mask` adapts tap posteriors before feedback.
  EncoderOutput Encode(const Tensor& features, const RunMode& mode,
                       const LanguageMask* mask = nullptr) const;

  // Appends freshly initialized blocks with zeroed fusion/FFN outputs and
  // recomputes the taps. Feedback layers follow the tap ordinal: the i-th
  // tap keeps the i-th old feedback layer when one exists; new ones start
  // with a zero projection. Throws ValidationError when shrinking.
  void Grow(int new_depth, Rng& rng);

  void VisitParams(const std::string& prefix, const ParamVisitor& visit) override;

  EBranchformerBlock& block(int i) { return *blocks_[i]; }
  FeedbackLayer& feedback(int tap_block) { return *feedback_.at(tap_block); }
  Linear& ctc_head() { return ctc_head_; }

 private:
  EncoderConfig cfg_;
  Dtype dtype_;
  ConvSubsample subsample_;
  std::vector<std::unique_ptr<EBranchformerBlock>> blocks_;
  std::vector<int> taps_;
  std::map<int, std::unique_ptr<FeedbackLayer>> feedback_;  // by block index
  Linear ctc_head_;
};

}  // namespace whale

#endif  // WHALE_ENCODER_ENCODER_H_
