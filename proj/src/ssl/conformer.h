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

#ifndef WHALE_SSL_CONFORMER_H_
#define WHALE_SSL_CONFORMER_H_

#include "nn/layers.h"

namespace whale {

struct ConformerConfig {
  int dim = 32;
  int heads = 4;
  int ffn_dim = 64;
  int conv_kernel = 5;
  int rel_window = 8;
  double dropout = 0.0;
};

// Pointwise -> GLU -> depthwise -> layer norm -> swish -> pointwise.
class ConvModule : public Module {
 public:
  ConvModule(int dim, int kernel, Dtype dtype, Rng& rng);
  Tensor Forward(const Tensor& x) const;
  void VisitParams(const std::string& prefix, const ParamVisitor& visit) override;
  Linear& output() { return pw2_; }

 private:
  Linear pw1_;
  DepthwiseConvLayer dw_;
  LayerNormLayer norm_;
  Linear pw2_;
};

// Macaron block: x + ffn/2, x + mhsa, x + conv, x + ffn/2, layer norm.
// Each sub-layer sees a layer-normed input.
class ConformerBlock : public Module {
 public:
  ConformerBlock(const ConformerConfig& cfg, Dtype dtype, Rng& rng);
  Tensor Forward(const Tensor& x, const RunMode& mode) const;
  void VisitParams(const std::string& prefix, const ParamVisitor& visit) override;

  // Zeros the last projection of every residual branch.
  void ZeroResidualBranches();

 private:
  ConformerConfig cfg_;
  LayerNormLayer ln_ffn1_, ln_att_, ln_conv_, ln_ffn2_, ln_out_;
  FeedForward ffn1_;
  MultiHeadAttention att_;
  ConvModule conv_;
  FeedForward ffn2_;
};

}  // namespace whale

#endif  // WHALE_SSL_CONFORMER_H_
