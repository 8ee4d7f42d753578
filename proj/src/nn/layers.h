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

#ifndef WHALE_NN_LAYERS_H_
#define WHALE_NN_LAYERS_H_

#include <memory>

#include "nn/module.h"
#include "tensor/ops.h"

namespace whale {

class Linear : public Module {
 public:
  Linear(int in, int out, Dtype dtype, Rng& rng);
  Tensor Forward(const Tensor& x) const;
  void VisitParams(const std::string& prefix, const ParamVisitor& visit) override;
  void ZeroInit();

  Tensor& weight() { return weight_; }
  Tensor& bias() { return bias_; }

 private:
  Tensor weight_;  // in x out
  Tensor bias_;    // out
};

class LayerNormLayer : public Module {
 public:
  LayerNormLayer(int dim, Dtype dtype);
  Tensor Forward(const Tensor& x) const { return LayerNorm(x, gamma_, beta_); }
  void VisitParams(const std::string& prefix, const ParamVisitor& visit) override;

 private:
  Tensor gamma_;
  Tensor beta_;
};

class DepthwiseConvLayer : public Module {
 public:
  DepthwiseConvLayer(int channels, int kernel, Dtype dtype, Rng& rng);
  Tensor Forward(const Tensor& x) const {
    return DepthwiseConv1d(x, kernel_, bias_);
  }
  void VisitParams(const std::string& prefix, const ParamVisitor& visit) override;

 private:
  Tensor kernel_;  // K x C
  Tensor bias_;
};

// Linear -> swish -> dropout -> linear.
class FeedForward : public Module {
 public:
  FeedForward(int dim, int hidden, double dropout, Dtype dtype, Rng& rng);
  Tensor Forward(const Tensor& x, const RunMode& mode) const;
  void VisitParams(const std::string& prefix, const ParamVisitor& visit) override;
  Linear& output() { return out_; }

 private:
  Linear in_;
  Linear out_;
  double dropout_;
};

// Multi-head scaled dot-product attention. With rel_window > 0 a learned
// per-head bias indexed by the clipped offset (key - query) is added to the
// scores.
class MultiHeadAttention : public Module {
 public:
  MultiHeadAttention(int dim, int heads, int rel_window, Dtype dtype, Rng& rng);

  // query: Tq x D, memory: Tk x D. With `causal`, query i only sees keys <= i.
  Tensor Forward(const Tensor& query, const Tensor& memory, bool causal) const;
  void VisitParams(const std::string& prefix, const ParamVisitor& visit) override;

  Linear& value_proj() { return wv_; }
  Linear& output_proj() { return wo_; }

 private:
  int dim_;
  int heads_;
  int rel_window_;
  Linear wq_, wk_, wv_, wo_;
  Tensor rel_bias_;  // (2 * rel_window + 1) x heads
};

// Fixed sinusoidal position table, rows 0..len-1.
Tensor SinusoidalPositions(int len, int dim, Dtype dtype);

}  // namespace whale

#endif  // WHALE_NN_LAYERS_H_
