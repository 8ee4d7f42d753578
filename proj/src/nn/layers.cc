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

#include "nn/layers.h"

#include <algorithm>
#include <cmath>

namespace whale {

Linear::Linear(int in, int out, Dtype dtype, Rng& rng)
    : weight_(UniformParam({in, out}, 1.0 / std::sqrt(in), dtype, rng)),
      bias_(ConstantParam({out}, 0.0, dtype)) {}

Tensor Linear::Forward(const Tensor& x) const {
  return Add(MatMul(x, weight_), bias_);
}

void Linear::VisitParams(const std::string& prefix, const ParamVisitor& visit) {
  visit(JoinName(prefix, "weight"), weight_);
  visit(JoinName(prefix, "bias"), bias_);
}

void Linear::ZeroInit() {
  weight_.mutable_buffer().Fill(0.0);
  bias_.mutable_buffer().Fill(0.0);
}

LayerNormLayer::LayerNormLayer(int dim, Dtype dtype)
    : gamma_(ConstantParam({dim}, 1.0, dtype)),
      beta_(ConstantParam({dim}, 0.0, dtype)) {}

void LayerNormLayer::VisitParams(const std::string& prefix,
                                 const ParamVisitor& visit) {
  visit(JoinName(prefix, "gamma"), gamma_);
  visit(JoinName(prefix, "beta"), beta_);
}

DepthwiseConvLayer::DepthwiseConvLayer(int channels, int kernel, Dtype dtype,
                                       Rng& rng)
    : kernel_(UniformParam({kernel, channels}, 1.0 / std::sqrt(kernel), dtype,
                           rng)),
      bias_(ConstantParam({channels}, 0.0, dtype)) {}

void DepthwiseConvLayer::VisitParams(const std::string& prefix,
                                     const ParamVisitor& visit) {
  visit(JoinName(prefix, "kernel"), kernel_);
  visit(JoinName(prefix, "bias"), bias_);
}

FeedForward::FeedForward(int dim, int hidden, double dropout, Dtype dtype,
                         Rng& rng)
    : in_(dim, hidden, dtype, rng), out_(hidden, dim, dtype, rng),
      dropout_(dropout) {}

Tensor FeedForward::Forward(const Tensor& x, const RunMode& mode) const {
  Tensor h = Swish(in_.Forward(x));
  h = Dropout(h, dropout_, mode.rng, mode.training);
  return out_.Forward(h);
}

void FeedForward::VisitParams(const std::string& prefix,
                              const ParamVisitor& visit) {
  in_.VisitParams(JoinName(prefix, "in"), visit);
  out_.VisitParams(JoinName(prefix, "out"), visit);
}

MultiHeadAttention::MultiHeadAttention(int dim, int heads, int rel_window,
                                       Dtype dtype, Rng& rng)
    : dim_(dim), heads_(heads), rel_window_(rel_window),
      wq_(dim, dim, dtype, rng), wk_(dim, dim, dtype, rng),
      wv_(dim, dim, dtype, rng), wo_(dim, dim, dtype, rng) {
  if (heads <= 0 || dim % heads != 0) {
    throw ValidationError("attention: dim " + std::to_string(dim) +
                          " not divisible by heads " + std::to_string(heads));
  }
  if (rel_window > 0) {
    rel_bias_ = ConstantParam({2 * rel_window + 1, heads}, 0.0, dtype);
  }
}

Tensor MultiHeadAttention::Forward(const Tensor& query, const Tensor& memory,
                                   bool causal) const {
  if (query.cols() != dim_ || memory.cols() != dim_) {
    throw ShapeError("attention: expected width " + std::to_string(dim_) +
                     ", got " + ShapeToString(query.shape()) + " and " +
                     ShapeToString(memory.shape()));
  }
  const int64_t tq = query.rows(), tk = memory.rows();
  const int dh = dim_ / heads_;
  const Dtype dtype = query.dtype();
  Tensor q = wq_.Forward(query);
  Tensor k = wk_.Forward(memory);
  Tensor v = wv_.Forward(memory);

  Tensor bias_all;
  if (rel_window_ > 0) {
    std::vector<int> idx(tq * tk);
    for (int64_t i = 0; i < tq; ++i) {
      for (int64_t j = 0; j < tk; ++j) {
        const int64_t off = std::clamp<int64_t>(j - i, -rel_window_, rel_window_);
        idx[i * tk + j] = static_cast<int>(off + rel_window_);
      }
    }
    bias_all = Embedding(rel_bias_, idx);  // (tq*tk) x heads
  }
  Tensor mask;
  if (causal) {
    std::vector<double> m(tq * tk, 0.0);
    for (int64_t i = 0; i < tq; ++i) {
      for (int64_t j = i + 1; j < tk; ++j) m[i * tk + j] = -1e30;
    }
    mask = Tensor::FromData({tq, tk}, m, dtype);
  }

  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  std::vector<Tensor> outs;
  outs.reserve(heads_);
  for (int h = 0; h < heads_; ++h) {
    Tensor qh = Slice(q, 1, h * dh, dh);
    Tensor kh = Slice(k, 1, h * dh, dh);
    Tensor vh = Slice(v, 1, h * dh, dh);
    Tensor scores = Scale(MatMul(qh, kh, false, true), scale);
    if (bias_all.defined()) {
      scores = Add(scores, Reshape(Slice(bias_all, 1, h, 1), {tq, tk}));
    }
    if (mask.defined()) scores = Add(scores, mask);
    outs.push_back(MatMul(Softmax(scores, 1), vh));
  }
  Tensor merged = heads_ == 1 ? outs.front() : Concat(outs, 1);
  return wo_.Forward(merged);
}

void MultiHeadAttention::VisitParams(const std::string& prefix,
                                     const ParamVisitor& visit) {
  wq_.VisitParams(JoinName(prefix, "query"), visit);
  wk_.VisitParams(JoinName(prefix, "key"), visit);
  wv_.VisitParams(JoinName(prefix, "value"), visit);
  wo_.VisitParams(JoinName(prefix, "output"), visit);
  if (rel_window_ > 0) visit(JoinName(prefix, "rel_bias"), rel_bias_);
}

Tensor SinusoidalPositions(int len, int dim, Dtype dtype) {
  std::vector<double> v(static_cast<size_t>(len) * dim);
  for (int pos = 0; pos < len; ++pos) {
    for (int i = 0; i < dim; i += 2) {
      const double freq = std::pow(10000.0, -static_cast<double>(i) / dim);
      v[pos * dim + i] = std::sin(pos * freq);
      if (i + 1 < dim) v[pos * dim + i + 1] = std::cos(pos * freq);
    }
  }
  return Tensor::FromData({len, dim}, v, dtype);
}

}  // namespace whale
