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

#ifndef WHALE_TENSOR_OPS_H_
#define WHALE_TENSOR_OPS_H_

#include <span>
#include <vector>

#include "base/rng.h"
#include "tensor/tensor.h"

namespace whale {

// Differentiable primitives. All matrix ops take rank-2 row-major tensors;
// "last axis" ops accept any rank.

// op(a) x op(b) where op transposes when the flag is set.
Tensor MatMul(const Tensor& a, const Tensor& b, bool transpose_a = false,
              bool transpose_b = false);

// Elementwise with numpy-style broadcasting.
Tensor Add(const Tensor& a, const Tensor& b);
Tensor Mul(const Tensor& a, const Tensor& b);
Tensor Sub(const Tensor& a, const Tensor& b);
Tensor Scale(const Tensor& x, double factor);

Tensor Softmax(const Tensor& x, int axis = -1);
Tensor LogSoftmax(const Tensor& x, int axis = -1);

// Normalizes over the last axis. gamma/beta may be undefined tensors.
Tensor LayerNorm(const Tensor& x, const Tensor& gamma = Tensor(),
                 const Tensor& beta = Tensor(), double eps = 1e-5);

// x: T x C, kernel: K x C (K odd), zero "same" padding. bias optional (C).
Tensor DepthwiseConv1d(const Tensor& x, const Tensor& kernel,
                       const Tensor& bias = Tensor());

// x: T x Cin, weight: (K*Cin) x Cout with row index k*Cin + c_in, bias Cout.
// Output length floor((T + 2*pad - K) / stride) + 1.
Tensor Conv1d(const Tensor& x, const Tensor& weight, const Tensor& bias,
              int kernel, int stride, int pad);

// Splits the last axis in halves (a, b) and returns a * sigmoid(b).
Tensor Glu(const Tensor& x);
Tensor Sigmoid(const Tensor& x);
Tensor Swish(const Tensor& x);
Tensor Relu(const Tensor& x);

// Row gather: table N x E, returns ids.size() x E.
Tensor Embedding(const Tensor& table, std::span<const int> ids);

Tensor Concat(const std::vector<Tensor>& parts, int axis);
Tensor Slice(const Tensor& x, int axis, int64_t start, int64_t length);
Tensor Reshape(const Tensor& x, const Shape& shape);

Tensor Sum(const Tensor& x);
Tensor Mean(const Tensor& x);

// Mean over rows of -log_softmax(logits)[row, target[row]].
Tensor CrossEntropy(const Tensor& logits, std::span<const int> targets);

// Inverted dropout; identity (same handle) when !training or p == 0.
Tensor Dropout(const Tensor& x, double p, Rng* rng, bool training);

}  // namespace whale

#endif  // WHALE_TENSOR_OPS_H_
