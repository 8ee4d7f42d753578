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

#ifndef WHALE_TENSOR_TENSOR_H_
#define WHALE_TENSOR_TENSOR_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "base/error.h"

namespace whale {

// Training runs in 32-bit; 64-bit exists so finite-difference checks are
// meaningful.
enum class Dtype : uint8_t { kFloat32, kFloat64 };

const char* DtypeName(Dtype dtype);

using Shape = std::vector<int64_t>;

int64_t NumElements(const Shape& shape);
std::string ShapeToString(const Shape& shape);

// Flat storage of one dtype.
class Buffer {
 public:
  Buffer() = default;
  Buffer(Dtype dtype, size_t n);

  Dtype dtype() const { return dtype_; }
  size_t size() const {
    return dtype_ == Dtype::kFloat64 ? f64_.size() : f32_.size();
  }
  bool empty() const { return size() == 0; }

  template <typename T>
  T* data();
  template <typename T>
  const T* data() const;

  double Get(size_t i) const {
    return dtype_ == Dtype::kFloat64 ? f64_[i] : f32_[i];
  }
  void Set(size_t i, double v) {
    if (dtype_ == Dtype::kFloat64) {
      f64_[i] = v;
    } else {
      f32_[i] = static_cast<float>(v);
    }
  }
  void Fill(double v);
  // this += other, elementwise. Sizes and dtypes must agree.
  void AddInPlace(const Buffer& other);

 private:
  Dtype dtype_ = Dtype::kFloat32;
  std::vector<float> f32_;
  std::vector<double> f64_;
};

template <>
inline float* Buffer::data<float>() { return f32_.data(); }
template <>
inline double* Buffer::data<double>() { return f64_.data(); }
template <>
inline const float* Buffer::data<float>() const { return f32_.data(); }
template <>
inline const double* Buffer::data<double>() const { return f64_.data(); }

// Calls fn.template operator()<T>() with T = float or double.
template <typename Fn>
decltype(auto) DispatchDtype(Dtype dtype, Fn&& fn) {
  if (dtype == Dtype::kFloat64) return fn.template operator()<double>();
  return fn.template operator()<float>();
}

struct Node;
struct TensorImpl;

// Reference-counted handle to a dense row-major array. Copies share storage;
// use Clone() for a deep copy.
class Tensor {
 public:
  Tensor() = default;

  static Tensor Zeros(const Shape& shape, Dtype dtype = Dtype::kFloat32,
                      bool requires_grad = false);
  static Tensor Full(const Shape& shape, double value,
                     Dtype dtype = Dtype::kFloat32);
  static Tensor FromData(const Shape& shape, const std::vector<double>& values,
                         Dtype dtype = Dtype::kFloat32,
                         bool requires_grad = false);
  static Tensor FromBuffer(const Shape& shape, Buffer data);

  bool defined() const { return impl_ != nullptr; }
  const Shape& shape() const;
  int64_t dim(int axis) const;
  int rank() const { return static_cast<int>(shape().size()); }
  int64_t numel() const;
  Dtype dtype() const;
  // Rows / columns of a rank-2 tensor.
  int64_t rows() const { return dim(0); }
  int64_t cols() const { return dim(1); }

  const Buffer& buffer() const;
  Buffer& mutable_buffer();
  template <typename T>
  const T* data() const { return buffer().data<T>(); }

  double item() const;
  double at(int64_t flat_index) const { return buffer().Get(flat_index); }
  double at(int64_t row, int64_t col) const {
    return buffer().Get(row * cols() + col);
  }
  std::vector<double> ToVector() const;

  bool requires_grad() const;
  void set_requires_grad(bool value);
  bool is_leaf() const;
  bool has_grad() const;
  // The accumulated gradient as a tensor that does not require grad.
  Tensor grad() const;
  void ZeroGrad();

  // Reverse-mode sweep from this scalar. Leaf gradients accumulate across
  // calls; non-leaf tensors keep the gradient of the latest sweep.
  void Backward() const;

  Tensor Detach() const;
  Tensor Clone() const;
  Tensor To(Dtype dtype) const;
  // Overwrites the values in place (shape and dtype must match up to
  // dtype conversion). Used by optimizers and checkpoint loading.
  void CopyDataFrom(const Tensor& other);
  bool BitwiseEqual(const Tensor& other) const;

  std::shared_ptr<TensorImpl> impl() const { return impl_; }
  explicit Tensor(std::shared_ptr<TensorImpl> impl) : impl_(std::move(impl)) {}

 private:
  std::shared_ptr<TensorImpl> impl_;
};

// Returns one gradient buffer per input. Entries for inputs that do not
// require grad may be left empty.
using BackwardFn = std::function<std::vector<Buffer>(
    const TensorImpl& out, const Buffer& grad_out)>;

struct Node {
  std::string_view op;
  std::vector<Tensor> inputs;
  BackwardFn backward;
};

struct TensorImpl {
  Shape shape;
  Buffer data;
  Buffer grad;
  bool requires_grad = false;
  std::shared_ptr<Node> grad_fn;
};

// Thread-local switch for graph recording. Each thread owns its graphs.
class GradMode {
 public:
  static bool IsEnabled();
  static void SetEnabled(bool enabled);
};

class NoGradGuard {
 public:
  NoGradGuard() : prev_(GradMode::IsEnabled()) { GradMode::SetEnabled(false); }
  ~NoGradGuard() { GradMode::SetEnabled(prev_); }
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool prev_;
};

// The fixed set of differentiable primitives. Nodes may only be recorded
// under one of these names.
const std::vector<std::string_view>& PrimitiveCatalog();
bool IsRegisteredPrimitive(std::string_view op);

// Wraps a freshly computed buffer as an op output and records the backward
// rule when gradients are needed. Throws GraphError for names outside the
// catalog.
Tensor MakeOpResult(std::string_view op, const Shape& shape, Buffer data,
                    std::vector<Tensor> inputs, BackwardFn backward);

}  // namespace whale

#endif  // WHALE_TENSOR_TENSOR_H_
