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

#include "tensor/tensor.h"

#include <algorithm>
#include <cstring>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace whale {

const char* DtypeName(Dtype dtype) {
  return dtype == Dtype::kFloat64 ? "float64" : "float32";
}

int64_t NumElements(const Shape& shape) {
  int64_t n = 1;
  for (int64_t d : shape) n *= d;
  return n;
}

std::string ShapeToString(const Shape& shape) {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ", ";
    os << shape[i];
  }
  os << "]";
  return os.str();
}

Buffer::Buffer(Dtype dtype, size_t n) : dtype_(dtype) {
  if (dtype == Dtype::kFloat64) {
    f64_.assign(n, 0.0);
  } else {
    f32_.assign(n, 0.0f);
  }
}

void Buffer::Fill(double v) {
  if (dtype_ == Dtype::kFloat64) {
    std::fill(f64_.begin(), f64_.end(), v);
  } else {
    std::fill(f32_.begin(), f32_.end(), static_cast<float>(v));
  }
}

void Buffer::AddInPlace(const Buffer& other) {
  if (other.dtype_ != dtype_ || other.size() != size()) {
    throw ShapeError("gradient buffer mismatch during accumulation");
  }
  DispatchDtype(dtype_, [&]<typename T>() {
    T* dst = data<T>();
    const T* src = other.data<T>();
    for (size_t i = 0, n = size(); i < n; ++i) dst[i] += src[i];
  });
}

namespace {

void CheckShape(const Shape& shape) {
  for (int64_t d : shape) {
    if (d <= 0) {
      throw ShapeError("tensor extents must be positive, got " +
                       ShapeToString(shape));
    }
  }
}

thread_local bool g_grad_enabled = true;

}  // namespace

bool GradMode::IsEnabled() { return g_grad_enabled; }
void GradMode::SetEnabled(bool enabled) { g_grad_enabled = enabled; }

Tensor Tensor::Zeros(const Shape& shape, Dtype dtype, bool requires_grad) {
  CheckShape(shape);
  auto impl = std::make_shared<TensorImpl>();
  impl->shape = shape;
  impl->data = Buffer(dtype, NumElements(shape));
  impl->requires_grad = requires_grad;
  return Tensor(std::move(impl));
}

Tensor Tensor::Full(const Shape& shape, double value, Dtype dtype) {
  Tensor t = Zeros(shape, dtype);
  t.impl_->data.Fill(value);
  return t;
}

Tensor Tensor::FromData(const Shape& shape, const std::vector<double>& values,
                        Dtype dtype, bool requires_grad) {
  CheckShape(shape);
  if (static_cast<int64_t>(values.size()) != NumElements(shape)) {
    throw ShapeError("FromData: " + std::to_string(values.size()) +
                     " values for shape " + ShapeToString(shape));
  }
  Tensor t = Zeros(shape, dtype, requires_grad);
  for (size_t i = 0; i < values.size(); ++i) t.impl_->data.Set(i, values[i]);
  return t;
}

Tensor Tensor::FromBuffer(const Shape& shape, Buffer data) {
  CheckShape(shape);
  if (static_cast<int64_t>(data.size()) != NumElements(shape)) {
    throw ShapeError("FromBuffer: buffer size does not match shape " +
                     ShapeToString(shape));
  }
  auto impl = std::make_shared<TensorImpl>();
  impl->shape = shape;
  impl->data = std::move(data);
  return Tensor(std::move(impl));
}

const Shape& Tensor::shape() const { return impl_->shape; }

int64_t Tensor::dim(int axis) const {
  const Shape& s = impl_->shape;
  if (axis < 0) axis += static_cast<int>(s.size());
  if (axis < 0 || axis >= static_cast<int>(s.size())) {
    throw ShapeError("axis " + std::to_string(axis) + " out of range for " +
                     ShapeToString(s));
  }
  return s[axis];
}

int64_t Tensor::numel() const { return NumElements(impl_->shape); }
Dtype Tensor::dtype() const { return impl_->data.dtype(); }
const Buffer& Tensor::buffer() const { return impl_->data; }
Buffer& Tensor::mutable_buffer() { return impl_->data; }

double Tensor::item() const {
  if (numel() != 1) {
    throw ShapeError("item() on tensor of shape " + ShapeToString(shape()));
  }
  return impl_->data.Get(0);
}

std::vector<double> Tensor::ToVector() const {
  std::vector<double> out(numel());
  for (size_t i = 0; i < out.size(); ++i) out[i] = impl_->data.Get(i);
  return out;
}

bool Tensor::requires_grad() const { return impl_ && impl_->requires_grad; }
void Tensor::set_requires_grad(bool value) { impl_->requires_grad = value; }
bool Tensor::is_leaf() const { return impl_->grad_fn == nullptr; }
bool Tensor::has_grad() const { return !impl_->grad.empty(); }

Tensor Tensor::grad() const {
  if (!has_grad()) return Tensor();
  return FromBuffer(impl_->shape, impl_->grad);
}

void Tensor::ZeroGrad() { impl_->grad = Buffer(); }

void Tensor::Backward() const {
  if (numel() != 1) {
    throw ShapeError("backward() needs a scalar loss, got shape " +
                     ShapeToString(shape()));
  }
  if (!impl_->requires_grad) {
    throw GraphError("backward() on a tensor that does not require grad");
  }

  // Iterative post-order DFS: every node appears after all of its inputs.
  std::vector<TensorImpl*> order;
  std::unordered_set<TensorImpl*> visited;
  std::vector<std::pair<TensorImpl*, size_t>> stack;
  stack.emplace_back(impl_.get(), 0);
  visited.insert(impl_.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    const size_t num_inputs = node->grad_fn ? node->grad_fn->inputs.size() : 0;
    if (next < num_inputs) {
      TensorImpl* child = node->grad_fn->inputs[next].impl().get();
      ++next;
      if (child->requires_grad && visited.insert(child).second) {
        stack.emplace_back(child, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  std::unordered_map<TensorImpl*, Buffer> grads;
  Buffer seed(impl_->data.dtype(), 1);
  seed.Fill(1.0);
  grads.emplace(impl_.get(), std::move(seed));

  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    TensorImpl* node = *it;
    auto found = grads.find(node);
    if (found == grads.end()) continue;
    Buffer grad_out = std::move(found->second);
    grads.erase(found);
    if (node->grad_fn) {
      const auto& inputs = node->grad_fn->inputs;
      std::vector<Buffer> in_grads = node->grad_fn->backward(*node, grad_out);
      for (size_t i = 0; i < inputs.size() && i < in_grads.size(); ++i) {
        TensorImpl* in = inputs[i].impl().get();
        if (!in->requires_grad || in_grads[i].empty()) continue;
        auto slot = grads.find(in);
        if (slot == grads.end()) {
          grads.emplace(in, std::move(in_grads[i]));
        } else {
          slot->second.AddInPlace(in_grads[i]);
        }
      }
      node->grad = std::move(grad_out);
    } else if (node->grad.empty()) {
      node->grad = std::move(grad_out);
    } else {
      node->grad.AddInPlace(grad_out);
    }
  }
}

Tensor Tensor::Detach() const {
  auto impl = std::make_shared<TensorImpl>();
  impl->shape = impl_->shape;
  impl->data = impl_->data;
  return Tensor(std::move(impl));
}

Tensor Tensor::Clone() const {
  Tensor t = Detach();
  t.impl_->requires_grad = impl_->requires_grad;
  return t;
}

Tensor Tensor::To(Dtype dtype) const {
  if (dtype == this->dtype()) return Clone();
  Tensor t = Zeros(shape(), dtype, impl_->requires_grad);
  for (int64_t i = 0; i < numel(); ++i) t.impl_->data.Set(i, at(i));
  return t;
}

void Tensor::CopyDataFrom(const Tensor& other) {
  if (other.shape() != shape()) {
    throw ShapeError("CopyDataFrom: shape " + ShapeToString(other.shape()) +
                     " into " + ShapeToString(shape()));
  }
  if (other.dtype() == dtype()) {
    impl_->data = other.impl_->data;
    return;
  }
  for (int64_t i = 0; i < numel(); ++i) impl_->data.Set(i, other.at(i));
}

bool Tensor::BitwiseEqual(const Tensor& other) const {
  if (shape() != other.shape() || dtype() != other.dtype()) return false;
  return DispatchDtype(dtype(), [&]<typename T>() {
    return std::memcmp(data<T>(), other.data<T>(), numel() * sizeof(T)) == 0;
  });
}

const std::vector<std::string_view>& PrimitiveCatalog() {
  static const std::vector<std::string_view> kCatalog = {
      "matmul",     "add",       "mul",       "softmax",
      "log_softmax", "layer_norm", "depthwise_conv1d", "conv1d",
      "glu",        "sigmoid",   "swish",     "relu",
      "embedding",  "concat",    "slice",     "reshape",
      "sum",        "mean",      "cross_entropy", "dropout",
      "ctc_loss",
  };
  return kCatalog;
}

bool IsRegisteredPrimitive(std::string_view op) {
  const auto& catalog = PrimitiveCatalog();
  return std::find(catalog.begin(), catalog.end(), op) != catalog.end();
}

Tensor MakeOpResult(std::string_view op, const Shape& shape, Buffer data,
                    std::vector<Tensor> inputs, BackwardFn backward) {
  const auto& catalog = PrimitiveCatalog();
  auto entry = std::find(catalog.begin(), catalog.end(), op);
  if (entry == catalog.end()) {
    throw GraphError("unregistered primitive '" + std::string(op) + "'");
  }
  Tensor out = Tensor::FromBuffer(shape, std::move(data));
  if (!GradMode::IsEnabled()) return out;
  bool needs_grad = false;
  for (const Tensor& in : inputs) needs_grad = needs_grad || in.requires_grad();
  if (!needs_grad) return out;
  auto node = std::make_shared<Node>();
  node->op = *entry;
  node->inputs = std::move(inputs);
  node->backward = std::move(backward);
  out.impl()->requires_grad = true;
  out.impl()->grad_fn = std::move(node);
  return out;
}

}  // namespace whale
