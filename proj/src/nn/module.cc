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

#include "nn/module.h"

#include <unordered_map>

namespace whale {

NamedTensors NamedParameters(Module& module, const std::string& prefix) {
  NamedTensors out;
  module.VisitParams(prefix, [&](const std::string& name, Tensor& p) {
    out.emplace_back(name, p);
  });
  return out;
}

int LoadParameters(Module& module, const NamedTensors& source,
                   const std::string& prefix, bool strict) {
  std::unordered_map<std::string, const Tensor*> by_name;
  for (const auto& [name, t] : source) by_name[name] = &t;
  int copied = 0;
  module.VisitParams(prefix, [&](const std::string& name, Tensor& p) {
    auto it = by_name.find(name);
    if (it == by_name.end()) {
      if (strict) throw IoError("checkpoint is missing parameter " + name);
      return;
    }
    if (it->second->shape() != p.shape()) {
      throw ShapeError("parameter " + name + " has shape " +
                       ShapeToString(p.shape()) + " but checkpoint holds " +
                       ShapeToString(it->second->shape()));
    }
    p.CopyDataFrom(*it->second);
    ++copied;
  });
  return copied;
}

void ZeroGrads(Module& module) {
  module.VisitParams("", [](const std::string&, Tensor& p) { p.ZeroGrad(); });
}

Tensor UniformParam(const Shape& shape, double bound, Dtype dtype, Rng& rng) {
  Tensor t = Tensor::Zeros(shape, dtype, true);
  for (int64_t i = 0; i < t.numel(); ++i) {
    t.mutable_buffer().Set(i, rng.Uniform(-bound, bound));
  }
  return t;
}

Tensor ConstantParam(const Shape& shape, double value, Dtype dtype) {
  Tensor t = Tensor::Full(shape, value, dtype);
  t.set_requires_grad(true);
  return t;
}

}  // namespace whale
