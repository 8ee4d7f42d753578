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

#ifndef WHALE_NN_MODULE_H_
#define WHALE_NN_MODULE_H_

#include <functional>
#include <string>

#include "base/rng.h"
#include "tensor/checkpoint.h"
#include "tensor/tensor.h"

namespace whale {

// Per-forward switches. Dropout draws from `rng` only when training.
struct RunMode {
  bool training = false;
  Rng* rng = nullptr;

  static RunMode Eval() { return RunMode{}; }
  static RunMode Train(Rng* rng) { return RunMode{true, rng}; }
};

using ParamVisitor = std::function<void(const std::string& name, Tensor& param)>;

class Module {
 public:
  virtual ~Module() = default;
  // Visits every learned parameter in a fixed, deterministic order.
  virtual void VisitParams(const std::string& prefix,
                           const ParamVisitor& visit) = 0;
};

inline std::string JoinName(const std::string& prefix, const std::string& name) {
  return prefix.empty() ? name : prefix + "." + name;
}

NamedTensors NamedParameters(Module& module, const std::string& prefix = "");

// Copies values from `source` into the module's parameters by name. With
// `strict`, every module parameter must be present in `source`.
// Returns the number of parameters copied.
int LoadParameters(Module& module, const NamedTensors& source,
                   const std::string& prefix = "", bool strict = true);

void ZeroGrads(Module& module);

// Scaled-uniform init: U(-bound, bound), trainable.
Tensor UniformParam(const Shape& shape, double bound, Dtype dtype, Rng& rng);
Tensor ConstantParam(const Shape& shape, double value, Dtype dtype);

}  // namespace whale

#endif  // WHALE_NN_MODULE_H_
