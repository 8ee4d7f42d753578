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

#ifndef WHALE_TENSOR_CHECKPOINT_H_
#define WHALE_TENSOR_CHECKPOINT_H_

#include <string>
#include <utility>
#include <vector>

#include "tensor/tensor.h"

namespace whale {

using NamedTensors = std::vector<std::pair<std::string, Tensor>>;

// Writes `dir/index.json` (name -> shape, dtype, byte offset, in order) and
// `dir/params.bin` (little-endian float32, concatenated in index order).
// The directory is created if needed. Throws IoError on failure.
void SaveTensors(const std::string& dir, const NamedTensors& tensors);

// Reads a directory written by SaveTensors. Tensors come back as float32 in
// index order.
NamedTensors LoadTensors(const std::string& dir);

// Returns the tensor called `name` or an undefined tensor.
Tensor FindTensor(const NamedTensors& tensors, const std::string& name);

}  // namespace whale

#endif  // WHALE_TENSOR_CHECKPOINT_H_
