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

#ifndef WHALE_DATA_FEATURES_H_
#define WHALE_DATA_FEATURES_H_

#include <cstdint>
#include <string>
#include <vector>

#include "tensor/tensor.h"

namespace whale {

// Feature file: little-endian u32 num_frames, u32 dim, then num_frames * dim
// float32 values, row-major.
struct FeatureMatrix {
  uint32_t num_frames = 0;
  uint32_t dim = 0;
  std::vector<float> values;

  Tensor ToTensor() const;  // float32, [num_frames, dim]
};

void WriteFeatures(const std::string& path, const FeatureMatrix& m);
FeatureMatrix ReadFeatures(const std::string& path);
// Reads only the header; returns {num_frames, dim}.
std::pair<uint32_t, uint32_t> ReadFeatureHeader(const std::string& path);

// Worker thread cap from WHALE_KIT_THREADS (default 1).
int WorkerThreads();

}  // namespace whale

#endif  // WHALE_DATA_FEATURES_H_
