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

#include "tensor/checkpoint.h"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "json.hpp"

namespace whale {

namespace fs = std::filesystem;

void SaveTensors(const std::string& dir, const NamedTensors& tensors) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create checkpoint directory " + dir);

  nlohmann::ordered_json index = nlohmann::ordered_json::object();
  std::vector<unsigned char> bytes;
  for (const auto& [name, tensor] : tensors) {
    if (index.contains(name)) {
      throw IoError("duplicate tensor name in checkpoint: " + name);
    }
    index[name] = {{"shape", tensor.shape()},
                   {"dtype", "float32"},
                   {"offset", bytes.size()}};
    for (int64_t i = 0; i < tensor.numel(); ++i) {
      const uint32_t word = std::bit_cast<uint32_t>(
          static_cast<float>(tensor.at(i)));
      for (int b = 0; b < 4; ++b) bytes.push_back((word >> (8 * b)) & 0xff);
    }
  }

  const fs::path root(dir);
  {
    std::ofstream out(root / "params.bin", std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(bytes.data()), bytes.size());
    if (!out) throw IoError("failed writing " + (root / "params.bin").string());
  }
  {
    std::ofstream out(root / "index.json", std::ios::trunc);
    out << index.dump(1) << "\n";
    if (!out) throw IoError("failed writing " + (root / "index.json").string());
  }
}

NamedTensors LoadTensors(const std::string& dir) {
  const fs::path root(dir);
  std::ifstream index_in(root / "index.json");
  if (!index_in) throw IoError("missing " + (root / "index.json").string());
  nlohmann::ordered_json index;
  try {
    index = nlohmann::ordered_json::parse(index_in);
  } catch (const std::exception& e) {
    throw IoError("malformed index.json in " + dir + ": " + e.what());
  }

  std::ifstream bin(root / "params.bin", std::ios::binary);
  if (!bin) throw IoError("missing " + (root / "params.bin").string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(bin)),
                                   std::istreambuf_iterator<char>());

  NamedTensors out;
  for (const auto& [name, entry] : index.items()) {
    if (entry.value("dtype", "") != "float32") {
      throw IoError("unsupported dtype for " + name);
    }
    Shape shape = entry.at("shape").get<Shape>();
    const size_t offset = entry.at("offset").get<size_t>();
    const int64_t n = NumElements(shape);
    if (offset + 4 * static_cast<size_t>(n) > bytes.size()) {
      throw IoError("params.bin too short for " + name);
    }
    Buffer buf(Dtype::kFloat32, n);
    float* p = buf.data<float>();
    for (int64_t i = 0; i < n; ++i) {
      uint32_t word = 0;
      for (int b = 0; b < 4; ++b) {
        word |= static_cast<uint32_t>(bytes[offset + 4 * i + b]) << (8 * b);
      }
      p[i] = std::bit_cast<float>(word);
    }
    out.emplace_back(name, Tensor::FromBuffer(shape, std::move(buf)));
  }
  return out;
}

Tensor FindTensor(const NamedTensors& tensors, const std::string& name) {
  for (const auto& [n, t] : tensors) {
    if (n == name) return t;
  }
  return Tensor();
}

}  // namespace whale
