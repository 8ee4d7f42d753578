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

#include "data/features.h"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <fstream>

#include "base/error.h"

namespace whale {

namespace {

void PutU32(std::ofstream& out, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16),
                        static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t GetU32(std::ifstream& in, const std::string& path) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw IoError("truncated header: " + path);
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

static_assert(sizeof(float) == 4);

}  // namespace

Tensor FeatureMatrix::ToTensor() const {
  Buffer buf(Dtype::kFloat32, values.size());
  for (size_t i = 0; i < values.size(); ++i) buf.Set(i, values[i]);
  return Tensor::FromBuffer({static_cast<int64_t>(num_frames), static_cast<int64_t>(dim)},
                            std::move(buf));
}

void WriteFeatures(const std::string& path, const FeatureMatrix& m) {
  if (m.values.size() != static_cast<size_t>(m.num_frames) * m.dim) {
    throw ValidationError("feature matrix size does not match its header");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  PutU32(out, m.num_frames);
  PutU32(out, m.dim);
  for (float v : m.values) {
    uint32_t bits;
    std::memcpy(&bits, &v, 4);
    PutU32(out, bits);
  }
  if (!out) throw IoError("write failed: " + path);
}

FeatureMatrix ReadFeatures(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  FeatureMatrix m;
  m.num_frames = GetU32(in, path);
  m.dim = GetU32(in, path);
  m.values.resize(static_cast<size_t>(m.num_frames) * m.dim);
  for (float& v : m.values) {
    const uint32_t bits = GetU32(in, path);
    std::memcpy(&v, &bits, 4);
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw IoError("trailing bytes in " + path);
  }
  return m;
}

std::pair<uint32_t, uint32_t> ReadFeatureHeader(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  const uint32_t t = GetU32(in, path);
  const uint32_t d = GetU32(in, path);
  return {t, d};
}

int WorkerThreads() {
  const char* env = std::getenv("WHALE_KIT_THREADS");
  if (!env || !*env) return 1;
  char* end = nullptr;
  const long n = std::strtol(env, &end, 10);
  if (*end != '\0' || n < 1) throw ValidationError("WHALE_KIT_THREADS must be a positive integer");
  return static_cast<int>(std::min<long>(n, 256));
}

}  // namespace whale
