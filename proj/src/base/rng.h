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

#ifndef WHALE_BASE_RNG_H_
#define WHALE_BASE_RNG_H_

#include <array>
#include <cstdint>

namespace whale {

// splitmix64 finalizer; also used to derive independent per-item seeds.
uint64_t SplitMix64(uint64_t x);

// Seed for item `index` of a stream rooted at `base`. Parallel generation
// uses this so the output does not depend on scheduling.
uint64_t DeriveSeed(uint64_t base, uint64_t index);

// xoshiro256** generator. Each component owns its own instance; there is no
// process-wide generator.
class Rng {
 public:
  using State = std::array<uint64_t, 4>;

  explicit Rng(uint64_t seed = 0);

  uint64_t NextU64();
  // Uniform in [0, 1) with 53 random bits.
  double Uniform();
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }
  // Uniform integer in [0, n). n must be positive.
  uint64_t UniformInt(uint64_t n);
  // Standard normal via Box-Muller (one value per call, no caching so the
  // state stays a pure function of the draw count).
  double Normal();
  bool Bernoulli(double p) { return Uniform() < p; }

  const State& state() const { return s_; }
  void set_state(const State& s) { s_ = s; }

 private:
  State s_;
};

}  // namespace whale

#endif  // WHALE_BASE_RNG_H_
