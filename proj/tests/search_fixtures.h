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

#ifndef WHALE_TESTS_SEARCH_FIXTURES_H_
#define WHALE_TESTS_SEARCH_FIXTURES_H_

#include <cmath>
#include <vector>

#include "base/rng.h"
#include "search/beam_search.h"

namespace whale::testing {

// Deterministic pseudo-random attention model: the distribution after a
// prefix is a fixed function of (seed, prefix).
class HashScorer : public AttentionScorer {
 public:
  HashScorer(uint64_t seed, int vocab, double scale = 1.5)
      : seed_(seed), vocab_(vocab), scale_(scale) {}

  std::vector<double> NextLogProbs(std::span<const int> prefix) override {
    uint64_t h = seed_;
    for (int id : prefix) h = DeriveSeed(h, static_cast<uint64_t>(id) + 1);
    Rng rng(h);
    std::vector<double> logits(vocab_);
    double hi = -1e300;
    for (double& v : logits) {
      v = scale_ * rng.Normal();
      hi = std::max(hi, v);
    }
    double z = 0;
    for (double v : logits) z += std::exp(v - hi);
    for (double& v : logits) v = v - hi - std::log(z);
    return logits;
  }

  std::vector<double> operator()(const std::vector<int>& prefix) {
    return NextLogProbs(prefix);
  }

 private:
  uint64_t seed_;
  int vocab_;
  double scale_;
};

}  // namespace whale::testing

#endif  // WHALE_TESTS_SEARCH_FIXTURES_H_
