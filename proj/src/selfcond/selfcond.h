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

#ifndef WHALE_SELFCOND_SELFCOND_H_
#define WHALE_SELFCOND_SELFCOND_H_

#include <string>
#include <vector>

#include "ctc/vocab.h"
#include "nn/layers.h"

namespace whale {

// Per-token multiplicative weights over the CTC label space.
struct LanguageMask {
  std::string language;
  std::vector<double> weights;  // V entries in (0, 1]

  bool IsNeutral() const;
};

// Weight 1 for the blank, the language's charset and the decoder-only
// special tokens; `epsilon` for every other character.
// Throws UnknownLanguageError, or ValidationError unless 0 < epsilon <= 1.
LanguageMask BuildLanguageMask(const std::string& language, const Vocab& vocab,
                               double epsilon = 1e-4);

// Row-wise log(normalize(softmax(log_post) * w)). A neutral mask returns the
// input handle unchanged. Throws VocabError on a width mismatch.
Tensor ApplyAdaptation(const Tensor& tap_log_post, const LanguageMask& mask);

// layer_norm(hidden + projection(softmax(tap_log_post))).
class FeedbackLayer : public Module {
 public:
  FeedbackLayer(int vocab_size, int dim, Dtype dtype, Rng& rng);

  Tensor Forward(const Tensor& hidden, const Tensor& tap_log_post) const;
  void VisitParams(const std::string& prefix, const ParamVisitor& visit) override;

  Linear& projection() { return proj_; }
  LayerNormLayer& norm() { return norm_; }

 private:
  int vocab_size_;
  int dim_;
  Linear proj_;
  LayerNormLayer norm_;
};

}  // namespace whale

#endif  // WHALE_SELFCOND_SELFCOND_H_
