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

#include "selfcond/selfcond.h"

#include <algorithm>
#include <cmath>

#include "base/error.h"

namespace whale {

bool LanguageMask::IsNeutral() const {
  return std::all_of(weights.begin(), weights.end(),
                     [](double w) { return w == 1.0; });
}

LanguageMask BuildLanguageMask(const std::string& language, const Vocab& vocab,
                               double epsilon) {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) {
    throw ValidationError("language mask epsilon must be in (0, 1], got " +
                          std::to_string(epsilon));
  }
  const Vocab::Language& lang = vocab.language(language);
  LanguageMask mask;
  mask.language = language;
  mask.weights.assign(vocab.size(), 1.0);
  for (int id : vocab.CharacterIds()) mask.weights[id] = epsilon;
  for (int id : lang.charset) mask.weights[id] = 1.0;
  return mask;
}

Tensor ApplyAdaptation(const Tensor& tap_log_post, const LanguageMask& mask) {
  if (tap_log_post.rank() != 2 ||
      tap_log_post.cols() != static_cast<int64_t>(mask.weights.size())) {
    throw VocabError("adaptation mask has " + std::to_string(mask.weights.size()) +
                     " entries but posteriors are " +
                     ShapeToString(tap_log_post.shape()));
  }
  if (mask.IsNeutral()) return tap_log_post;
  std::vector<double> log_w(mask.weights.size());
  for (size_t i = 0; i < log_w.size(); ++i) log_w[i] = std::log(mask.weights[i]);
  Tensor bias = Tensor::FromData({static_cast<int64_t>(log_w.size())}, log_w,
                                 tap_log_post.dtype());
  return LogSoftmax(Add(tap_log_post, bias), 1);
}

FeedbackLayer::FeedbackLayer(int vocab_size, int dim, Dtype dtype, Rng& rng)
    : vocab_size_(vocab_size), dim_(dim), proj_(vocab_size, dim, dtype, rng),
      norm_(dim, dtype) {}

Tensor FeedbackLayer::Forward(const Tensor& hidden,
                              const Tensor& tap_log_post) const {
  if (hidden.rank() != 2 || tap_log_post.rank() != 2 ||
      hidden.cols() != dim_ || tap_log_post.cols() != vocab_size_ ||
      hidden.rows() != tap_log_post.rows()) {
    throw ShapeError("selfcond feedback: hidden " + ShapeToString(hidden.shape()) +
                     " vs posteriors " + ShapeToString(tap_log_post.shape()) +
                     " (expected T x " + std::to_string(dim_) + " and T x " +
                     std::to_string(vocab_size_) + ")");
  }
  return norm_.Forward(Add(hidden, proj_.Forward(Softmax(tap_log_post, 1))));
}

void FeedbackLayer::VisitParams(const std::string& prefix,
                                const ParamVisitor& visit) {
  proj_.VisitParams(JoinName(prefix, "proj"), visit);
  norm_.VisitParams(JoinName(prefix, "norm"), visit);
}

}  // namespace whale
