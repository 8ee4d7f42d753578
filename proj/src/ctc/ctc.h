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

#ifndef WHALE_CTC_CTC_H_
#define WHALE_CTC_CTC_H_

#include <limits>
#include <span>
#include <vector>

#include "tensor/tensor.h"

namespace whale {

inline constexpr double kLogZero = -std::numeric_limits<double>::infinity();

double LogAddExp(double a, double b);

// Frames needed to emit `labels`: one per label plus one blank between
// each pair of equal neighbours.
int CtcMinFrames(std::span<const int> labels);

// -log P(labels | log_posteriors) summed over all alignments. log_posteriors
// is T x V (rows already log-normalized). Differentiable w.r.t. its input.
// Throws ImpossibleAlignmentError when T < CtcMinFrames(labels) and
// ValidationError when labels hold the blank or an out-of-range id.
Tensor CtcLoss(const Tensor& log_posteriors, std::span<const int> labels,
               int blank = 0);

// Merge repeats, then drop blanks.
std::vector<int> CtcCollapse(std::span<const int> frame_ids, int blank = 0);

// Per-frame argmax (lowest id on ties), then collapse.
std::vector<int> CtcGreedy(const Tensor& log_posteriors, int blank = 0);

// Prefix state of a label prefix g over frames [0, T):
// nb[t] / b[t] = log P(frames 0..t emit exactly g, frame t non-blank / blank).
struct PrefixState {
  std::vector<double> nb;
  std::vector<double> b;
  int last = -1;          // last label of g, -1 for the empty prefix
  double score = 0.0;     // log P(some frame-path collapses to g...)
  int length = 0;

  // log P(the whole utterance collapses to exactly g).
  double FinalScore() const;
};

// Incremental CTC prefix scoring over one fixed posterior matrix.
class CtcPrefixScorer {
 public:
  // log_posteriors: T x V, copied to 64-bit.
  explicit CtcPrefixScorer(const Tensor& log_posteriors, int blank = 0);

  int num_frames() const { return frames_; }
  int vocab_size() const { return vocab_; }

  PrefixState Initial() const;

  // State for g.c where `state` describes g. The returned state's score is
  // the prefix probability log P(g.c ...). c must not be the blank.
  PrefixState Extend(const PrefixState& state, int c) const;

  double lp(int t, int v) const { return lp_[static_cast<size_t>(t) * vocab_ + v]; }

 private:
  int frames_;
  int vocab_;
  int blank_;
  std::vector<double> lp_;
};

}  // namespace whale

#endif  // WHALE_CTC_CTC_H_
