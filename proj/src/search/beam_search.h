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

#ifndef WHALE_SEARCH_BEAM_SEARCH_H_
#define WHALE_SEARCH_BEAM_SEARCH_H_

#include <span>
#include <vector>

#include "ctc/ctc.h"
#include "decoder/decoder.h"

namespace whale {

struct BeamConfig {
  int beam_size = 4;
  double lambda_ctc = 0.3;
  int max_len = 64;        // label tokens, eos excluded
  int nbest = 1;
  double length_penalty = 0.0;  // added per label token

  void Validate() const;
};

// lambda * ctc + (1 - lambda) * att; a term with zero weight is skipped so
// -inf on the unused side does not produce NaN.
double JointScore(double lambda_ctc, double ctc, double att);

struct Hypothesis {
  std::vector<int> tokens;  // label tokens; eos is implied by `finished`
  PrefixState ctc_state;
  double att_logprob = 0.0;
  double ctc_logprob = 0.0;
  double joint = 0.0;
  bool finished = false;
};

struct SearchResult {
  std::vector<Hypothesis> nbest;  // best first
  bool truncated = false;         // nothing finished; nbest holds the best live
};

// Next-token log-probabilities over the decoder vocabulary for a prefix.
class AttentionScorer {
 public:
  virtual ~AttentionScorer() = default;
  virtual std::vector<double> NextLogProbs(std::span<const int> prefix) = 0;
};

class DecoderScorer : public AttentionScorer {
 public:
  DecoderScorer(const Decoder& decoder, const EncoderOutput& enc)
      : decoder_(decoder), enc_(enc) {}
  std::vector<double> NextLogProbs(std::span<const int> prefix) override {
    return decoder_.DecodeStep(enc_, prefix);
  }

 private:
  const Decoder& decoder_;
  const EncoderOutput& enc_;
};

// True when a ranks before b: higher joint, then shorter, then lower ids.
bool RanksBefore(const Hypothesis& a, const Hypothesis& b);

// Label-synchronous search. `start` is the decoder prefix before the first
// label (sos, language); `labels` are the expandable token ids.
SearchResult JointBeamSearch(const Tensor& ctc_log_posteriors, AttentionScorer& att,
                             std::span<const int> start, std::span<const int> labels,
                             int eos, const BeamConfig& cfg, int blank = 0);

// beam_size = 1, nbest = 1.
SearchResult GreedyTranscribe(const Tensor& ctc_log_posteriors, AttentionScorer& att,
                              std::span<const int> start, std::span<const int> labels,
                              int eos, double lambda_ctc, int max_len, int blank = 0);

}  // namespace whale

#endif  // WHALE_SEARCH_BEAM_SEARCH_H_
