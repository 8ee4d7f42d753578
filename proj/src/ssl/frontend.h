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

#ifndef WHALE_SSL_FRONTEND_H_
#define WHALE_SSL_FRONTEND_H_

#include <memory>
#include <vector>

#include "ssl/conformer.h"

namespace whale {

inline constexpr int kFrameRate = 100;

struct SslConfig {
  int input_dim = 16;
  int num_blocks = 4;
  int hidden_dim = 32;
  int heads = 4;
  int ffn_dim = 64;
  int conv_kernel = 5;
  int rel_window = 8;
  double dropout = 0.0;

  double mask_prob = 0.08;
  int mask_span = 3;
  int codebook_size = 8;
  int codebook_dim = 8;
  int num_distractors = 4;
  double contrastive_weight = 0.5;
  double mlm_weight = 1.0;
  int contrastive_tap_block = 2;
  uint64_t quantizer_seed = 1234;

  // Throws ValidationError.
  void Validate() const;
  ConformerConfig Block() const;
};

struct MaskSet {
  std::vector<int> indices;  // sorted, unique
  bool empty() const { return indices.empty(); }
};

// Union of [start, start + span) clipped at T.
MaskSet SpanMaskFromStarts(int T, const std::vector<int>& starts, int span);

// Each frame starts a span with probability mask_prob.
// Throws InputTooShortError when T < mask_span.
MaskSet DrawSpanMask(int T, Rng& rng, const SslConfig& cfg);

// Index of the nearest row of `codebook` (K x D) to `frame` (D), lowest id
// on ties.
int Quantize(std::span<const double> frame, const std::vector<double>& codebook,
             int K);

// Objective terms over the M masked frames.
struct SslLossTerms {
  Tensor loss;
  Tensor contrastive;
  Tensor mlm;
  double accuracy = 0.0;
};

// tap_proj: M x Cd contrastive projections; codes: K x Cd constant codebook;
// mlm_logits: M x K; targets: M code ids; distractors[i]: masked-row indices
// (into 0..M-1) used as negatives for row i. Rows without distractors skip
// the contrastive term.
SslLossTerms ComputeSslLoss(const Tensor& tap_proj, const Tensor& codes,
                            const Tensor& mlm_logits,
                            const std::vector<int>& targets,
                            const std::vector<std::vector<int>>& distractors,
                            double contrastive_weight, double mlm_weight);

struct SslMetrics {
  double loss = 0.0;
  double contrastive = 0.0;
  double mlm = 0.0;
  double accuracy = 0.0;
  int num_masked = 0;
};

class SslFrontend : public Module {
 public:
  SslFrontend(const SslConfig& cfg, Dtype dtype, Rng& rng);

  const SslConfig& config() const { return cfg_; }
  int num_blocks() const { return static_cast<int>(blocks_.size()); }

  // Projects and runs all blocks. With `tap` set, also returns the output of
  // block cfg.contrastive_tap_block (1-based).
  Tensor Forward(const Tensor& x, const RunMode& mode, Tensor* tap = nullptr) const;

  // Evaluation-mode features: T x hidden_dim, no masking.
  Tensor ExtractFeatures(const Tensor& x) const;

  // Masked frames take the learned mask embedding.
  Tensor ApplyMask(const Tensor& x, const MaskSet& mask) const;

  // Frozen random-projection targets, one code per frame.
  std::vector<int> Targets(const Tensor& x) const;

  // Draws a mask (redraw once, then force a span at frame 0), masks x, and
  // returns the weighted objective. `rng` drives masking, negatives and
  // dropout.
  Tensor Loss(const Tensor& x, Rng& rng, bool training, SslMetrics* metrics) const;

  void VisitParams(const std::string& prefix, const ParamVisitor& visit) override;

  ConformerBlock& block(int i) { return *blocks_[i]; }

 private:
  SslConfig cfg_;
  Dtype dtype_;
  Linear input_proj_;
  std::vector<std::unique_ptr<ConformerBlock>> blocks_;
  Tensor mask_embedding_;  // F
  Linear mlm_head_;        // D -> K
  Linear contrastive_head_;  // D -> codebook_dim
  // Frozen quantizer: F -> codebook_dim projection and a unit-norm codebook.
  Tensor quant_proj_;
  Tensor codebook_;
};

}  // namespace whale

#endif  // WHALE_SSL_FRONTEND_H_
