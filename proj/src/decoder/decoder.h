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

#ifndef WHALE_DECODER_DECODER_H_
#define WHALE_DECODER_DECODER_H_

#include <memory>
#include <span>
#include <vector>

#include "encoder/encoder.h"
#include "nn/layers.h"

namespace whale {

struct DecoderConfig {
  int num_layers = 2;
  int hidden_dim = 32;
  int heads = 4;
  int ffn_dim = 64;
  int max_target_len = 64;  // longest input prefix, sos and language included
  double dropout = 0.1;
  double label_smoothing = 0.0;  // mass spread uniformly over the vocabulary
  bool memory_positions = false;  // sinusoidal positions on the cross-attention memory
  double token_dropout = 0.0;     // training only: input tokens after the prompt
                                  // are replaced by a random id with this probability
  int prompt_len = 2;             // sos + language
  int vocab_size = 0;

  void Validate() const;
};

// Pre-LN: causal self-attention, cross-attention, feed-forward.
class DecoderLayer : public Module {
 public:
  DecoderLayer(const DecoderConfig& cfg, Dtype dtype, Rng& rng);
  Tensor Forward(const Tensor& x, const Tensor& memory, const RunMode& mode) const;
  void VisitParams(const std::string& prefix, const ParamVisitor& visit) override;

  MultiHeadAttention& self_attention() { return self_att_; }
  MultiHeadAttention& cross_attention() { return cross_att_; }
  FeedForward& ffn() { return ffn_; }

 private:
  double dropout_;
  LayerNormLayer ln_self_, ln_cross_, ln_ffn_;
  MultiHeadAttention self_att_;
  MultiHeadAttention cross_att_;
  FeedForward ffn_;
};

// [sos, language, tokens..., eos].
std::vector<int> WrapTarget(int sos, int language_token, std::span<const int> tokens,
                            int eos);

class Decoder : public Module {
 public:
  Decoder(const DecoderConfig& cfg, Dtype dtype, Rng& rng);

  const DecoderConfig& config() const { return cfg_; }

  // Logits for every input position: L x V.
  Tensor Forward(const Tensor& memory, std::span<const int> inputs,
                 const RunMode& mode) const;

  // Next-token log-probabilities after `prefix` (sos, language, ...).
  // Throws LengthError when the prefix exceeds max_target_len.
  std::vector<double> DecodeStep(const EncoderOutput& enc,
                                 std::span<const int> prefix) const;

  // Mean cross-entropy of wrapped[1:] given wrapped[:-1]. Throws
  // ValidationError for a target shorter than two ids.
  Tensor TeacherForcedLoss(const EncoderOutput& enc, std::span<const int> wrapped,
                           const RunMode& mode) const;

  void VisitParams(const std::string& prefix, const ParamVisitor& visit) override;

  DecoderLayer& layer(int i) { return *layers_[i]; }
  Tensor& embedding() { return embedding_; }
  Linear& output() { return out_; }

 private:
  DecoderConfig cfg_;
  Dtype dtype_;
  Tensor embedding_;  // V x D
  std::vector<std::unique_ptr<DecoderLayer>> layers_;
  LayerNormLayer ln_final_;
  Linear out_;
  Tensor positions_;  // max_target_len x D, fixed
};

}  // namespace whale

#endif  // WHALE_DECODER_DECODER_H_
