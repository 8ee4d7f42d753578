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

#ifndef WHALE_MODEL_ASR_MODEL_H_
#define WHALE_MODEL_ASR_MODEL_H_

#include <memory>
#include <string>

#include "ctc/vocab.h"
#include "decoder/decoder.h"
#include "encoder/encoder.h"
#include "nn/module.h"
#include "ssl/frontend.h"

namespace whale {

struct ModelConfig {
  SslConfig ssl;
  EncoderConfig encoder;
  DecoderConfig decoder;

  // Fills the coupled fields (encoder input, vocab sizes) and validates.
  void Finalize(const Vocab& vocab);
  std::string ToJson() const;
  static ModelConfig FromJson(const std::string& json);

  // Small dimensions used throughout the tests and the toy pipeline.
  static ModelConfig Toy();
};

// SSL frontend -> E-Branchformer encoder (CTC branch) + attention decoder.
// Parameter prefixes: "ssl", "encoder", "decoder".
class AsrModel : public Module {
 public:
  AsrModel(ModelConfig cfg, Vocab vocab, uint64_t seed);

  const ModelConfig& config() const { return cfg_; }
  const Vocab& vocab() const { return vocab_; }

  SslFrontend& ssl() { return *ssl_; }
  Encoder& encoder() { return *encoder_; }
  Decoder& decoder() { return *decoder_; }
  const SslFrontend& ssl() const { return *ssl_; }
  const Encoder& encoder() const { return *encoder_; }
  const Decoder& decoder() const { return *decoder_; }

  // Grows the encoder and records the new depth in the config.
  void GrowEncoder(int new_depth, Rng& rng);

  void VisitParams(const std::string& prefix, const ParamVisitor& visit) override;

  // dir/config.json, dir/vocab.json, dir/index.json, dir/params.bin
  void Save(const std::string& dir);
  static std::unique_ptr<AsrModel> Load(const std::string& dir);

 private:
  ModelConfig cfg_;
  Vocab vocab_;
  std::unique_ptr<SslFrontend> ssl_;
  std::unique_ptr<Encoder> encoder_;
  std::unique_ptr<Decoder> decoder_;
};

// Wrapped decoder target: [sos, <lang>, chars..., eos].
std::vector<int> WrappedTarget(const Vocab& vocab, const std::string& language,
                               std::span<const int> chars);

}  // namespace whale

#endif  // WHALE_MODEL_ASR_MODEL_H_
