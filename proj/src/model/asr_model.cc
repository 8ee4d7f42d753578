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

#include "model/asr_model.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "base/error.h"
#include "json.hpp"
#include "tensor/checkpoint.h"

namespace whale {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string Slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

void ModelConfig::Finalize(const Vocab& vocab) {
  encoder.input_dim = ssl.hidden_dim;
  encoder.vocab_size = vocab.size();
  decoder.vocab_size = vocab.size();
  if (decoder.hidden_dim != encoder.hidden_dim) {
    throw ValidationError("decoder hidden_dim must match encoder hidden_dim");
  }
  ssl.Validate();
  encoder.Validate();
  decoder.Validate();
}

std::string ModelConfig::ToJson() const {
  ordered_json j;
  ordered_json s;
  s["input_dim"] = ssl.input_dim;
  s["num_blocks"] = ssl.num_blocks;
  s["hidden_dim"] = ssl.hidden_dim;
  s["heads"] = ssl.heads;
  s["ffn_dim"] = ssl.ffn_dim;
  s["conv_kernel"] = ssl.conv_kernel;
  s["rel_window"] = ssl.rel_window;
  s["dropout"] = ssl.dropout;
  s["mask_prob"] = ssl.mask_prob;
  s["mask_span"] = ssl.mask_span;
  s["codebook_size"] = ssl.codebook_size;
  s["codebook_dim"] = ssl.codebook_dim;
  s["num_distractors"] = ssl.num_distractors;
  s["contrastive_weight"] = ssl.contrastive_weight;
  s["mlm_weight"] = ssl.mlm_weight;
  s["contrastive_tap_block"] = ssl.contrastive_tap_block;
  s["quantizer_seed"] = ssl.quantizer_seed;
  j["ssl"] = s;
  ordered_json e;
  e["input_dim"] = encoder.input_dim;
  e["num_blocks"] = encoder.num_blocks;
  e["hidden_dim"] = encoder.hidden_dim;
  e["heads"] = encoder.heads;
  e["ffn_dim"] = encoder.ffn_dim;
  e["cgmlp_units"] = encoder.cgmlp_units;
  e["cgmlp_kernel"] = encoder.cgmlp_kernel;
  e["merge_kernel"] = encoder.merge_kernel;
  e["rel_window"] = encoder.rel_window;
  e["dropout"] = encoder.dropout;
  e["vocab_size"] = encoder.vocab_size;
  e["tap_layers"] = encoder.tap_layers;
  e["self_condition"] = encoder.self_condition;
  j["encoder"] = e;
  ordered_json d;
  d["num_layers"] = decoder.num_layers;
  d["hidden_dim"] = decoder.hidden_dim;
  d["heads"] = decoder.heads;
  d["ffn_dim"] = decoder.ffn_dim;
  d["max_target_len"] = decoder.max_target_len;
  d["dropout"] = decoder.dropout;
  d["label_smoothing"] = decoder.label_smoothing;
  d["memory_positions"] = decoder.memory_positions;
  d["token_dropout"] = decoder.token_dropout;
  d["vocab_size"] = decoder.vocab_size;
  j["decoder"] = d;
  return j.dump(2) + "\n";
}

ModelConfig ModelConfig::FromJson(const std::string& text) {
  ModelConfig c;
  try {
    const json j = json::parse(text);
    if (j.contains("ssl")) {
      const json& s = j["ssl"];
      c.ssl.input_dim = s.value("input_dim", c.ssl.input_dim);
      c.ssl.num_blocks = s.value("num_blocks", c.ssl.num_blocks);
      c.ssl.hidden_dim = s.value("hidden_dim", c.ssl.hidden_dim);
      c.ssl.heads = s.value("heads", c.ssl.heads);
      c.ssl.ffn_dim = s.value("ffn_dim", c.ssl.ffn_dim);
      c.ssl.conv_kernel = s.value("conv_kernel", c.ssl.conv_kernel);
      c.ssl.rel_window = s.value("rel_window", c.ssl.rel_window);
      c.ssl.dropout = s.value("dropout", c.ssl.dropout);
      c.ssl.mask_prob = s.value("mask_prob", c.ssl.mask_prob);
      c.ssl.mask_span = s.value("mask_span", c.ssl.mask_span);
      c.ssl.codebook_size = s.value("codebook_size", c.ssl.codebook_size);
      c.ssl.codebook_dim = s.value("codebook_dim", c.ssl.codebook_dim);
      c.ssl.num_distractors = s.value("num_distractors", c.ssl.num_distractors);
      c.ssl.contrastive_weight = s.value("contrastive_weight", c.ssl.contrastive_weight);
      c.ssl.mlm_weight = s.value("mlm_weight", c.ssl.mlm_weight);
      c.ssl.contrastive_tap_block =
          s.value("contrastive_tap_block", c.ssl.contrastive_tap_block);
      c.ssl.quantizer_seed = s.value("quantizer_seed", c.ssl.quantizer_seed);
    }
    if (j.contains("encoder")) {
      const json& e = j["encoder"];
      c.encoder.input_dim = e.value("input_dim", c.encoder.input_dim);
      c.encoder.num_blocks = e.value("num_blocks", c.encoder.num_blocks);
      c.encoder.hidden_dim = e.value("hidden_dim", c.encoder.hidden_dim);
      c.encoder.heads = e.value("heads", c.encoder.heads);
      c.encoder.ffn_dim = e.value("ffn_dim", c.encoder.ffn_dim);
      c.encoder.cgmlp_units = e.value("cgmlp_units", c.encoder.cgmlp_units);
      c.encoder.cgmlp_kernel = e.value("cgmlp_kernel", c.encoder.cgmlp_kernel);
      c.encoder.merge_kernel = e.value("merge_kernel", c.encoder.merge_kernel);
      c.encoder.rel_window = e.value("rel_window", c.encoder.rel_window);
      c.encoder.dropout = e.value("dropout", c.encoder.dropout);
      c.encoder.vocab_size = e.value("vocab_size", c.encoder.vocab_size);
      c.encoder.tap_layers = e.value("tap_layers", c.encoder.tap_layers);
      c.encoder.self_condition = e.value("self_condition", c.encoder.self_condition);
    }
    if (j.contains("decoder")) {
      const json& d = j["decoder"];
      c.decoder.num_layers = d.value("num_layers", c.decoder.num_layers);
      c.decoder.hidden_dim = d.value("hidden_dim", c.decoder.hidden_dim);
      c.decoder.heads = d.value("heads", c.decoder.heads);
      c.decoder.ffn_dim = d.value("ffn_dim", c.decoder.ffn_dim);
      c.decoder.max_target_len = d.value("max_target_len", c.decoder.max_target_len);
      c.decoder.dropout = d.value("dropout", c.decoder.dropout);
      c.decoder.label_smoothing = d.value("label_smoothing", c.decoder.label_smoothing);
      c.decoder.memory_positions = d.value("memory_positions", c.decoder.memory_positions);
      c.decoder.token_dropout = d.value("token_dropout", c.decoder.token_dropout);
      c.decoder.vocab_size = d.value("vocab_size", c.decoder.vocab_size);
    }
  } catch (const json::exception& ex) {
    throw ValidationError(std::string("bad model config: ") + ex.what());
  }
  return c;
}

ModelConfig ModelConfig::Toy() {
  ModelConfig c;
  c.encoder.num_blocks = 2;
  c.decoder.label_smoothing = 0.2;
  c.decoder.memory_positions = true;
  return c;
}

AsrModel::AsrModel(ModelConfig cfg, Vocab vocab, uint64_t seed)
    : cfg_(std::move(cfg)), vocab_(std::move(vocab)) {
  cfg_.Finalize(vocab_);
  Rng ssl_rng(DeriveSeed(seed, 1));
  Rng enc_rng(DeriveSeed(seed, 2));
  Rng dec_rng(DeriveSeed(seed, 3));
  ssl_ = std::make_unique<SslFrontend>(cfg_.ssl, Dtype::kFloat32, ssl_rng);
  encoder_ = std::make_unique<Encoder>(cfg_.encoder, Dtype::kFloat32, enc_rng);
  decoder_ = std::make_unique<Decoder>(cfg_.decoder, Dtype::kFloat32, dec_rng);
}

void AsrModel::GrowEncoder(int new_depth, Rng& rng) {
  encoder_->Grow(new_depth, rng);
  cfg_.encoder = encoder_->config();
}

void AsrModel::VisitParams(const std::string& prefix, const ParamVisitor& visit) {
  ssl_->VisitParams(JoinName(prefix, "ssl"), visit);
  encoder_->VisitParams(JoinName(prefix, "encoder"), visit);
  decoder_->VisitParams(JoinName(prefix, "decoder"), visit);
}

void AsrModel::Save(const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  std::ofstream(fs::path(dir) / "config.json") << cfg_.ToJson();
  vocab_.Save((fs::path(dir) / "vocab.json").string());
  SaveTensors(dir, NamedParameters(*this));
  if (!fs::exists(fs::path(dir) / "config.json")) throw IoError("cannot write " + dir);
}

std::unique_ptr<AsrModel> AsrModel::Load(const std::string& dir) {
  namespace fs = std::filesystem;
  ModelConfig cfg = ModelConfig::FromJson(Slurp((fs::path(dir) / "config.json").string()));
  Vocab vocab = Vocab::Load((fs::path(dir) / "vocab.json").string());
  auto model = std::make_unique<AsrModel>(cfg, vocab, 0);
  LoadParameters(*model, LoadTensors(dir));
  return model;
}

std::vector<int> WrappedTarget(const Vocab& vocab, const std::string& language,
                               std::span<const int> chars) {
  return WrapTarget(vocab.sos_id(), vocab.language(language).token_id, chars,
                    vocab.eos_id());
}

}  // namespace whale
