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

#ifndef WHALE_TESTS_GRADIENT_SUITE_H_
#define WHALE_TESTS_GRADIENT_SUITE_H_

// Gradient-check cases shared by the unit tests and the acceptance run.

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "ctc/ctc.h"
#include "decoder/decoder.h"
#include "encoder/encoder.h"
#include "selfcond/selfcond.h"
#include "ssl/conformer.h"
#include "test_util.h"

namespace whale::testing {

struct GradCase {
  std::string name;
  std::function<Tensor()> fn;
  std::vector<Tensor> inputs;
  std::shared_ptr<Module> owner;  // keeps module parameters alive
};

// Every registered differentiable primitive.
inline std::vector<GradCase> PrimitiveGradCases(Rng& rng) {
  auto param = [&](const Shape& s, double scale = 1.0) {
    return RandomTensor(s, rng, scale, Dtype::kFloat64, true);
  };
  std::vector<GradCase> cases;
  {
    Tensor a = param({3, 4}), b = param({4, 2});
    cases.push_back({"matmul", [=] { return RandomProjection(MatMul(a, b), 1); }, {a, b}, {}});
  }
  {
    Tensor a = param({3, 4}), b = param({4}), c = param({3, 1});
    cases.push_back({"add", [=] { return RandomProjection(Add(Add(a, b), c), 2); }, {a, b, c}, {}});
    cases.push_back({"mul", [=] { return RandomProjection(Mul(Mul(a, b), c), 3); }, {a, b, c}, {}});
  }
  {
    Tensor x = param({3, 5});
    cases.push_back({"softmax", [=] { return RandomProjection(Softmax(x, 1), 4); }, {x}, {}});
    cases.push_back({"softmax_axis0", [=] { return RandomProjection(Softmax(x, 0), 5); }, {x}, {}});
    cases.push_back({"log_softmax", [=] { return RandomProjection(LogSoftmax(x), 6); }, {x}, {}});
  }
  {
    Tensor x = param({4, 6}), g = param({6}), b = param({6});
    cases.push_back({"layer_norm", [=] { return RandomProjection(LayerNorm(x, g, b), 7); }, {x, g, b}, {}});
  }
  {
    Tensor x = param({6, 3}), k = param({5, 3}), b = param({3});
    cases.push_back({"depthwise_conv1d", [=] { return RandomProjection(DepthwiseConv1d(x, k, b), 8); }, {x, k, b}, {}});
  }
  {
    Tensor x = param({7, 3}), w = param({9, 4}), b = param({4});
    cases.push_back({"conv1d", [=] { return RandomProjection(Conv1d(x, w, b, 3, 2, 1), 9); }, {x, w, b}, {}});
    Tensor w1 = param({3, 2});
    cases.push_back({"conv1d_pointwise", [=] { return RandomProjection(Conv1d(x, w1, Tensor(), 1, 1, 0), 10); }, {x, w1}, {}});
  }
  {
    Tensor x = param({3, 8});
    cases.push_back({"glu", [=] { return RandomProjection(Glu(x), 11); }, {x}, {}});
    cases.push_back({"sigmoid", [=] { return RandomProjection(Sigmoid(x), 12); }, {x}, {}});
    cases.push_back({"swish", [=] { return RandomProjection(Swish(x), 13); }, {x}, {}});
    cases.push_back({"relu", [=] { return RandomProjection(Relu(x), 14); }, {x}, {}});
  }
  {
    Tensor table = param({5, 3});
    std::vector<int> ids = {4, 0, 4, 2};
    cases.push_back({"embedding", [=] { return RandomProjection(Embedding(table, ids), 15); }, {table}, {}});
  }
  {
    Tensor a = param({2, 3}), b = param({2, 2});
    cases.push_back({"concat", [=] { return RandomProjection(Concat({a, b}, 1), 16); }, {a, b}, {}});
    Tensor c = param({5, 4});
    cases.push_back({"slice", [=] { return RandomProjection(Slice(c, 0, 1, 3), 17); }, {c}, {}});
    cases.push_back({"reshape", [=] { return RandomProjection(Reshape(c, {2, 10}), 18); }, {c}, {}});
    cases.push_back({"sum", [=] { return Scale(Sum(Mul(c, c)), 0.5); }, {c}, {}});
    cases.push_back({"mean", [=] { return Mean(Mul(c, c)); }, {c}, {}});
  }
  {
    Tensor logits = param({4, 5});
    std::vector<int> t = {0, 4, 2, 2};
    cases.push_back({"cross_entropy", [=] { return CrossEntropy(logits, t); }, {logits}, {}});
  }
  {
    // The dropout mask is fixed by reseeding inside the closure.
    Tensor x = param({3, 4});
    cases.push_back({"dropout", [=] {
                       Rng local(99);
                       return RandomProjection(Dropout(x, 0.3, &local, true), 19);
                     }, {x}, {}});
  }
  return cases;
}

inline EncoderConfig GradSuiteEncoder(int blocks) {
  EncoderConfig c;
  c.input_dim = 6;
  c.num_blocks = blocks;
  c.hidden_dim = 8;
  c.heads = 2;
  c.ffn_dim = 12;
  c.cgmlp_units = 6;
  c.cgmlp_kernel = 3;
  c.merge_kernel = 3;
  c.rel_window = 2;
  c.dropout = 0.0;
  c.vocab_size = 5;
  return c;
}

// Conformer, E-Branchformer, feedback layer, decoder stack, CTC loss and
// the composite encoder.
inline std::vector<GradCase> ModuleGradCases(Rng& rng) {
  std::vector<GradCase> cases;
  {
    ConformerConfig cfg;
    cfg.dim = 8;
    cfg.heads = 2;
    cfg.ffn_dim = 12;
    cfg.conv_kernel = 3;
    cfg.rel_window = 3;
    auto block = std::make_shared<ConformerBlock>(cfg, Dtype::kFloat64, rng);
    Tensor x = RandomTensor({5, 8}, rng, 1.0, Dtype::kFloat64, true);
    std::vector<Tensor> in = GradCheckParams(*block, rng);
    in.push_back(x);
    ConformerBlock* b = block.get();
    cases.push_back({"conformer_block",
                     [=] { return RandomProjection(b->Forward(x, RunMode::Eval()), 7); }, in,
                     block});
  }
  {
    auto block = std::make_shared<EBranchformerBlock>(GradSuiteEncoder(3), Dtype::kFloat64, rng);
    Tensor x = RandomTensor({5, 8}, rng, 1.0, Dtype::kFloat64, true);
    std::vector<Tensor> in = GradCheckParams(*block, rng);
    in.push_back(x);
    EBranchformerBlock* b = block.get();
    cases.push_back({"ebranchformer_block",
                     [=] { return RandomProjection(b->Forward(x, RunMode::Eval()), 4); }, in,
                     block});
  }
  {
    auto layer = std::make_shared<FeedbackLayer>(5, 4, Dtype::kFloat64, rng);
    Tensor h = RandomTensor({3, 4}, rng, 1.0, Dtype::kFloat64, true);
    Tensor logits = RandomTensor({3, 5}, rng, 1.0, Dtype::kFloat64, true);
    std::vector<Tensor> in = GradCheckParams(*layer, rng);
    in.push_back(h);
    in.push_back(logits);
    FeedbackLayer* l = layer.get();
    cases.push_back({"selfcond_feedback",
                     [=] { return RandomProjection(l->Forward(h, LogSoftmax(logits, 1)), 99); },
                     in, layer});
  }
  {
    DecoderConfig cfg;
    cfg.num_layers = 2;
    cfg.hidden_dim = 8;
    cfg.heads = 2;
    cfg.ffn_dim = 12;
    cfg.max_target_len = 10;
    cfg.dropout = 0.0;
    cfg.vocab_size = 5;
    auto dec = std::make_shared<Decoder>(cfg, Dtype::kFloat64, rng);
    auto enc = std::make_shared<EncoderOutput>();
    enc->latent = RandomTensor({4, 8}, rng, 1.0, Dtype::kFloat64, true);
    enc->subsampled_length = 4;
    std::vector<Tensor> in = GradCheckParams(*dec, rng);
    in.push_back(enc->latent);
    Decoder* d = dec.get();
    const std::vector<int> wrapped = {3, 4, 1, 2, 1};
    cases.push_back({"decoder_stack",
                     [=] { return d->TeacherForcedLoss(*enc, wrapped, RunMode::Eval()); }, in,
                     dec});
  }
  {
    Tensor logits = RandomTensor({6, 4}, rng, 1.0, Dtype::kFloat64, true);
    const std::vector<int> labels = {1, 3, 3};
    cases.push_back({"ctc_loss", [=] { return CtcLoss(LogSoftmax(logits, 1), labels); },
                     {logits}, {}});
    Tensor raw = RandomTensor({5, 4}, rng, 1.0, Dtype::kFloat64, true);
    const std::vector<int> l2 = {2, 1};
    cases.push_back({"ctc_loss_raw", [=] { return CtcLoss(raw, l2); }, {raw}, {}});
  }
  {
    auto enc = std::make_shared<Encoder>(GradSuiteEncoder(3), Dtype::kFloat64, rng);
    Tensor x = RandomTensor({6, 6}, rng, 1.0, Dtype::kFloat64, true);
    std::vector<Tensor> in = GradCheckParams(*enc, rng);
    in.push_back(x);
    Encoder* e = enc.get();
    const std::vector<int> labels = {1, 3};
    cases.push_back({"encoder_with_selfcond",
                     [=] {
                       EncoderOutput out = e->Encode(x, RunMode::Eval());
                       Tensor l = CtcLoss(out.ctc_log_posteriors, labels);
                       for (const Tensor& tap : out.tap_log_posteriors) {
                         l = Add(l, CtcLoss(tap, labels));
                       }
                       return Add(l, RandomProjection(out.latent, 5));
                     },
                     in, enc});
  }
  return cases;
}

}  // namespace whale::testing

#endif  // WHALE_TESTS_GRADIENT_SUITE_H_
