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

#include <gtest/gtest.h>

#include <cmath>

#include "base/error.h"
#include "ctc/ctc.h"
#include "encoder/encoder.h"
#include "test_util.h"

namespace whale {
namespace {

using testing::CheckGradients;
using testing::GradCheckParams;
using testing::RandomProjection;
using testing::RandomTensor;

EncoderConfig SmallEncoder(int blocks = 3) {
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

Tensor RowPermute(const Tensor& x, const std::vector<int>& perm) {
  return Embedding(x, perm);
}

double RelFrobenius(const Tensor& a, const Tensor& b) {
  double d = 0, n = 0;
  for (int64_t i = 0; i < a.numel(); ++i) {
    d += (a.at(i) - b.at(i)) * (a.at(i) - b.at(i));
    n += b.at(i) * b.at(i);
  }
  return std::sqrt(d / n);
}

TEST(TapLayersTest, DefaultRule) {
  EXPECT_EQ(DefaultTapLayers(24), (std::vector<int>{8, 16}));
  EXPECT_EQ(DefaultTapLayers(6), (std::vector<int>{2, 4}));
  EXPECT_EQ(DefaultTapLayers(4), (std::vector<int>{2, 3}));
  EXPECT_EQ(DefaultTapLayers(2), (std::vector<int>{1}));
  EXPECT_TRUE(DefaultTapLayers(1).empty());
}

TEST(TapLayersTest, InvalidTapsRejected) {
  EncoderConfig c = SmallEncoder(4);
  c.tap_layers = {3, 2};
  EXPECT_THROW(c.Validate(), ValidationError);
  c.tap_layers = {4};
  EXPECT_THROW(c.Validate(), ValidationError);
}

TEST(SubsampleTest, CeilLength) {
  Rng rng(1);
  ConvSubsample sub(6, 8, Dtype::kFloat32, rng);
  for (int T = 2; T <= 64; ++T) {
    Tensor y = sub.Forward(RandomTensor({T, 6}, rng, 1.0, Dtype::kFloat32));
    EXPECT_EQ(y.rows(), (T + 1) / 2) << T;
  }
  EXPECT_EQ(sub.Forward(RandomTensor({10, 6}, rng, 1.0, Dtype::kFloat32)).rows(), 5);
  EXPECT_EQ(sub.Forward(RandomTensor({11, 6}, rng, 1.0, Dtype::kFloat32)).rows(), 6);
  EXPECT_THROW(sub.Forward(RandomTensor({1, 6}, rng, 1.0, Dtype::kFloat32)),
               InputTooShortError);
}

TEST(SubsampleTest, GradientCheck) {
  Rng rng(2);
  ConvSubsample sub(4, 5, Dtype::kFloat64, rng);
  Tensor x = RandomTensor({7, 4}, rng, 1.0, Dtype::kFloat64, true);
  std::vector<Tensor> inputs = GradCheckParams(sub, rng);
  inputs.push_back(x);
  auto r = CheckGradients([&] { return RandomProjection(sub.Forward(x), 3); }, inputs);
  EXPECT_LT(r.max_rel_error, 1e-4) << r.worst;
}

TEST(EBranchformerTest, PreservesShape) {
  Rng rng(3);
  EBranchformerBlock block(SmallEncoder(), Dtype::kFloat32, rng);
  Tensor y = block.Forward(RandomTensor({5, 8}, rng, 1.0, Dtype::kFloat32),
                           RunMode::Eval());
  EXPECT_EQ(y.shape(), (Shape{5, 8}));
  EXPECT_THROW(block.Forward(RandomTensor({5, 6}, rng, 1.0, Dtype::kFloat32),
                             RunMode::Eval()),
               ShapeError);
}

TEST(EBranchformerTest, ZeroFusionAndFfnGivesLayerNorm) {
  Rng rng(4);
  EBranchformerBlock block(SmallEncoder(), Dtype::kFloat64, rng);
  block.ZeroFusionAndFfn();
  Tensor x = RandomTensor({5, 8}, rng);
  Tensor y = block.Forward(x, RunMode::Eval());
  Tensor ref = LayerNorm(x);
  for (int64_t i = 0; i < y.numel(); ++i) EXPECT_NEAR(y.at(i), ref.at(i), 1e-12);
}

TEST(EBranchformerTest, GradientCheck) {
  Rng rng(5);
  EBranchformerBlock block(SmallEncoder(), Dtype::kFloat64, rng);
  Tensor x = RandomTensor({5, 8}, rng, 1.0, Dtype::kFloat64, true);
  std::vector<Tensor> inputs = GradCheckParams(block, rng);
  inputs.push_back(x);
  auto r = CheckGradients(
      [&] { return RandomProjection(block.Forward(x, RunMode::Eval()), 4); }, inputs);
  EXPECT_LT(r.max_rel_error, 1e-4) << r.worst;
}

TEST(EBranchformerTest, PermutationProbe) {
  Rng rng(6);
  const int T = 9;
  std::vector<int> perm = {4, 7, 0, 2, 8, 1, 6, 3, 5};
  Tensor x = RandomTensor({T, 8}, rng);

  // Local branch only: order matters.
  EBranchformerBlock local(SmallEncoder(), Dtype::kFloat64, rng);
  local.ZeroAttention();
  Tensor a = RowPermute(local.Forward(x, RunMode::Eval()), perm);
  Tensor b = local.Forward(RowPermute(x, perm), RunMode::Eval());
  EXPECT_GT(RelFrobenius(a, b), 1e-3);

  // Global branch only, no position bias, no fusion conv: equivariant.
  EncoderConfig cfg = SmallEncoder();
  cfg.rel_window = 0;
  cfg.merge_kernel = 1;
  EBranchformerBlock global(cfg, Dtype::kFloat64, rng);
  global.ZeroCgMlp();
  for (auto& [name, p] : NamedParameters(global)) {
    // A 1-tap fusion conv is pointwise and keeps equivariance.
    if (name.rfind("merge_conv", 0) == 0) p.mutable_buffer().Fill(0.5);
  }
  Tensor c = RowPermute(global.Forward(x, RunMode::Eval()), perm);
  Tensor d = global.Forward(RowPermute(x, perm), RunMode::Eval());
  EXPECT_LT(RelFrobenius(c, d), 1e-12);
}

TEST(EncoderTest, OutputContract) {
  Rng rng(7);
  Encoder enc(SmallEncoder(6), Dtype::kFloat32, rng);
  EXPECT_EQ(enc.tap_layers(), (std::vector<int>{2, 4}));
  for (int T : {2, 3, 17, 64}) {
    EncoderOutput out =
        enc.Encode(RandomTensor({T, 6}, rng, 1.0, Dtype::kFloat32), RunMode::Eval());
    EXPECT_EQ(out.subsampled_length, (T + 1) / 2);
    EXPECT_EQ(out.latent.shape(), (Shape{(T + 1) / 2, 8}));
    ASSERT_EQ(out.tap_log_posteriors.size(), 2u);
    for (const Tensor& lp : out.tap_log_posteriors) {
      for (int64_t t = 0; t < lp.rows(); ++t) {
        double s = 0;
        for (int64_t v = 0; v < lp.cols(); ++v) s += std::exp(lp.at(t, v));
        EXPECT_NEAR(s, 1.0, 1e-6);
      }
    }
  }
}

TEST(EncoderTest, DeterministicInEval) {
  Rng rng(8);
  Encoder enc(SmallEncoder(), Dtype::kFloat32, rng);
  Tensor x = RandomTensor({12, 6}, rng, 1.0, Dtype::kFloat32);
  EXPECT_TRUE(enc.Encode(x, RunMode::Eval())
                  .latent.BitwiseEqual(enc.Encode(x, RunMode::Eval()).latent));
}

TEST(EncoderTest, NeutralMaskIsBitIdentical) {
  Rng rng(9);
  Encoder enc(SmallEncoder(), Dtype::kFloat32, rng);
  Tensor x = RandomTensor({12, 6}, rng, 1.0, Dtype::kFloat32);
  LanguageMask neutral{"all", std::vector<double>(5, 1.0)};
  EncoderOutput a = enc.Encode(x, RunMode::Eval());
  EncoderOutput b = enc.Encode(x, RunMode::Eval(), &neutral);
  EXPECT_TRUE(a.latent.BitwiseEqual(b.latent));
  EXPECT_TRUE(a.ctc_log_posteriors.BitwiseEqual(b.ctc_log_posteriors));
  LanguageMask wrong{"x", std::vector<double>(4, 1.0)};
  wrong.weights[1] = 0.5;
  EXPECT_THROW(enc.Encode(x, RunMode::Eval(), &wrong), VocabError);
}

TEST(EncoderTest, ZeroFeedbackEqualsNoSelfConditioning) {
  Rng rng(10);
  EncoderConfig cfg = SmallEncoder(6);
  Rng a_rng(77), b_rng(77);
  Encoder with(cfg, Dtype::kFloat32, a_rng);
  cfg.self_condition = false;
  Encoder without(cfg, Dtype::kFloat32, b_rng);
  for (int k : with.tap_layers()) with.feedback(k).projection().ZeroInit();
  Tensor x = RandomTensor({15, 6}, rng, 1.0, Dtype::kFloat32);
  EXPECT_TRUE(with.Encode(x, RunMode::Eval())
                  .latent.BitwiseEqual(without.Encode(x, RunMode::Eval()).latent));
}

TEST(EncoderTest, CompositeGradientCheck) {
  Rng rng(11);
  Encoder enc(SmallEncoder(3), Dtype::kFloat64, rng);
  Tensor x = RandomTensor({6, 6}, rng, 1.0, Dtype::kFloat64, true);
  std::vector<Tensor> inputs = GradCheckParams(enc, rng);
  inputs.push_back(x);
  const std::vector<int> labels = {1, 3};
  auto loss = [&] {
    EncoderOutput out = enc.Encode(x, RunMode::Eval());
    Tensor l = CtcLoss(out.ctc_log_posteriors, labels);
    for (const Tensor& tap : out.tap_log_posteriors) l = Add(l, CtcLoss(tap, labels));
    return Add(l, RandomProjection(out.latent, 5));
  };
  auto r = CheckGradients(loss, inputs);
  EXPECT_LT(r.max_rel_error, 1e-4) << r.worst;
}

TEST(EncoderTest, GrowthPreservesBlocksAndIsNearIdentity) {
  Rng rng(12);
  Encoder enc(SmallEncoder(2), Dtype::kFloat32, rng);
  Tensor x = RandomTensor({20, 6}, rng, 1.0, Dtype::kFloat32);
  NamedTensors before;
  for (auto& [n, p] : NamedParameters(enc)) before.emplace_back(n, p.Clone());
  Tensor out_before = enc.Encode(x, RunMode::Eval()).latent;

  enc.Grow(2, rng);
  for (auto& [n, p] : NamedParameters(enc)) {
    EXPECT_TRUE(p.BitwiseEqual(FindTensor(before, n))) << n;
  }

  enc.Grow(4, rng);
  EXPECT_EQ(enc.num_blocks(), 4);
  EXPECT_EQ(enc.tap_layers(), (std::vector<int>{2, 3}));
  NamedTensors after = NamedParameters(enc);
  for (auto& [n, p] : before) {
    Tensor q = FindTensor(after, n);
    ASSERT_TRUE(q.defined()) << n;
    EXPECT_TRUE(q.BitwiseEqual(p)) << n;
  }
  Tensor out_after = enc.Encode(x, RunMode::Eval()).latent;
  EXPECT_LT(RelFrobenius(out_after, out_before), 0.10);
  EXPECT_THROW(enc.Grow(3, rng), ValidationError);
}

}  // namespace
}  // namespace whale
