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
#include "selfcond/selfcond.h"
#include "test_util.h"

namespace whale {
namespace {

using testing::CheckGradients;
using testing::RandomProjection;
using testing::RandomTensor;

// Vocab: <blank> a b c <sos> <eos> <l1> <l2>
Vocab SmallVocab() {
  return Vocab::Build({{"l1", {"a", "b"}}, {"l2", {"a", "b", "c"}}});
}

TEST(LanguageMaskTest, Construction) {
  Vocab v = SmallVocab();
  LanguageMask m = BuildLanguageMask("l1", v, 1e-3);
  EXPECT_EQ(m.language, "l1");
  ASSERT_EQ(m.weights.size(), 8u);
  EXPECT_EQ(m.weights[0], 1.0);
  EXPECT_EQ(m.weights[1], 1.0);
  EXPECT_EQ(m.weights[2], 1.0);
  EXPECT_EQ(m.weights[3], 1e-3);
  EXPECT_FALSE(m.IsNeutral());
  EXPECT_TRUE(BuildLanguageMask("l2", v).IsNeutral());
}

TEST(LanguageMaskTest, Guards) {
  Vocab v = SmallVocab();
  EXPECT_THROW(BuildLanguageMask("l1", v, 0.0), ValidationError);
  EXPECT_THROW(BuildLanguageMask("l1", v, -1.0), ValidationError);
  EXPECT_THROW(BuildLanguageMask("xx", v), UnknownLanguageError);
}

TEST(AdaptationTest, NeutralMaskIsIdentity) {
  Rng rng(1);
  Tensor lp = LogSoftmax(RandomTensor({5, 8}, rng), 1);
  LanguageMask m = BuildLanguageMask("l2", SmallVocab());
  Tensor out = ApplyAdaptation(lp, m);
  EXPECT_TRUE(out.BitwiseEqual(lp));
  EXPECT_EQ(CtcGreedy(out), CtcGreedy(lp));
}

TEST(AdaptationTest, UniformWithNearZeroEpsilon) {
  Tensor lp = Tensor::Full({1, 4}, std::log(0.25), Dtype::kFloat64);
  LanguageMask m{"x", {1.0, 1.0, 1e-300, 1e-300}};
  Tensor out = ApplyAdaptation(lp, m);
  EXPECT_NEAR(std::exp(out.at(0, 0)), 0.5, 1e-12);
  EXPECT_NEAR(std::exp(out.at(0, 1)), 0.5, 1e-12);
  EXPECT_NEAR(std::exp(out.at(0, 2)), 0.0, 1e-12);
  EXPECT_NEAR(std::exp(out.at(0, 3)), 0.0, 1e-12);
}

TEST(AdaptationTest, ValidDistributionAndNoIncreaseForDisallowed) {
  Rng rng(2);
  Vocab v = SmallVocab();
  LanguageMask m = BuildLanguageMask("l1", v, 1e-2);
  for (int trial = 0; trial < 20; ++trial) {
    Tensor lp = LogSoftmax(RandomTensor({6, 8}, rng, 2.0), 1);
    Tensor out = ApplyAdaptation(lp, m);
    for (int t = 0; t < 6; ++t) {
      double s = 0;
      for (int k = 0; k < 8; ++k) {
        s += std::exp(out.at(t, k));
        if (m.weights[k] < 1.0) EXPECT_LT(out.at(t, k), lp.at(t, k));
      }
      EXPECT_NEAR(s, 1.0, 1e-6);
    }
  }
}

TEST(AdaptationTest, WidthMismatchIsVocabError) {
  Tensor lp = Tensor::Full({2, 5}, std::log(0.2), Dtype::kFloat64);
  EXPECT_THROW(ApplyAdaptation(lp, BuildLanguageMask("l1", SmallVocab())),
               VocabError);
}

TEST(AdaptationTest, ConfusableFrameFollowsTargetLanguage) {
  // Frames where "c" (not in l1) narrowly beats "b" flip to "b" under l1.
  Vocab v = SmallVocab();
  std::vector<double> p = {0.05, 0.05, 0.40, 0.45, 0.01, 0.01, 0.015, 0.015,
                           0.90, 0.02, 0.02, 0.03, 0.01, 0.01, 0.005, 0.005};
  std::vector<double> logp(p.size());
  for (size_t i = 0; i < p.size(); ++i) logp[i] = std::log(p[i]);
  Tensor lp = Tensor::FromData({2, 8}, logp, Dtype::kFloat64);
  EXPECT_EQ(CtcGreedy(lp), (std::vector<int>{3}));
  Tensor adapted = ApplyAdaptation(lp, BuildLanguageMask("l1", v));
  EXPECT_EQ(CtcGreedy(adapted), (std::vector<int>{2}));
}

TEST(FeedbackTest, ZeroProjectionIsLayerNorm) {
  Rng rng(3);
  FeedbackLayer layer(8, 6, Dtype::kFloat64, rng);
  layer.projection().ZeroInit();
  Tensor h = RandomTensor({4, 6}, rng);
  Tensor lp = LogSoftmax(RandomTensor({4, 8}, rng), 1);
  Tensor out = layer.Forward(h, lp);
  Tensor ref = LayerNorm(h);
  for (int64_t i = 0; i < out.numel(); ++i) EXPECT_NEAR(out.at(i), ref.at(i), 1e-12);
}

TEST(FeedbackTest, HandComputedInstance) {
  Rng rng(4);
  const int T = 3, V = 3, D = 2;
  FeedbackLayer layer(V, D, Dtype::kFloat64, rng);
  Tensor h = RandomTensor({T, D}, rng);
  Tensor lp = LogSoftmax(RandomTensor({T, V}, rng), 1);
  Tensor out = layer.Forward(h, lp);
  const Tensor& w = layer.projection().weight();
  for (int t = 0; t < T; ++t) {
    double z[D];
    for (int d = 0; d < D; ++d) {
      z[d] = h.at(t, d);
      for (int k = 0; k < V; ++k) z[d] += std::exp(lp.at(t, k)) * w.at(k, d);
    }
    // Two-element layer norm: (+-|z0-z1|/2) / sqrt(((z0-z1)/2)^2 + eps).
    const double half = (z[0] - z[1]) / 2;
    const double denom = std::sqrt(half * half + 1e-5);
    EXPECT_NEAR(out.at(t, 0), half / denom, 1e-6);
    EXPECT_NEAR(out.at(t, 1), -half / denom, 1e-6);
  }
}

TEST(FeedbackTest, GradientReachesBothInputs) {
  Rng rng(5);
  FeedbackLayer layer(5, 4, Dtype::kFloat64, rng);
  Tensor h = RandomTensor({3, 4}, rng, 1.0, Dtype::kFloat64, true);
  Tensor logits = RandomTensor({3, 5}, rng, 1.0, Dtype::kFloat64, true);
  auto loss = [&] {
    return RandomProjection(layer.Forward(h, LogSoftmax(logits, 1)), 99);
  };
  auto result = CheckGradients(loss, {h, logits});
  EXPECT_LT(result.max_rel_error, 1e-4);
  h.ZeroGrad();
  logits.ZeroGrad();
  loss().Backward();
  double gh = 0, gl = 0;
  for (double g : h.grad().ToVector()) gh += std::abs(g);
  for (double g : logits.grad().ToVector()) gl += std::abs(g);
  EXPECT_GT(gh, 0.0);
  EXPECT_GT(gl, 0.0);
}

TEST(FeedbackTest, ShapeMismatch) {
  Rng rng(6);
  FeedbackLayer layer(5, 4, Dtype::kFloat64, rng);
  EXPECT_THROW(layer.Forward(RandomTensor({3, 4}, rng), RandomTensor({2, 5}, rng)),
               ShapeError);
  EXPECT_THROW(layer.Forward(RandomTensor({3, 4}, rng), RandomTensor({3, 6}, rng)),
               ShapeError);
}

}  // namespace
}  // namespace whale
