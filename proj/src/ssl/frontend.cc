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

#include "ssl/frontend.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "base/error.h"

namespace whale {

void SslConfig::Validate() const {
  auto fail = [](const std::string& msg) { throw ValidationError("ssl config: " + msg); };
  if (input_dim < 1 || hidden_dim < 1 || num_blocks < 1) fail("dimensions must be positive");
  if (!(mask_prob > 0 && mask_prob < 1)) fail("mask_prob must be in (0, 1)");
  if (mask_span < 1) fail("mask_span must be >= 1");
  if (codebook_size < 2) fail("codebook_size must be >= 2");
  if (codebook_dim < 1) fail("codebook_dim must be >= 1");
  if (num_distractors < 1) fail("num_distractors must be >= 1");
  if (contrastive_tap_block < 1 || contrastive_tap_block > num_blocks) {
    fail("contrastive_tap_block must be in [1, num_blocks]");
  }
}

ConformerConfig SslConfig::Block() const {
  ConformerConfig c;
  c.dim = hidden_dim;
  c.heads = heads;
  c.ffn_dim = ffn_dim;
  c.conv_kernel = conv_kernel;
  c.rel_window = rel_window;
  c.dropout = dropout;
  return c;
}

MaskSet SpanMaskFromStarts(int T, const std::vector<int>& starts, int span) {
  std::vector<char> on(T, 0);
  for (int s : starts) {
    for (int t = s; t < std::min(T, s + span); ++t) {
      if (t >= 0) on[t] = 1;
    }
  }
  MaskSet m;
  for (int t = 0; t < T; ++t) {
    if (on[t]) m.indices.push_back(t);
  }
  return m;
}

MaskSet DrawSpanMask(int T, Rng& rng, const SslConfig& cfg) {
  if (T < cfg.mask_span) {
    throw InputTooShortError("span mask: " + std::to_string(T) +
                             " frames is shorter than the span " +
                             std::to_string(cfg.mask_span));
  }
  std::vector<int> starts;
  for (int t = 0; t < T; ++t) {
    if (rng.Bernoulli(cfg.mask_prob)) starts.push_back(t);
  }
  return SpanMaskFromStarts(T, starts, cfg.mask_span);
}

int Quantize(std::span<const double> frame, const std::vector<double>& codebook,
             int K) {
  const size_t D = frame.size();
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int k = 0; k < K; ++k) {
    double d = 0;
    for (size_t i = 0; i < D; ++i) {
      const double diff = frame[i] - codebook[k * D + i];
      d += diff * diff;
    }
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return best;
}

SslLossTerms ComputeSslLoss(const Tensor& tap_proj, const Tensor& codes,
                            const Tensor& mlm_logits,
                            const std::vector<int>& targets,
                            const std::vector<std::vector<int>>& distractors,
                            double contrastive_weight, double mlm_weight) {
  const int64_t M = mlm_logits.rows(), K = mlm_logits.cols();
  if (static_cast<int64_t>(targets.size()) != M ||
      static_cast<int64_t>(distractors.size()) != M || tap_proj.rows() != M) {
    throw ShapeError("ssl loss: inconsistent masked-row counts");
  }
  SslLossTerms out;
  out.mlm = CrossEntropy(mlm_logits, targets);

  std::vector<int> ids;
  int64_t rows = 0, width = -1;
  for (int64_t i = 0; i < M; ++i) {
    if (distractors[i].empty()) continue;
    const int64_t w = 1 + static_cast<int64_t>(distractors[i].size());
    if (width >= 0 && w != width) {
      throw ValidationError("ssl loss: rows need equal distractor counts");
    }
    width = w;
    ids.push_back(static_cast<int>(i * K + targets[i]));
    for (int d : distractors[i]) ids.push_back(static_cast<int>(i * K + targets[d]));
    ++rows;
  }
  if (rows > 0) {
    Tensor sims = MatMul(tap_proj, codes, false, true);  // M x K
    Tensor picked = Embedding(Reshape(sims, {M * K, 1}), ids);
    std::vector<int> zero(rows, 0);
    out.contrastive = CrossEntropy(Reshape(picked, {rows, width}), zero);
  } else {
    out.contrastive = Tensor::Zeros({}, mlm_logits.dtype());
  }
  out.loss = Add(Scale(out.contrastive, contrastive_weight),
                 Scale(out.mlm, mlm_weight));

  int correct = 0;
  for (int64_t i = 0; i < M; ++i) {
    int best = 0;
    for (int64_t k = 1; k < K; ++k) {
      if (mlm_logits.at(i, k) > mlm_logits.at(i, best)) best = static_cast<int>(k);
    }
    correct += best == targets[i];
  }
  out.accuracy = M > 0 ? static_cast<double>(correct) / M : 0.0;
  return out;
}

SslFrontend::SslFrontend(const SslConfig& cfg, Dtype dtype, Rng& rng)
    : cfg_(cfg), dtype_(dtype),
      input_proj_(cfg.input_dim, cfg.hidden_dim, dtype, rng),
      mlm_head_(cfg.hidden_dim, cfg.codebook_size, dtype, rng),
      contrastive_head_(cfg.hidden_dim, cfg.codebook_dim, dtype, rng) {
  cfg_.Validate();
  for (int i = 0; i < cfg.num_blocks; ++i) {
    blocks_.push_back(std::make_unique<ConformerBlock>(cfg.Block(), dtype, rng));
  }
  mask_embedding_ = UniformParam({cfg.input_dim}, 0.1, dtype, rng);

  Rng qrng(cfg.quantizer_seed);
  std::vector<double> proj(static_cast<size_t>(cfg.input_dim) * cfg.codebook_dim);
  for (double& v : proj) v = qrng.Normal();
  quant_proj_ = Tensor::FromData({cfg.input_dim, cfg.codebook_dim}, proj, dtype);
  std::vector<double> book(static_cast<size_t>(cfg.codebook_size) * cfg.codebook_dim);
  for (int k = 0; k < cfg.codebook_size; ++k) {
    double n2 = 0;
    for (int d = 0; d < cfg.codebook_dim; ++d) {
      double& v = book[k * cfg.codebook_dim + d];
      v = qrng.Normal();
      n2 += v * v;
    }
    for (int d = 0; d < cfg.codebook_dim; ++d) {
      book[k * cfg.codebook_dim + d] /= std::sqrt(n2);
    }
  }
  codebook_ = Tensor::FromData({cfg.codebook_size, cfg.codebook_dim}, book, dtype);
}

Tensor SslFrontend::Forward(const Tensor& x, const RunMode& mode, Tensor* tap) const {
  if (x.rank() != 2 || x.cols() != cfg_.input_dim) {
    throw ShapeError("ssl frontend expects T x " + std::to_string(cfg_.input_dim) +
                     " features, got " + ShapeToString(x.shape()));
  }
  Tensor h = input_proj_.Forward(x);
  for (size_t i = 0; i < blocks_.size(); ++i) {
    h = blocks_[i]->Forward(h, mode);
    if (tap != nullptr && static_cast<int>(i) + 1 == cfg_.contrastive_tap_block) {
      *tap = h;
    }
  }
  return h;
}

Tensor SslFrontend::ExtractFeatures(const Tensor& x) const {
  return Forward(x, RunMode::Eval());
}

Tensor SslFrontend::ApplyMask(const Tensor& x, const MaskSet& mask) const {
  if (mask.empty()) return x;
  const int64_t T = x.rows();
  std::vector<double> keep(T, 1.0), put(T, 0.0);
  for (int t : mask.indices) {
    keep[t] = 0.0;
    put[t] = 1.0;
  }
  Tensor keep_col = Tensor::FromData({T, 1}, keep, x.dtype());
  Tensor put_col = Tensor::FromData({T, 1}, put, x.dtype());
  return Add(Mul(x, keep_col), Mul(put_col, mask_embedding_));
}

std::vector<int> SslFrontend::Targets(const Tensor& x) const {
  const int64_t T = x.rows();
  const int F = cfg_.input_dim, C = cfg_.codebook_dim;
  const std::vector<double> book = codebook_.ToVector();
  const std::vector<double> proj = quant_proj_.ToVector();
  std::vector<int> codes(T);
  std::vector<double> z(C);
  for (int64_t t = 0; t < T; ++t) {
    double n2 = 0;
    for (int c = 0; c < C; ++c) {
      double s = 0;
      for (int f = 0; f < F; ++f) s += x.at(t, f) * proj[f * C + c];
      z[c] = s;
      n2 += s * s;
    }
    const double n = n2 > 0 ? std::sqrt(n2) : 1.0;
    for (double& v : z) v /= n;
    codes[t] = Quantize(z, book, cfg_.codebook_size);
  }
  return codes;
}

Tensor SslFrontend::Loss(const Tensor& x, Rng& rng, bool training,
                         SslMetrics* metrics) const {
  const int T = static_cast<int>(x.rows());
  MaskSet mask = DrawSpanMask(T, rng, cfg_);
  if (mask.empty()) mask = DrawSpanMask(T, rng, cfg_);
  if (mask.empty()) mask = SpanMaskFromStarts(T, {0}, cfg_.mask_span);

  const RunMode mode = training ? RunMode::Train(&rng) : RunMode::Eval();
  Tensor tap;
  Tensor final_out = Forward(ApplyMask(x, mask), mode, &tap);

  const std::vector<int> all_targets = Targets(x);
  const int M = static_cast<int>(mask.indices.size());
  std::vector<int> targets(M);
  for (int i = 0; i < M; ++i) targets[i] = all_targets[mask.indices[i]];
  std::vector<std::vector<int>> distractors(M);
  if (M >= 2) {
    for (int i = 0; i < M; ++i) {
      for (int n = 0; n < cfg_.num_distractors; ++n) {
        int j = static_cast<int>(rng.UniformInt(M - 1));
        if (j >= i) ++j;
        distractors[i].push_back(j);
      }
    }
  }
  Tensor tap_proj = contrastive_head_.Forward(Embedding(tap, mask.indices));
  Tensor logits = mlm_head_.Forward(Embedding(final_out, mask.indices));
  SslLossTerms terms =
      ComputeSslLoss(tap_proj, codebook_, logits, targets, distractors,
                     cfg_.contrastive_weight, cfg_.mlm_weight);
  if (metrics != nullptr) {
    metrics->loss = terms.loss.item();
    metrics->contrastive = terms.contrastive.item();
    metrics->mlm = terms.mlm.item();
    metrics->accuracy = terms.accuracy;
    metrics->num_masked = M;
  }
  return terms.loss;
}

void SslFrontend::VisitParams(const std::string& prefix, const ParamVisitor& visit) {
  input_proj_.VisitParams(JoinName(prefix, "input_proj"), visit);
  for (size_t i = 0; i < blocks_.size(); ++i) {
    blocks_[i]->VisitParams(JoinName(prefix, "blocks." + std::to_string(i)), visit);
  }
  visit(JoinName(prefix, "mask_embedding"), mask_embedding_);
  mlm_head_.VisitParams(JoinName(prefix, "mlm_head"), visit);
  contrastive_head_.VisitParams(JoinName(prefix, "contrastive_head"), visit);
  visit(JoinName(prefix, "quantizer.proj"), quant_proj_);
  visit(JoinName(prefix, "quantizer.codebook"), codebook_);
}

}  // namespace whale
