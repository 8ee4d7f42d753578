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

#include "ssl/conformer.h"

namespace whale {

ConvModule::ConvModule(int dim, int kernel, Dtype dtype, Rng& rng)
    : pw1_(dim, 2 * dim, dtype, rng), dw_(dim, kernel, dtype, rng),
      norm_(dim, dtype), pw2_(dim, dim, dtype, rng) {}

Tensor ConvModule::Forward(const Tensor& x) const {
  Tensor h = Glu(pw1_.Forward(x));
  h = Swish(norm_.Forward(dw_.Forward(h)));
  return pw2_.Forward(h);
}

void ConvModule::VisitParams(const std::string& prefix, const ParamVisitor& visit) {
  pw1_.VisitParams(JoinName(prefix, "pw1"), visit);
  dw_.VisitParams(JoinName(prefix, "dw"), visit);
  norm_.VisitParams(JoinName(prefix, "norm"), visit);
  pw2_.VisitParams(JoinName(prefix, "pw2"), visit);
}

ConformerBlock::ConformerBlock(const ConformerConfig& cfg, Dtype dtype, Rng& rng)
    : cfg_(cfg),
      ln_ffn1_(cfg.dim, dtype), ln_att_(cfg.dim, dtype), ln_conv_(cfg.dim, dtype),
      ln_ffn2_(cfg.dim, dtype), ln_out_(cfg.dim, dtype),
      ffn1_(cfg.dim, cfg.ffn_dim, cfg.dropout, dtype, rng),
      att_(cfg.dim, cfg.heads, cfg.rel_window, dtype, rng),
      conv_(cfg.dim, cfg.conv_kernel, dtype, rng),
      ffn2_(cfg.dim, cfg.ffn_dim, cfg.dropout, dtype, rng) {}

Tensor ConformerBlock::Forward(const Tensor& x, const RunMode& mode) const {
  if (x.rank() != 2 || x.cols() != cfg_.dim) {
    throw ShapeError("conformer block expects T x " + std::to_string(cfg_.dim) +
                     ", got " + ShapeToString(x.shape()));
  }
  auto drop = [&](const Tensor& t) {
    return Dropout(t, cfg_.dropout, mode.rng, mode.training);
  };
  Tensor h = Add(x, Scale(drop(ffn1_.Forward(ln_ffn1_.Forward(x), mode)), 0.5));
  Tensor a = ln_att_.Forward(h);
  h = Add(h, drop(att_.Forward(a, a, false)));
  h = Add(h, drop(conv_.Forward(ln_conv_.Forward(h))));
  h = Add(h, Scale(drop(ffn2_.Forward(ln_ffn2_.Forward(h), mode)), 0.5));
  return ln_out_.Forward(h);
}

void ConformerBlock::VisitParams(const std::string& prefix,
                                 const ParamVisitor& visit) {
  ln_ffn1_.VisitParams(JoinName(prefix, "ln_ffn1"), visit);
  ffn1_.VisitParams(JoinName(prefix, "ffn1"), visit);
  ln_att_.VisitParams(JoinName(prefix, "ln_att"), visit);
  att_.VisitParams(JoinName(prefix, "att"), visit);
  ln_conv_.VisitParams(JoinName(prefix, "ln_conv"), visit);
  conv_.VisitParams(JoinName(prefix, "conv"), visit);
  ln_ffn2_.VisitParams(JoinName(prefix, "ln_ffn2"), visit);
  ffn2_.VisitParams(JoinName(prefix, "ffn2"), visit);
  ln_out_.VisitParams(JoinName(prefix, "ln_out"), visit);
}

void ConformerBlock::ZeroResidualBranches() {
  ffn1_.output().ZeroInit();
  att_.output_proj().ZeroInit();
  conv_.output().ZeroInit();
  ffn2_.output().ZeroInit();
}

}  // namespace whale
