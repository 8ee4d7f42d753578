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

#include "search/beam_search.h"

#include <algorithm>
#include <cmath>

#include "base/error.h"

namespace whale {

void BeamConfig::Validate() const {
  if (beam_size < 1) throw ValidationError("beam_size must be >= 1");
  if (nbest < 1) throw ValidationError("nbest must be >= 1");
  if (!(lambda_ctc >= 0.0 && lambda_ctc <= 1.0)) {
    throw ValidationError("lambda_ctc must be in [0, 1]");
  }
  if (max_len < 0) throw ValidationError("max_len must be >= 0");
}

double JointScore(double lambda_ctc, double ctc, double att) {
  double s = 0.0;
  if (lambda_ctc > 0.0) s += lambda_ctc * ctc;
  if (lambda_ctc < 1.0) s += (1.0 - lambda_ctc) * att;
  return s;
}

bool RanksBefore(const Hypothesis& a, const Hypothesis& b) {
  if (a.joint != b.joint) return a.joint > b.joint;
  if (a.tokens.size() != b.tokens.size()) return a.tokens.size() < b.tokens.size();
  if (a.tokens != b.tokens) return a.tokens < b.tokens;
  return a.finished && !b.finished;
}

namespace {

bool Usable(const Hypothesis& h, double lambda) {
  if (std::isnan(h.joint)) return false;
  if (lambda > 0.0 && !std::isfinite(h.ctc_logprob)) return false;
  if (lambda < 1.0 && !std::isfinite(h.att_logprob)) return false;
  return true;
}

}  // namespace

SearchResult JointBeamSearch(const Tensor& ctc_log_posteriors, AttentionScorer& att,
                             std::span<const int> start, std::span<const int> labels,
                             int eos, const BeamConfig& cfg, int blank) {
  cfg.Validate();
  CtcPrefixScorer ctc(ctc_log_posteriors, blank);
  const double lambda = cfg.lambda_ctc;

  Hypothesis root;
  root.ctc_state = ctc.Initial();
  root.joint = 0.0;
  std::vector<Hypothesis> live = {root};
  std::vector<Hypothesis> finished;
  Hypothesis best_live = root;
  bool have_live = true;

  std::vector<int> prefix(start.begin(), start.end());
  while (!live.empty()) {
    std::vector<Hypothesis> cands;
    for (const Hypothesis& h : live) {
      prefix.resize(start.size());
      prefix.insert(prefix.end(), h.tokens.begin(), h.tokens.end());
      const std::vector<double> lp = att.NextLogProbs(prefix);

      Hypothesis end = h;
      end.finished = true;
      end.att_logprob = h.att_logprob + lp.at(eos);
      end.ctc_logprob = h.ctc_state.FinalScore();
      end.joint = JointScore(lambda, end.ctc_logprob, end.att_logprob) +
                  cfg.length_penalty * static_cast<double>(h.tokens.size());
      if (Usable(end, lambda)) cands.push_back(std::move(end));

      if (static_cast<int>(h.tokens.size()) >= cfg.max_len) continue;
      for (int c : labels) {
        Hypothesis n;
        n.tokens = h.tokens;
        n.tokens.push_back(c);
        n.att_logprob = h.att_logprob + lp.at(c);
        n.ctc_state = ctc.Extend(h.ctc_state, c);
        n.ctc_logprob = n.ctc_state.score;
        n.joint = JointScore(lambda, n.ctc_logprob, n.att_logprob) +
                  cfg.length_penalty * static_cast<double>(n.tokens.size());
        if (Usable(n, lambda)) cands.push_back(std::move(n));
      }
    }
    std::sort(cands.begin(), cands.end(), RanksBefore);
    if (static_cast<int>(cands.size()) > cfg.beam_size) cands.resize(cfg.beam_size);

    live.clear();
    for (Hypothesis& h : cands) {
      if (h.finished) {
        finished.push_back(std::move(h));
      } else {
        if (!have_live || RanksBefore(h, best_live)) {
          best_live = h;
          have_live = true;
        }
        live.push_back(std::move(h));
      }
    }
    std::sort(finished.begin(), finished.end(), RanksBefore);

    // Extending can only lower both terms, so once the n-best finished
    // hypotheses beat every live one the result is settled.
    if (cfg.length_penalty <= 0.0 && !live.empty() &&
        static_cast<int>(finished.size()) >= cfg.nbest &&
        finished[cfg.nbest - 1].joint >= live.front().joint) {
      break;
    }
  }

  SearchResult result;
  if (finished.empty()) {
    result.truncated = true;
    if (have_live) result.nbest.push_back(best_live);
    return result;
  }
  if (static_cast<int>(finished.size()) > cfg.nbest) finished.resize(cfg.nbest);
  result.nbest = std::move(finished);
  return result;
}

SearchResult GreedyTranscribe(const Tensor& ctc_log_posteriors, AttentionScorer& att,
                              std::span<const int> start, std::span<const int> labels,
                              int eos, double lambda_ctc, int max_len, int blank) {
  BeamConfig cfg;
  cfg.beam_size = 1;
  cfg.nbest = 1;
  cfg.lambda_ctc = lambda_ctc;
  cfg.max_len = max_len;
  return JointBeamSearch(ctc_log_posteriors, att, start, labels, eos, cfg, blank);
}

}  // namespace whale
