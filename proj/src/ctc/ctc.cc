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

#include "ctc/ctc.h"

#include <algorithm>
#include <cmath>

#include "base/error.h"

namespace whale {

double LogAddExp(double a, double b) {
  if (a == kLogZero) return b;
  if (b == kLogZero) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

int CtcMinFrames(std::span<const int> labels) {
  int n = static_cast<int>(labels.size());
  for (size_t i = 1; i < labels.size(); ++i) {
    if (labels[i] == labels[i - 1]) ++n;
  }
  return n;
}

namespace {

void CheckPosteriors(const Tensor& lp, const char* who) {
  if (lp.rank() != 2) {
    throw ShapeError(std::string(who) + ": expected T x V log-posteriors, got " +
                     ShapeToString(lp.shape()));
  }
}

}  // namespace

Tensor CtcLoss(const Tensor& log_posteriors, std::span<const int> labels,
               int blank) {
  CheckPosteriors(log_posteriors, "ctc_loss");
  const int T = static_cast<int>(log_posteriors.rows());
  const int V = static_cast<int>(log_posteriors.cols());
  for (int l : labels) {
    if (l == blank || l < 0 || l >= V) {
      throw ValidationError("ctc_loss: label " + std::to_string(l) +
                            " is blank or outside [0, " + std::to_string(V) + ")");
    }
  }
  const int need = CtcMinFrames(labels);
  if (T < need) {
    throw ImpossibleAlignmentError("ctc_loss: " + std::to_string(T) +
                                   " frames cannot emit " +
                                   std::to_string(labels.size()) +
                                   " labels (need " + std::to_string(need) + ")");
  }

  // Blank-interleaved labels.
  const int S = 2 * static_cast<int>(labels.size()) + 1;
  std::vector<int> ext(S, blank);
  for (size_t i = 0; i < labels.size(); ++i) ext[2 * i + 1] = labels[i];
  auto skip_ok = [&](int s) {  // may jump from s-2 to s
    return s >= 2 && ext[s] != blank && ext[s] != ext[s - 2];
  };

  const Buffer& in = log_posteriors.buffer();
  auto lp = [&](int t, int s) { return in.Get(static_cast<size_t>(t) * V + ext[s]); };

  std::vector<double> alpha(static_cast<size_t>(T) * S, kLogZero);
  alpha[0] = lp(0, 0);
  if (S > 1) alpha[1] = lp(0, 1);
  for (int t = 1; t < T; ++t) {
    const double* prev = &alpha[static_cast<size_t>(t - 1) * S];
    double* cur = &alpha[static_cast<size_t>(t) * S];
    for (int s = 0; s < S; ++s) {
      double a = prev[s];
      if (s >= 1) a = LogAddExp(a, prev[s - 1]);
      if (skip_ok(s)) a = LogAddExp(a, prev[s - 2]);
      cur[s] = a == kLogZero ? kLogZero : a + lp(t, s);
    }
  }
  const double* last = &alpha[static_cast<size_t>(T - 1) * S];
  const double log_total = S > 1 ? LogAddExp(last[S - 1], last[S - 2]) : last[0];
  if (!std::isfinite(log_total)) {
    throw NumericError("ctc_loss: total alignment probability is zero");
  }

  Buffer out(log_posteriors.dtype(), 1);
  out.Set(0, -log_total);
  std::vector<int> ext_copy = ext;
  return MakeOpResult(
      "ctc_loss", {}, std::move(out), {log_posteriors},
      [alpha = std::move(alpha), ext = std::move(ext_copy), T, V, S, blank,
       log_total, x = log_posteriors](const TensorImpl&, const Buffer& g) {
        const Buffer& in = x.buffer();
        auto lp = [&](int t, int s) {
          return in.Get(static_cast<size_t>(t) * V + ext[s]);
        };
        auto skip_ok = [&](int s) {
          return s >= 2 && ext[s] != blank && ext[s] != ext[s - 2];
        };
        // beta[t][s]: log P(frames t+1.. finish | state s at frame t).
        std::vector<double> beta(static_cast<size_t>(T) * S, kLogZero);
        beta[static_cast<size_t>(T - 1) * S + S - 1] = 0.0;
        if (S > 1) beta[static_cast<size_t>(T - 1) * S + S - 2] = 0.0;
        for (int t = T - 2; t >= 0; --t) {
          const double* next = &beta[static_cast<size_t>(t + 1) * S];
          double* cur = &beta[static_cast<size_t>(t) * S];
          for (int s = 0; s < S; ++s) {
            double b = next[s] == kLogZero ? kLogZero : next[s] + lp(t + 1, s);
            if (s + 1 < S && next[s + 1] != kLogZero) {
              b = LogAddExp(b, next[s + 1] + lp(t + 1, s + 1));
            }
            if (s + 2 < S && skip_ok(s + 2) && next[s + 2] != kLogZero) {
              b = LogAddExp(b, next[s + 2] + lp(t + 1, s + 2));
            }
            cur[s] = b;
          }
        }
        const double go = g.Get(0);
        Buffer grad(x.dtype(), static_cast<size_t>(T) * V);
        std::vector<double> acc(static_cast<size_t>(T) * V, 0.0);
        for (int t = 0; t < T; ++t) {
          for (int s = 0; s < S; ++s) {
            const double ab = alpha[static_cast<size_t>(t) * S + s] +
                              beta[static_cast<size_t>(t) * S + s];
            if (ab == kLogZero || std::isnan(ab)) continue;
            acc[static_cast<size_t>(t) * V + ext[s]] -= std::exp(ab - log_total);
          }
        }
        for (size_t i = 0; i < acc.size(); ++i) grad.Set(i, go * acc[i]);
        std::vector<Buffer> grads;
        grads.push_back(std::move(grad));
        return grads;
      });
}

std::vector<int> CtcCollapse(std::span<const int> frame_ids, int blank) {
  std::vector<int> out;
  int prev = -1;
  for (int id : frame_ids) {
    if (id != prev && id != blank) out.push_back(id);
    prev = id;
  }
  return out;
}

std::vector<int> CtcGreedy(const Tensor& log_posteriors, int blank) {
  CheckPosteriors(log_posteriors, "ctc_greedy");
  const int64_t T = log_posteriors.rows(), V = log_posteriors.cols();
  std::vector<int> path(T);
  for (int64_t t = 0; t < T; ++t) {
    int best = 0;
    double best_v = log_posteriors.at(t, 0);
    for (int64_t v = 1; v < V; ++v) {
      const double x = log_posteriors.at(t, v);
      if (x > best_v) {
        best_v = x;
        best = static_cast<int>(v);
      }
    }
    path[t] = best;
  }
  return CtcCollapse(path, blank);
}

double PrefixState::FinalScore() const {
  if (nb.empty()) return kLogZero;
  return LogAddExp(nb.back(), b.back());
}

CtcPrefixScorer::CtcPrefixScorer(const Tensor& log_posteriors, int blank)
    : blank_(blank) {
  CheckPosteriors(log_posteriors, "ctc_prefix_scorer");
  frames_ = static_cast<int>(log_posteriors.rows());
  vocab_ = static_cast<int>(log_posteriors.cols());
  if (frames_ < 1) throw InputTooShortError("ctc prefix scoring needs T >= 1");
  lp_ = log_posteriors.ToVector();
}

PrefixState CtcPrefixScorer::Initial() const {
  PrefixState s;
  s.nb.assign(frames_, kLogZero);
  s.b.assign(frames_, kLogZero);
  double acc = 0.0;
  for (int t = 0; t < frames_; ++t) {
    acc += lp(t, blank_);
    s.b[t] = acc;
  }
  s.score = 0.0;
  return s;
}

PrefixState CtcPrefixScorer::Extend(const PrefixState& g, int c) const {
  if (c == blank_ || c < 0 || c >= vocab_) {
    throw ValidationError("prefix extension with invalid token " +
                          std::to_string(c));
  }
  PrefixState h;
  h.nb.assign(frames_, kLogZero);
  h.b.assign(frames_, kLogZero);
  h.last = c;
  h.length = g.length + 1;
  // Mass of g that may be followed by a fresh emission of c.
  auto phi = [&](int t) {
    return c == g.last ? g.b[t] : LogAddExp(g.b[t], g.nb[t]);
  };
  if (g.length == 0) h.nb[0] = lp(0, c);
  double psi = h.nb[0];
  for (int t = 1; t < frames_; ++t) {
    const double p = phi(t - 1);
    const double y = lp(t, c);
    h.nb[t] = LogAddExp(h.nb[t - 1], p) + y;
    h.b[t] = LogAddExp(h.b[t - 1], h.nb[t - 1]) + lp(t, blank_);
    if (p != kLogZero) psi = LogAddExp(psi, p + y);
  }
  h.score = psi;
  return h;
}

}  // namespace whale
