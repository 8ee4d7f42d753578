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

#include "tensor/ops.h"

#include <algorithm>
#include <cmath>
#include <limits>

namespace whale {

namespace {

void RequireSameDtype(const Tensor& a, const Tensor& b, const char* op) {
  if (a.dtype() != b.dtype()) {
    throw ShapeError(std::string(op) + ": dtype mismatch " +
                     DtypeName(a.dtype()) + " vs " + DtypeName(b.dtype()));
  }
}

void RequireRank(const Tensor& x, int rank, const char* op) {
  if (x.rank() != rank) {
    throw ShapeError(std::string(op) + ": expected rank " +
                     std::to_string(rank) + ", got shape " +
                     ShapeToString(x.shape()));
  }
}

int NormalizeAxis(int axis, int rank, const char* op) {
  if (axis < 0) axis += rank;
  if (axis < 0 || axis >= rank) {
    throw ShapeError(std::string(op) + ": axis out of range");
  }
  return axis;
}

// Shape split into (outer, n, inner) around `axis`.
struct AxisSplit {
  int64_t outer = 1;
  int64_t n = 1;
  int64_t inner = 1;
};

AxisSplit SplitAt(const Shape& shape, int axis) {
  AxisSplit s;
  for (int i = 0; i < axis; ++i) s.outer *= shape[i];
  s.n = shape[axis];
  for (size_t i = axis + 1; i < shape.size(); ++i) s.inner *= shape[i];
  return s;
}

// c = op(a) * op(b); c must be zero-initialised, shape m x n.
template <typename T>
void Gemm(bool ta, bool tb, int64_t m, int64_t n, int64_t k, const T* a,
          const T* b, T* c) {
  if (!ta && !tb) {
    for (int64_t i = 0; i < m; ++i) {
      T* crow = c + i * n;
      for (int64_t p = 0; p < k; ++p) {
        const T aip = a[i * k + p];
        if (aip == T(0)) continue;
        const T* brow = b + p * n;
        for (int64_t j = 0; j < n; ++j) crow[j] += aip * brow[j];
      }
    }
  } else if (!ta && tb) {
    for (int64_t i = 0; i < m; ++i) {
      const T* arow = a + i * k;
      for (int64_t j = 0; j < n; ++j) {
        const T* brow = b + j * k;
        T acc = 0;
        for (int64_t p = 0; p < k; ++p) acc += arow[p] * brow[p];
        c[i * n + j] = acc;
      }
    }
  } else if (ta && !tb) {
    for (int64_t p = 0; p < k; ++p) {
      const T* brow = b + p * n;
      for (int64_t i = 0; i < m; ++i) {
        const T api = a[p * m + i];
        if (api == T(0)) continue;
        T* crow = c + i * n;
        for (int64_t j = 0; j < n; ++j) crow[j] += api * brow[j];
      }
    }
  } else {
    for (int64_t i = 0; i < m; ++i) {
      for (int64_t j = 0; j < n; ++j) {
        T acc = 0;
        for (int64_t p = 0; p < k; ++p) acc += a[p * m + i] * b[j * k + p];
        c[i * n + j] = acc;
      }
    }
  }
}

struct BroadcastPlan {
  Shape out;
  std::vector<int64_t> stride_a;
  std::vector<int64_t> stride_b;
  bool same_shape = false;
};

BroadcastPlan PlanBroadcast(const Shape& a, const Shape& b, const char* op) {
  BroadcastPlan plan;
  if (a == b) {
    plan.out = a;
    plan.same_shape = true;
    return plan;
  }
  const size_t rank = std::max(a.size(), b.size());
  Shape pa(rank, 1), pb(rank, 1);
  std::copy(a.begin(), a.end(), pa.begin() + (rank - a.size()));
  std::copy(b.begin(), b.end(), pb.begin() + (rank - b.size()));
  plan.out.resize(rank);
  for (size_t i = 0; i < rank; ++i) {
    if (pa[i] == pb[i] || pb[i] == 1) {
      plan.out[i] = pa[i];
    } else if (pa[i] == 1) {
      plan.out[i] = pb[i];
    } else {
      throw ShapeError(std::string(op) + ": cannot broadcast " +
                       ShapeToString(a) + " with " + ShapeToString(b));
    }
  }
  auto strides = [&](const Shape& padded) {
    std::vector<int64_t> s(rank, 0);
    int64_t acc = 1;
    for (size_t i = rank; i-- > 0;) {
      s[i] = (padded[i] == 1 && plan.out[i] != 1) ? 0 : acc;
      acc *= padded[i];
    }
    return s;
  };
  plan.stride_a = strides(pa);
  plan.stride_b = strides(pb);
  return plan;
}

// Calls fn(out_index, a_index, b_index) for every output element.
template <typename Fn>
void ForEachBroadcast(const BroadcastPlan& plan, Fn&& fn) {
  const int64_t total = NumElements(plan.out);
  if (plan.same_shape) {
    for (int64_t i = 0; i < total; ++i) fn(i, i, i);
    return;
  }
  const size_t rank = plan.out.size();
  std::vector<int64_t> idx(rank, 0);
  int64_t ia = 0, ib = 0;
  for (int64_t o = 0; o < total; ++o) {
    fn(o, ia, ib);
    for (size_t d = rank; d-- > 0;) {
      ++idx[d];
      ia += plan.stride_a[d];
      ib += plan.stride_b[d];
      if (idx[d] < plan.out[d]) break;
      ia -= plan.stride_a[d] * idx[d];
      ib -= plan.stride_b[d] * idx[d];
      idx[d] = 0;
    }
  }
}

template <typename T>
T SigmoidScalar(T x) {
  return T(1) / (T(1) + std::exp(-x));
}

}  // namespace

Tensor MatMul(const Tensor& a, const Tensor& b, bool transpose_a,
              bool transpose_b) {
  RequireRank(a, 2, "matmul");
  RequireRank(b, 2, "matmul");
  RequireSameDtype(a, b, "matmul");
  const int64_t m = transpose_a ? a.cols() : a.rows();
  const int64_t k = transpose_a ? a.rows() : a.cols();
  const int64_t kb = transpose_b ? b.cols() : b.rows();
  const int64_t n = transpose_b ? b.rows() : b.cols();
  if (k != kb) {
    throw ShapeError("matmul: inner dimensions differ, " +
                     ShapeToString(a.shape()) + (transpose_a ? "^T" : "") +
                     " x " + ShapeToString(b.shape()) +
                     (transpose_b ? "^T" : ""));
  }
  const Dtype dtype = a.dtype();
  Buffer out(dtype, m * n);
  DispatchDtype(dtype, [&]<typename T>() {
    Gemm<T>(transpose_a, transpose_b, m, n, k, a.data<T>(), b.data<T>(),
            out.data<T>());
  });
  const bool ta = transpose_a, tb = transpose_b;
  return MakeOpResult(
      "matmul", {m, n}, std::move(out), {a, b},
      [a, b, m, n, k, ta, tb](const TensorImpl&, const Buffer& g) {
        std::vector<Buffer> grads(2);
        DispatchDtype(g.dtype(), [&]<typename T>() {
          const T* gp = g.data<T>();
          if (a.requires_grad()) {
            Buffer ga(g.dtype(), m * k);
            if (!ta && !tb) {
              Gemm<T>(false, true, m, k, n, gp, b.data<T>(), ga.data<T>());
            } else if (!ta && tb) {
              Gemm<T>(false, false, m, k, n, gp, b.data<T>(), ga.data<T>());
            } else if (ta && !tb) {
              Gemm<T>(false, true, k, m, n, b.data<T>(), gp, ga.data<T>());
            } else {
              Gemm<T>(true, true, k, m, n, b.data<T>(), gp, ga.data<T>());
            }
            grads[0] = std::move(ga);
          }
          if (b.requires_grad()) {
            Buffer gb(g.dtype(), k * n);
            if (!tb && !ta) {
              Gemm<T>(true, false, k, n, m, a.data<T>(), gp, gb.data<T>());
            } else if (!tb && ta) {
              Gemm<T>(false, false, k, n, m, a.data<T>(), gp, gb.data<T>());
            } else if (tb && !ta) {
              Gemm<T>(true, false, n, k, m, gp, a.data<T>(), gb.data<T>());
            } else {
              Gemm<T>(true, true, n, k, m, gp, a.data<T>(), gb.data<T>());
            }
            grads[1] = std::move(gb);
          }
        });
        return grads;
      });
}

Tensor Add(const Tensor& a, const Tensor& b) {
  RequireSameDtype(a, b, "add");
  BroadcastPlan plan = PlanBroadcast(a.shape(), b.shape(), "add");
  Buffer out(a.dtype(), NumElements(plan.out));
  DispatchDtype(a.dtype(), [&]<typename T>() {
    const T* pa = a.data<T>();
    const T* pb = b.data<T>();
    T* po = out.data<T>();
    ForEachBroadcast(plan, [&](int64_t o, int64_t ia, int64_t ib) {
      po[o] = pa[ia] + pb[ib];
    });
  });
  Shape out_shape = plan.out;
  return MakeOpResult(
      "add", out_shape, std::move(out), {a, b},
      [a, b, plan](const TensorImpl&, const Buffer& g) {
        std::vector<Buffer> grads(2);
        DispatchDtype(g.dtype(), [&]<typename T>() {
          const T* gp = g.data<T>();
          Buffer ga, gb;
          if (a.requires_grad()) ga = Buffer(g.dtype(), a.numel());
          if (b.requires_grad()) gb = Buffer(g.dtype(), b.numel());
          T* pa = ga.empty() ? nullptr : ga.data<T>();
          T* pb = gb.empty() ? nullptr : gb.data<T>();
          ForEachBroadcast(plan, [&](int64_t o, int64_t ia, int64_t ib) {
            if (pa) pa[ia] += gp[o];
            if (pb) pb[ib] += gp[o];
          });
          grads[0] = std::move(ga);
          grads[1] = std::move(gb);
        });
        return grads;
      });
}

Tensor Mul(const Tensor& a, const Tensor& b) {
  RequireSameDtype(a, b, "mul");
  BroadcastPlan plan = PlanBroadcast(a.shape(), b.shape(), "mul");
  Buffer out(a.dtype(), NumElements(plan.out));
  DispatchDtype(a.dtype(), [&]<typename T>() {
    const T* pa = a.data<T>();
    const T* pb = b.data<T>();
    T* po = out.data<T>();
    ForEachBroadcast(plan, [&](int64_t o, int64_t ia, int64_t ib) {
      po[o] = pa[ia] * pb[ib];
    });
  });
  Shape out_shape = plan.out;
  return MakeOpResult(
      "mul", out_shape, std::move(out), {a, b},
      [a, b, plan](const TensorImpl&, const Buffer& g) {
        std::vector<Buffer> grads(2);
        DispatchDtype(g.dtype(), [&]<typename T>() {
          const T* gp = g.data<T>();
          const T* va = a.data<T>();
          const T* vb = b.data<T>();
          Buffer ga, gb;
          if (a.requires_grad()) ga = Buffer(g.dtype(), a.numel());
          if (b.requires_grad()) gb = Buffer(g.dtype(), b.numel());
          T* pa = ga.empty() ? nullptr : ga.data<T>();
          T* pb = gb.empty() ? nullptr : gb.data<T>();
          ForEachBroadcast(plan, [&](int64_t o, int64_t ia, int64_t ib) {
            if (pa) pa[ia] += gp[o] * vb[ib];
            if (pb) pb[ib] += gp[o] * va[ia];
          });
          grads[0] = std::move(ga);
          grads[1] = std::move(gb);
        });
        return grads;
      });
}

Tensor Scale(const Tensor& x, double factor) {
  Buffer out(x.dtype(), x.numel());
  DispatchDtype(x.dtype(), [&]<typename T>() {
    const T* px = x.data<T>();
    T* po = out.data<T>();
    const T f = static_cast<T>(factor);
    for (int64_t i = 0; i < x.numel(); ++i) po[i] = px[i] * f;
  });
  return MakeOpResult("mul", x.shape(), std::move(out), {x},
                      [factor](const TensorImpl&, const Buffer& g) {
                        Buffer gx(g.dtype(), g.size());
                        DispatchDtype(g.dtype(), [&]<typename T>() {
                          const T f = static_cast<T>(factor);
                          const T* gp = g.data<T>();
                          T* px = gx.data<T>();
                          for (size_t i = 0; i < g.size(); ++i) {
                            px[i] = gp[i] * f;
                          }
                        });
                        std::vector<Buffer> grads;
                        grads.push_back(std::move(gx));
                        return grads;
                      });
}

Tensor Sub(const Tensor& a, const Tensor& b) { return Add(a, Scale(b, -1.0)); }

namespace {

template <typename T>
void CheckFinite(const T* p, int64_t n, const char* op) {
  for (int64_t i = 0; i < n; ++i) {
    if (std::isnan(p[i])) {
      throw NumericError(std::string(op) + ": NaN input");
    }
  }
}

Tensor SoftmaxImpl(const Tensor& x, int axis, bool log_space) {
  const char* name = log_space ? "log_softmax" : "softmax";
  axis = NormalizeAxis(axis, x.rank(), name);
  const AxisSplit s = SplitAt(x.shape(), axis);
  Buffer out(x.dtype(), x.numel());
  DispatchDtype(x.dtype(), [&]<typename T>() {
    const T* px = x.data<T>();
    CheckFinite(px, x.numel(), name);
    T* po = out.data<T>();
    for (int64_t o = 0; o < s.outer; ++o) {
      for (int64_t in = 0; in < s.inner; ++in) {
        const int64_t base = o * s.n * s.inner + in;
        T mx = -std::numeric_limits<T>::infinity();
        for (int64_t j = 0; j < s.n; ++j) {
          mx = std::max(mx, px[base + j * s.inner]);
        }
        T sum = 0;
        for (int64_t j = 0; j < s.n; ++j) {
          sum += std::exp(px[base + j * s.inner] - mx);
        }
        if (log_space) {
          const T lse = mx + std::log(sum);
          for (int64_t j = 0; j < s.n; ++j) {
            po[base + j * s.inner] = px[base + j * s.inner] - lse;
          }
        } else {
          for (int64_t j = 0; j < s.n; ++j) {
            po[base + j * s.inner] = std::exp(px[base + j * s.inner] - mx) / sum;
          }
        }
      }
    }
  });
  return MakeOpResult(
      name, x.shape(), std::move(out), {x},
      [s, log_space](const TensorImpl& y, const Buffer& g) {
        Buffer gx(g.dtype(), g.size());
        DispatchDtype(g.dtype(), [&]<typename T>() {
          const T* py = y.data.data<T>();
          const T* gp = g.data<T>();
          T* px = gx.data<T>();
          for (int64_t o = 0; o < s.outer; ++o) {
            for (int64_t in = 0; in < s.inner; ++in) {
              const int64_t base = o * s.n * s.inner + in;
              T acc = 0;
              if (log_space) {
                for (int64_t j = 0; j < s.n; ++j) acc += gp[base + j * s.inner];
                for (int64_t j = 0; j < s.n; ++j) {
                  const int64_t i = base + j * s.inner;
                  px[i] = gp[i] - std::exp(py[i]) * acc;
                }
              } else {
                for (int64_t j = 0; j < s.n; ++j) {
                  const int64_t i = base + j * s.inner;
                  acc += gp[i] * py[i];
                }
                for (int64_t j = 0; j < s.n; ++j) {
                  const int64_t i = base + j * s.inner;
                  px[i] = py[i] * (gp[i] - acc);
                }
              }
            }
          }
        });
        std::vector<Buffer> grads;
        grads.push_back(std::move(gx));
        return grads;
      });
}

}  // namespace

Tensor Softmax(const Tensor& x, int axis) { return SoftmaxImpl(x, axis, false); }
Tensor LogSoftmax(const Tensor& x, int axis) {
  return SoftmaxImpl(x, axis, true);
}

Tensor LayerNorm(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                 double eps) {
  const int64_t d = x.dim(-1);
  const int64_t rows = x.numel() / d;
  if (gamma.defined() && gamma.numel() != d) {
    throw ShapeError("layer_norm: gamma " + ShapeToString(gamma.shape()) +
                     " vs input " + ShapeToString(x.shape()));
  }
  if (beta.defined() && beta.numel() != d) {
    throw ShapeError("layer_norm: beta " + ShapeToString(beta.shape()) +
                     " vs input " + ShapeToString(x.shape()));
  }
  if (gamma.defined()) RequireSameDtype(x, gamma, "layer_norm");
  if (beta.defined()) RequireSameDtype(x, beta, "layer_norm");
  Buffer out(x.dtype(), x.numel());
  auto xhat = std::make_shared<Buffer>(x.dtype(), x.numel());
  auto rstd = std::make_shared<std::vector<double>>(rows);
  DispatchDtype(x.dtype(), [&]<typename T>() {
    const T* px = x.data<T>();
    const T* pg = gamma.defined() ? gamma.data<T>() : nullptr;
    const T* pb = beta.defined() ? beta.data<T>() : nullptr;
    T* po = out.data<T>();
    T* ph = xhat->data<T>();
    for (int64_t r = 0; r < rows; ++r) {
      const T* row = px + r * d;
      double mean = 0;
      for (int64_t j = 0; j < d; ++j) mean += row[j];
      mean /= d;
      double var = 0;
      for (int64_t j = 0; j < d; ++j) {
        const double c = row[j] - mean;
        var += c * c;
      }
      var /= d;
      const double rs = 1.0 / std::sqrt(var + eps);
      (*rstd)[r] = rs;
      for (int64_t j = 0; j < d; ++j) {
        const T h = static_cast<T>((row[j] - mean) * rs);
        ph[r * d + j] = h;
        T v = h;
        if (pg) v *= pg[j];
        if (pb) v += pb[j];
        po[r * d + j] = v;
      }
    }
  });
  std::vector<Tensor> inputs = {x};
  if (gamma.defined()) inputs.push_back(gamma);
  if (beta.defined()) inputs.push_back(beta);
  const bool has_gamma = gamma.defined(), has_beta = beta.defined();
  return MakeOpResult(
      "layer_norm", x.shape(), std::move(out), inputs,
      [x, gamma, beta, xhat, rstd, rows, d, has_gamma, has_beta](
          const TensorImpl&, const Buffer& g) {
        std::vector<Buffer> grads(1 + has_gamma + has_beta);
        DispatchDtype(g.dtype(), [&]<typename T>() {
          const T* gp = g.data<T>();
          const T* ph = xhat->data<T>();
          const T* pg = has_gamma ? gamma.data<T>() : nullptr;
          Buffer gx(g.dtype(), g.size());
          Buffer gg, gb;
          if (has_gamma && gamma.requires_grad()) gg = Buffer(g.dtype(), d);
          if (has_beta && beta.requires_grad()) gb = Buffer(g.dtype(), d);
          T* pgx = gx.data<T>();
          std::vector<double> gh(d);
          for (int64_t r = 0; r < rows; ++r) {
            double mean_gh = 0, mean_ghh = 0;
            for (int64_t j = 0; j < d; ++j) {
              const int64_t i = r * d + j;
              gh[j] = pg ? static_cast<double>(gp[i]) * pg[j] : gp[i];
              mean_gh += gh[j];
              mean_ghh += gh[j] * ph[i];
              if (!gg.empty()) gg.data<T>()[j] += gp[i] * ph[i];
              if (!gb.empty()) gb.data<T>()[j] += gp[i];
            }
            mean_gh /= d;
            mean_ghh /= d;
            const double rs = (*rstd)[r];
            for (int64_t j = 0; j < d; ++j) {
              const int64_t i = r * d + j;
              pgx[i] = static_cast<T>(rs * (gh[j] - mean_gh - ph[i] * mean_ghh));
            }
          }
          if (x.requires_grad()) grads[0] = std::move(gx);
          size_t slot = 1;
          if (has_gamma) grads[slot++] = std::move(gg);
          if (has_beta) grads[slot++] = std::move(gb);
        });
        return grads;
      });
}

Tensor DepthwiseConv1d(const Tensor& x, const Tensor& kernel,
                       const Tensor& bias) {
  RequireRank(x, 2, "depthwise_conv1d");
  RequireRank(kernel, 2, "depthwise_conv1d");
  RequireSameDtype(x, kernel, "depthwise_conv1d");
  const int64_t t_len = x.rows(), c = x.cols(), k = kernel.rows();
  if (kernel.cols() != c || k % 2 == 0) {
    throw ShapeError("depthwise_conv1d: kernel " +
                     ShapeToString(kernel.shape()) + " vs input " +
                     ShapeToString(x.shape()) + " (kernel length must be odd)");
  }
  if (bias.defined() && bias.numel() != c) {
    throw ShapeError("depthwise_conv1d: bias " + ShapeToString(bias.shape()));
  }
  const int64_t pad = (k - 1) / 2;
  Buffer out(x.dtype(), x.numel());
  DispatchDtype(x.dtype(), [&]<typename T>() {
    const T* px = x.data<T>();
    const T* pk = kernel.data<T>();
    T* po = out.data<T>();
    if (bias.defined()) {
      const T* pb = bias.data<T>();
      for (int64_t t = 0; t < t_len; ++t) {
        for (int64_t ch = 0; ch < c; ++ch) po[t * c + ch] = pb[ch];
      }
    }
    for (int64_t t = 0; t < t_len; ++t) {
      for (int64_t j = 0; j < k; ++j) {
        const int64_t src = t + j - pad;
        if (src < 0 || src >= t_len) continue;
        for (int64_t ch = 0; ch < c; ++ch) {
          po[t * c + ch] += pk[j * c + ch] * px[src * c + ch];
        }
      }
    }
  });
  std::vector<Tensor> inputs = {x, kernel};
  if (bias.defined()) inputs.push_back(bias);
  return MakeOpResult(
      "depthwise_conv1d", x.shape(), std::move(out), inputs,
      [x, kernel, bias, t_len, c, k, pad](const TensorImpl&, const Buffer& g) {
        std::vector<Buffer> grads(bias.defined() ? 3 : 2);
        DispatchDtype(g.dtype(), [&]<typename T>() {
          const T* gp = g.data<T>();
          const T* px = x.data<T>();
          const T* pk = kernel.data<T>();
          Buffer gx(g.dtype(), x.numel()), gk(g.dtype(), kernel.numel());
          T* pgx = gx.data<T>();
          T* pgk = gk.data<T>();
          for (int64_t t = 0; t < t_len; ++t) {
            for (int64_t j = 0; j < k; ++j) {
              const int64_t src = t + j - pad;
              if (src < 0 || src >= t_len) continue;
              for (int64_t ch = 0; ch < c; ++ch) {
                const T go = gp[t * c + ch];
                pgx[src * c + ch] += go * pk[j * c + ch];
                pgk[j * c + ch] += go * px[src * c + ch];
              }
            }
          }
          if (x.requires_grad()) grads[0] = std::move(gx);
          if (kernel.requires_grad()) grads[1] = std::move(gk);
          if (bias.defined() && bias.requires_grad()) {
            Buffer gb(g.dtype(), c);
            for (int64_t t = 0; t < t_len; ++t) {
              for (int64_t ch = 0; ch < c; ++ch) {
                gb.data<T>()[ch] += gp[t * c + ch];
              }
            }
            grads[2] = std::move(gb);
          }
        });
        return grads;
      });
}

Tensor Conv1d(const Tensor& x, const Tensor& weight, const Tensor& bias,
              int kernel, int stride, int pad) {
  RequireRank(x, 2, "conv1d");
  RequireRank(weight, 2, "conv1d");
  RequireSameDtype(x, weight, "conv1d");
  const int64_t t_len = x.rows(), cin = x.cols();
  if (kernel < 1 || stride < 1 || pad < 0 || weight.rows() != kernel * cin) {
    throw ShapeError("conv1d: weight " + ShapeToString(weight.shape()) +
                     " does not fit input " + ShapeToString(x.shape()) +
                     " with kernel " + std::to_string(kernel));
  }
  const int64_t cout = weight.cols();
  if (bias.defined() && bias.numel() != cout) {
    throw ShapeError("conv1d: bias " + ShapeToString(bias.shape()));
  }
  const int64_t span = t_len + 2 * pad - kernel;
  if (span < 0) {
    throw InputTooShortError("conv1d: input length " + std::to_string(t_len) +
                             " shorter than kernel");
  }
  const int64_t t_out = span / stride + 1;
  const int64_t width = kernel * cin;
  auto col = std::make_shared<Buffer>(x.dtype(), t_out * width);
  Buffer out(x.dtype(), t_out * cout);
  DispatchDtype(x.dtype(), [&]<typename T>() {
    const T* px = x.data<T>();
    T* pc = col->data<T>();
    for (int64_t o = 0; o < t_out; ++o) {
      for (int64_t j = 0; j < kernel; ++j) {
        const int64_t src = o * stride + j - pad;
        if (src < 0 || src >= t_len) continue;
        std::copy(px + src * cin, px + (src + 1) * cin,
                  pc + o * width + j * cin);
      }
    }
    T* po = out.data<T>();
    Gemm<T>(false, false, t_out, cout, width, pc, weight.data<T>(), po);
    if (bias.defined()) {
      const T* pb = bias.data<T>();
      for (int64_t o = 0; o < t_out; ++o) {
        for (int64_t ch = 0; ch < cout; ++ch) po[o * cout + ch] += pb[ch];
      }
    }
  });
  std::vector<Tensor> inputs = {x, weight};
  if (bias.defined()) inputs.push_back(bias);
  return MakeOpResult(
      "conv1d", {t_out, cout}, std::move(out), inputs,
      [x, weight, bias, col, t_len, cin, cout, t_out, width, kernel, stride,
       pad](const TensorImpl&, const Buffer& g) {
        std::vector<Buffer> grads(bias.defined() ? 3 : 2);
        DispatchDtype(g.dtype(), [&]<typename T>() {
          const T* gp = g.data<T>();
          if (weight.requires_grad()) {
            Buffer gw(g.dtype(), width * cout);
            Gemm<T>(true, false, width, cout, t_out, col->data<T>(), gp,
                    gw.data<T>());
            grads[1] = std::move(gw);
          }
          if (x.requires_grad()) {
            Buffer gcol(g.dtype(), t_out * width);
            Gemm<T>(false, true, t_out, width, cout, gp, weight.data<T>(),
                    gcol.data<T>());
            Buffer gx(g.dtype(), t_len * cin);
            T* pgx = gx.data<T>();
            const T* pgc = gcol.data<T>();
            for (int64_t o = 0; o < t_out; ++o) {
              for (int64_t j = 0; j < kernel; ++j) {
                const int64_t src = o * stride + j - pad;
                if (src < 0 || src >= t_len) continue;
                for (int64_t ch = 0; ch < cin; ++ch) {
                  pgx[src * cin + ch] += pgc[o * width + j * cin + ch];
                }
              }
            }
            grads[0] = std::move(gx);
          }
          if (bias.defined() && bias.requires_grad()) {
            Buffer gb(g.dtype(), cout);
            for (int64_t o = 0; o < t_out; ++o) {
              for (int64_t ch = 0; ch < cout; ++ch) {
                gb.data<T>()[ch] += gp[o * cout + ch];
              }
            }
            grads[2] = std::move(gb);
          }
        });
        return grads;
      });
}

Tensor Glu(const Tensor& x) {
  const int64_t width = x.dim(-1);
  if (width % 2 != 0) {
    throw ShapeError("glu: last axis must be even, got " +
                     ShapeToString(x.shape()));
  }
  const int64_t half = width / 2;
  const int64_t rows = x.numel() / width;
  Shape out_shape = x.shape();
  out_shape.back() = half;
  Buffer out(x.dtype(), rows * half);
  DispatchDtype(x.dtype(), [&]<typename T>() {
    const T* px = x.data<T>();
    T* po = out.data<T>();
    for (int64_t r = 0; r < rows; ++r) {
      for (int64_t j = 0; j < half; ++j) {
        po[r * half + j] =
            px[r * width + j] * SigmoidScalar(px[r * width + half + j]);
      }
    }
  });
  return MakeOpResult(
      "glu", out_shape, std::move(out), {x},
      [x, rows, half, width](const TensorImpl&, const Buffer& g) {
        Buffer gx(g.dtype(), x.numel());
        DispatchDtype(g.dtype(), [&]<typename T>() {
          const T* px = x.data<T>();
          const T* gp = g.data<T>();
          T* pgx = gx.data<T>();
          for (int64_t r = 0; r < rows; ++r) {
            for (int64_t j = 0; j < half; ++j) {
              const T a = px[r * width + j];
              const T s = SigmoidScalar(px[r * width + half + j]);
              const T go = gp[r * half + j];
              pgx[r * width + j] = go * s;
              pgx[r * width + half + j] = go * a * s * (T(1) - s);
            }
          }
        });
        std::vector<Buffer> grads;
        grads.push_back(std::move(gx));
        return grads;
      });
}

namespace {

// Elementwise unary op; deriv(x, y) gives dy/dx.
template <typename Forward, typename Deriv>
Tensor Unary(const char* name, const Tensor& x, Forward forward,
             Deriv deriv) {
  Buffer out(x.dtype(), x.numel());
  DispatchDtype(x.dtype(), [&]<typename T>() {
    const T* px = x.data<T>();
    T* po = out.data<T>();
    for (int64_t i = 0; i < x.numel(); ++i) po[i] = forward(px[i]);
  });
  return MakeOpResult(
      name, x.shape(), std::move(out), {x},
      [x, deriv](const TensorImpl& y, const Buffer& g) {
        Buffer gx(g.dtype(), g.size());
        DispatchDtype(g.dtype(), [&]<typename T>() {
          const T* px = x.data<T>();
          const T* py = y.data.data<T>();
          const T* gp = g.data<T>();
          T* pgx = gx.data<T>();
          for (size_t i = 0; i < g.size(); ++i) {
            pgx[i] = gp[i] * deriv(px[i], py[i]);
          }
        });
        std::vector<Buffer> grads;
        grads.push_back(std::move(gx));
        return grads;
      });
}

}  // namespace

Tensor Sigmoid(const Tensor& x) {
  return Unary(
      "sigmoid", x, [](auto v) { return SigmoidScalar(v); },
      [](auto, auto y) { return y * (decltype(y)(1) - y); });
}

Tensor Swish(const Tensor& x) {
  return Unary(
      "swish", x, [](auto v) { return v * SigmoidScalar(v); },
      [](auto v, auto) {
        const auto s = SigmoidScalar(v);
        return s + v * s * (decltype(v)(1) - s);
      });
}

Tensor Relu(const Tensor& x) {
  return Unary(
      "relu", x,
      [](auto v) { return v > decltype(v)(0) ? v : decltype(v)(0); },
      [](auto v, auto) { return v > decltype(v)(0) ? decltype(v)(1) : decltype(v)(0); });
}

Tensor Embedding(const Tensor& table, std::span<const int> ids) {
  RequireRank(table, 2, "embedding");
  const int64_t n = table.rows(), e = table.cols();
  if (ids.empty()) throw ShapeError("embedding: empty id list");
  std::vector<int> idv(ids.begin(), ids.end());
  for (int id : idv) {
    if (id < 0 || id >= n) {
      throw ShapeError("embedding: id " + std::to_string(id) +
                       " outside table " + ShapeToString(table.shape()));
    }
  }
  const int64_t len = static_cast<int64_t>(idv.size());
  Buffer out(table.dtype(), len * e);
  DispatchDtype(table.dtype(), [&]<typename T>() {
    const T* pt = table.data<T>();
    T* po = out.data<T>();
    for (int64_t r = 0; r < len; ++r) {
      std::copy(pt + idv[r] * e, pt + (idv[r] + 1) * e, po + r * e);
    }
  });
  return MakeOpResult(
      "embedding", {len, e}, std::move(out), {table},
      [idv, n, e](const TensorImpl&, const Buffer& g) {
        Buffer gt(g.dtype(), n * e);
        DispatchDtype(g.dtype(), [&]<typename T>() {
          const T* gp = g.data<T>();
          T* pt = gt.data<T>();
          for (size_t r = 0; r < idv.size(); ++r) {
            for (int64_t j = 0; j < e; ++j) pt[idv[r] * e + j] += gp[r * e + j];
          }
        });
        std::vector<Buffer> grads;
        grads.push_back(std::move(gt));
        return grads;
      });
}

Tensor Concat(const std::vector<Tensor>& parts, int axis) {
  if (parts.empty()) throw ShapeError("concat: no inputs");
  const Tensor& first = parts.front();
  axis = NormalizeAxis(axis, first.rank(), "concat");
  Shape out_shape = first.shape();
  out_shape[axis] = 0;
  for (const Tensor& p : parts) {
    RequireSameDtype(first, p, "concat");
    if (p.rank() != first.rank()) {
      throw ShapeError("concat: rank mismatch " + ShapeToString(first.shape()) +
                       " vs " + ShapeToString(p.shape()));
    }
    for (int d = 0; d < first.rank(); ++d) {
      if (d != axis && p.shape()[d] != first.shape()[d]) {
        throw ShapeError("concat: shape mismatch " +
                         ShapeToString(first.shape()) + " vs " +
                         ShapeToString(p.shape()));
      }
    }
    out_shape[axis] += p.shape()[axis];
  }
  const AxisSplit s = SplitAt(out_shape, axis);
  Buffer out(first.dtype(), NumElements(out_shape));
  std::vector<int64_t> offsets;
  DispatchDtype(first.dtype(), [&]<typename T>() {
    T* po = out.data<T>();
    int64_t offset = 0;
    for (const Tensor& p : parts) {
      offsets.push_back(offset);
      const int64_t len = p.shape()[axis];
      const T* pp = p.data<T>();
      for (int64_t o = 0; o < s.outer; ++o) {
        std::copy(pp + o * len * s.inner, pp + (o + 1) * len * s.inner,
                  po + (o * s.n + offset) * s.inner);
      }
      offset += len;
    }
  });
  return MakeOpResult(
      "concat", out_shape, std::move(out), parts,
      [parts, offsets, s, axis](const TensorImpl&, const Buffer& g) {
        std::vector<Buffer> grads(parts.size());
        DispatchDtype(g.dtype(), [&]<typename T>() {
          const T* gp = g.data<T>();
          for (size_t i = 0; i < parts.size(); ++i) {
            if (!parts[i].requires_grad()) continue;
            const int64_t len = parts[i].shape()[axis];
            Buffer gi(g.dtype(), parts[i].numel());
            T* pi = gi.data<T>();
            for (int64_t o = 0; o < s.outer; ++o) {
              std::copy(gp + (o * s.n + offsets[i]) * s.inner,
                        gp + (o * s.n + offsets[i] + len) * s.inner,
                        pi + o * len * s.inner);
            }
            grads[i] = std::move(gi);
          }
        });
        return grads;
      });
}

Tensor Slice(const Tensor& x, int axis, int64_t start, int64_t length) {
  axis = NormalizeAxis(axis, x.rank(), "slice");
  const int64_t extent = x.shape()[axis];
  if (start < 0 || length <= 0 || start + length > extent) {
    throw ShapeError("slice: [" + std::to_string(start) + ", " +
                     std::to_string(start + length) + ") outside axis of " +
                     ShapeToString(x.shape()));
  }
  const AxisSplit s = SplitAt(x.shape(), axis);
  Shape out_shape = x.shape();
  out_shape[axis] = length;
  Buffer out(x.dtype(), NumElements(out_shape));
  DispatchDtype(x.dtype(), [&]<typename T>() {
    const T* px = x.data<T>();
    T* po = out.data<T>();
    for (int64_t o = 0; o < s.outer; ++o) {
      std::copy(px + (o * s.n + start) * s.inner,
                px + (o * s.n + start + length) * s.inner,
                po + o * length * s.inner);
    }
  });
  const int64_t numel = x.numel();
  return MakeOpResult(
      "slice", out_shape, std::move(out), {x},
      [s, start, length, numel](const TensorImpl&, const Buffer& g) {
        Buffer gx(g.dtype(), numel);
        DispatchDtype(g.dtype(), [&]<typename T>() {
          const T* gp = g.data<T>();
          T* px = gx.data<T>();
          for (int64_t o = 0; o < s.outer; ++o) {
            std::copy(gp + o * length * s.inner,
                      gp + (o + 1) * length * s.inner,
                      px + (o * s.n + start) * s.inner);
          }
        });
        std::vector<Buffer> grads;
        grads.push_back(std::move(gx));
        return grads;
      });
}

Tensor Reshape(const Tensor& x, const Shape& shape) {
  if (NumElements(shape) != x.numel()) {
    throw ShapeError("reshape: " + ShapeToString(x.shape()) + " to " +
                     ShapeToString(shape));
  }
  return MakeOpResult("reshape", shape, x.buffer(), {x},
                      [](const TensorImpl&, const Buffer& g) {
                        return std::vector<Buffer>{g};
                      });
}

namespace {

Tensor Reduce(const Tensor& x, bool mean) {
  const int64_t n = x.numel();
  Buffer out(x.dtype(), 1);
  DispatchDtype(x.dtype(), [&]<typename T>() {
    const T* px = x.data<T>();
    T acc = 0;
    for (int64_t i = 0; i < n; ++i) acc += px[i];
    if (mean) acc /= static_cast<T>(n);
    out.data<T>()[0] = acc;
  });
  return MakeOpResult(mean ? "mean" : "sum", {}, std::move(out), {x},
                      [n, mean](const TensorImpl&, const Buffer& g) {
                        Buffer gx(g.dtype(), n);
                        const double v = g.Get(0) / (mean ? n : 1);
                        gx.Fill(v);
                        std::vector<Buffer> grads;
                        grads.push_back(std::move(gx));
                        return grads;
                      });
}

}  // namespace

Tensor Sum(const Tensor& x) { return Reduce(x, false); }
Tensor Mean(const Tensor& x) { return Reduce(x, true); }

Tensor CrossEntropy(const Tensor& logits, std::span<const int> targets) {
  RequireRank(logits, 2, "cross_entropy");
  const int64_t n = logits.rows(), v = logits.cols();
  if (static_cast<int64_t>(targets.size()) != n) {
    throw ShapeError("cross_entropy: " + std::to_string(targets.size()) +
                     " targets for logits " + ShapeToString(logits.shape()));
  }
  std::vector<int> tv(targets.begin(), targets.end());
  for (int t : tv) {
    if (t < 0 || t >= v) {
      throw ShapeError("cross_entropy: target " + std::to_string(t) +
                       " outside vocabulary of " + std::to_string(v));
    }
  }
  auto probs = std::make_shared<Buffer>(logits.dtype(), n * v);
  Buffer out(logits.dtype(), 1);
  DispatchDtype(logits.dtype(), [&]<typename T>() {
    const T* px = logits.data<T>();
    CheckFinite(px, n * v, "cross_entropy");
    T* pp = probs->data<T>();
    double total = 0;
    for (int64_t r = 0; r < n; ++r) {
      const T* row = px + r * v;
      T mx = *std::max_element(row, row + v);
      T sum = 0;
      for (int64_t j = 0; j < v; ++j) sum += std::exp(row[j] - mx);
      const T lse = mx + std::log(sum);
      for (int64_t j = 0; j < v; ++j) pp[r * v + j] = std::exp(row[j] - lse);
      total += lse - row[tv[r]];
    }
    out.data<T>()[0] = static_cast<T>(total / n);
  });
  return MakeOpResult(
      "cross_entropy", {}, std::move(out), {logits},
      [probs, tv, n, v](const TensorImpl&, const Buffer& g) {
        Buffer gx(g.dtype(), n * v);
        DispatchDtype(g.dtype(), [&]<typename T>() {
          const T scale = static_cast<T>(g.Get(0) / n);
          const T* pp = probs->data<T>();
          T* px = gx.data<T>();
          for (int64_t r = 0; r < n; ++r) {
            for (int64_t j = 0; j < v; ++j) {
              px[r * v + j] = pp[r * v + j] * scale;
            }
            px[r * v + tv[r]] -= scale;
          }
        });
        std::vector<Buffer> grads;
        grads.push_back(std::move(gx));
        return grads;
      });
}

Tensor Dropout(const Tensor& x, double p, Rng* rng, bool training) {
  if (!training || p <= 0.0) return x;
  if (p >= 1.0) throw ValidationError("dropout: p must be < 1");
  if (rng == nullptr) throw ValidationError("dropout: training needs an rng");
  auto mask = std::make_shared<Buffer>(x.dtype(), x.numel());
  const double keep_scale = 1.0 / (1.0 - p);
  for (int64_t i = 0; i < x.numel(); ++i) {
    mask->Set(i, rng->Uniform() < p ? 0.0 : keep_scale);
  }
  Buffer out(x.dtype(), x.numel());
  DispatchDtype(x.dtype(), [&]<typename T>() {
    const T* px = x.data<T>();
    const T* pm = mask->data<T>();
    T* po = out.data<T>();
    for (int64_t i = 0; i < x.numel(); ++i) po[i] = px[i] * pm[i];
  });
  return MakeOpResult("dropout", x.shape(), std::move(out), {x},
                      [mask](const TensorImpl&, const Buffer& g) {
                        Buffer gx(g.dtype(), g.size());
                        DispatchDtype(g.dtype(), [&]<typename T>() {
                          const T* gp = g.data<T>();
                          const T* pm = mask->data<T>();
                          T* px = gx.data<T>();
                          for (size_t i = 0; i < g.size(); ++i) {
                            px[i] = gp[i] * pm[i];
                          }
                        });
                        std::vector<Buffer> grads;
                        grads.push_back(std::move(gx));
                        return grads;
                      });
}

}  // namespace whale
