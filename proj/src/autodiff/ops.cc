// autodiff/ops.cc
//
// Copyright 2026  The tsasr Authors
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

#include "autodiff/ops.h"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "base/tsasr-error.h"

namespace tsasr {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMatrix>;
using ConstMatMap = Eigen::Map<const RowMatrix>;

ConstMatMap View(const std::vector<double> &v, int64_t rows, int64_t cols) {
  return ConstMatMap(v.data(), rows, cols);
}
ConstMatMap View(std::span<const double> v, int64_t rows, int64_t cols) {
  return ConstMatMap(v.data(), rows, cols);
}
MatMap View(std::vector<double> &v, int64_t rows, int64_t cols) {
  return MatMap(v.data(), rows, cols);
}

std::vector<double> Copy(const Tensor &t) {
  return std::vector<double>(t.values().begin(), t.values().end());
}

Shape BroadcastShape(const char *op, const Shape &a, const Shape &b) {
  size_t r = std::max(a.size(), b.size());
  Shape out(r);
  for (size_t i = 0; i < r; ++i) {
    int da = i < r - a.size() ? 1 : a[i - (r - a.size())];
    int db = i < r - b.size() ? 1 : b[i - (r - b.size())];
    if (da != db && da != 1 && db != 1)
      Fail(ErrorKind::kShape, std::string(op) + ": cannot broadcast " +
                                  ShapeToString(a) + " with " + ShapeToString(b));
    out[i] = da == 1 ? db : da;
  }
  return out;
}

// For every element of `out`, the linear offset of the element of `in` that
// broadcasts onto it.
std::vector<int64_t> BroadcastOffsets(const Shape &in, const Shape &out) {
  size_t r = out.size();
  std::vector<int64_t> stride(r, 0);
  int64_t s = 1;
  for (size_t i = 0; i < in.size(); ++i) {
    size_t k = in.size() - 1 - i;
    size_t o = r - 1 - i;
    stride[o] = in[k] == 1 ? 0 : s;
    s *= in[k];
  }
  int64_t n = NumElements(out);
  std::vector<int64_t> offsets(n);
  std::vector<int> idx(r, 0);
  int64_t off = 0;
  for (int64_t e = 0; e < n; ++e) {
    offsets[e] = off;
    for (size_t d = r; d-- > 0;) {
      if (++idx[d] < out[d]) {
        off += stride[d];
        break;
      }
      off -= stride[d] * (out[d] - 1);
      idx[d] = 0;
    }
  }
  return offsets;
}

// dfa(x, y) and dfb(x, y) are the partial derivatives of f at (x, y).
template <class F, class DA, class DB>
Tensor Binary(const char *op, const Tensor &a, const Tensor &b, F f, DA dfa, DB dfb) {
  Shape out_shape = BroadcastShape(op, a.shape(), b.shape());
  int64_t n = NumElements(out_shape);
  std::vector<double> out(n);
  auto av = a.values();
  auto bv = b.values();
  bool direct = a.shape() == out_shape && b.shape() == out_shape;
  std::vector<int64_t> ao, bo;
  if (!direct) {
    ao = BroadcastOffsets(a.shape(), out_shape);
    bo = BroadcastOffsets(b.shape(), out_shape);
  }
  for (int64_t i = 0; i < n; ++i)
    out[i] = direct ? f(av[i], bv[i]) : f(av[ao[i]], bv[bo[i]]);
  return Tensor::MakeOp(
      op, out_shape, std::move(out), {a, b},
      [a, b, direct, ao = std::move(ao), bo = std::move(bo), dfa, dfb](
          const std::vector<double> &g, std::span<std::vector<double> *const> gi) {
        auto av = a.values();
        auto bv = b.values();
        for (size_t i = 0; i < g.size(); ++i) {
          int64_t ia = direct ? i : ao[i];
          int64_t ib = direct ? i : bo[i];
          if (gi[0]) (*gi[0])[ia] += g[i] * dfa(av[ia], bv[ib]);
          if (gi[1]) (*gi[1])[ib] += g[i] * dfb(av[ia], bv[ib]);
        }
      });
}

template <class F, class D>
Tensor Unary(const char *op, const Tensor &a, F f, D df_from_xy) {
  std::vector<double> out(a.size());
  auto av = a.values();
  for (int64_t i = 0; i < a.size(); ++i) out[i] = f(av[i]);
  auto saved = std::make_shared<std::vector<double>>(out);
  return Tensor::MakeOp(op, a.shape(), std::move(out), {a},
                        [a, saved, df_from_xy](const std::vector<double> &g,
                                               std::span<std::vector<double> *const> gi) {
                          auto av = a.values();
                          auto &y = *saved;
                          for (size_t i = 0; i < g.size(); ++i)
                            (*gi[0])[i] += g[i] * df_from_xy(av[i], y[i]);
                        });
}

int NormalizeAxis(const char *op, const Tensor &a, int axis) {
  int r = a.rank();
  int ax = axis < 0 ? axis + r : axis;
  if (ax < 0 || ax >= r)
    Fail(ErrorKind::kShape, std::string(op) + ": axis " + std::to_string(axis) +
                                " out of range for " + ShapeToString(a.shape()));
  return ax;
}

// outer x n x inner decomposition around `axis`.
struct AxisSplit {
  int64_t outer = 1, n = 1, inner = 1;
};
AxisSplit SplitAround(const Shape &s, int axis) {
  AxisSplit sp;
  for (int i = 0; i < axis; ++i) sp.outer *= s[i];
  sp.n = s[axis];
  for (size_t i = axis + 1; i < s.size(); ++i) sp.inner *= s[i];
  return sp;
}

double SigmoidScalar(double x) {
  return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

}  // namespace

Tensor Add(const Tensor &a, const Tensor &b) {
  return Binary("add", a, b, [](double x, double y) { return x + y; },
                [](double, double) { return 1.0; }, [](double, double) { return 1.0; });
}

Tensor Sub(const Tensor &a, const Tensor &b) {
  return Binary("sub", a, b, [](double x, double y) { return x - y; },
                [](double, double) { return 1.0; }, [](double, double) { return -1.0; });
}

Tensor Mul(const Tensor &a, const Tensor &b) {
  return Binary("mul", a, b, [](double x, double y) { return x * y; },
                [](double, double y) { return y; }, [](double x, double) { return x; });
}

Tensor Div(const Tensor &a, const Tensor &b) {
  return Binary("div", a, b, [](double x, double y) { return x / y; },
                [](double, double y) { return 1.0 / y; },
                [](double x, double y) { return -x / (y * y); });
}

Tensor Scale(const Tensor &a, double factor) {
  return Unary("scale", a, [factor](double x) { return factor * x; },
               [factor](double, double) { return factor; });
}

Tensor AddScalar(const Tensor &a, double offset) {
  return Unary("add_scalar", a, [offset](double x) { return x + offset; },
               [](double, double) { return 1.0; });
}

Tensor MatMul(const Tensor &a, const Tensor &b) {
  CheckRank("matmul", a, 2);
  CheckRank("matmul", b, 2);
  int m = a.dim(0), k = a.dim(1), n = b.dim(1);
  if (b.dim(0) != k)
    Fail(ErrorKind::kShape, "matmul: inner dimensions differ " + ShapeToString(a.shape()) +
                                " x " + ShapeToString(b.shape()));
  std::vector<double> out(static_cast<int64_t>(m) * n);
  View(out, m, n).noalias() = View(a.values(), m, k) * View(b.values(), k, n);
  return Tensor::MakeOp("matmul", {m, n}, std::move(out), {a, b},
                        [a, b, m, k, n](const std::vector<double> &g,
                                        std::span<std::vector<double> *const> gi) {
                          auto G = View(g, m, n);
                          if (gi[0]) View(*gi[0], m, k).noalias() += G * View(b.values(), k, n).transpose();
                          if (gi[1]) View(*gi[1], k, n).noalias() += View(a.values(), m, k).transpose() * G;
                        });
}

Tensor Linear(const Tensor &x, const Tensor &w, const Tensor &b) {
  CheckRank("linear", w, 2);
  int in = w.dim(0), out_dim = w.dim(1);
  if (x.rank() < 1 || x.dim(-1) != in)
    Fail(ErrorKind::kShape, "linear: input " + ShapeToString(x.shape()) +
                                " incompatible with weight " + ShapeToString(w.shape()));
  if (b.defined() && (b.rank() != 1 || b.dim(0) != out_dim))
    Fail(ErrorKind::kShape, "linear: bias " + ShapeToString(b.shape()) +
                                " incompatible with weight " + ShapeToString(w.shape()));
  int64_t rows = x.size() / in;
  Shape out_shape = x.shape();
  out_shape.back() = out_dim;
  std::vector<double> out(rows * out_dim);
  auto O = View(out, rows, out_dim);
  O.noalias() = View(x.values(), rows, in) * View(w.values(), in, out_dim);
  if (b.defined()) O.rowwise() += View(b.values(), 1, out_dim).row(0);
  std::vector<Tensor> inputs = {x, w};
  if (b.defined()) inputs.push_back(b);
  return Tensor::MakeOp(
      "linear", out_shape, std::move(out), inputs,
      [x, w, rows, in, out_dim](const std::vector<double> &g,
                                std::span<std::vector<double> *const> gi) {
        auto G = View(g, rows, out_dim);
        if (gi[0]) View(*gi[0], rows, in).noalias() += G * View(w.values(), in, out_dim).transpose();
        if (gi[1]) View(*gi[1], in, out_dim).noalias() += View(x.values(), rows, in).transpose() * G;
        if (gi.size() > 2 && gi[2]) View(*gi[2], 1, out_dim) += G.colwise().sum();
      });
}

Tensor Transpose(const Tensor &a) {
  CheckRank("transpose", a, 2);
  int m = a.dim(0), n = a.dim(1);
  std::vector<double> out(a.size());
  View(out, n, m) = View(a.values(), m, n).transpose();
  return Tensor::MakeOp("transpose", {n, m}, std::move(out), {a},
                        [m, n](const std::vector<double> &g,
                               std::span<std::vector<double> *const> gi) {
                          View(*gi[0], m, n) += View(g, n, m).transpose();
                        });
}

Tensor Reshape(const Tensor &a, const Shape &shape) {
  if (NumElements(shape) != a.size())
    Fail(ErrorKind::kShape, "reshape: cannot view " + ShapeToString(a.shape()) + " as " +
                                ShapeToString(shape));
  return Tensor::MakeOp("reshape", shape, Copy(a), {a},
                        [](const std::vector<double> &g,
                           std::span<std::vector<double> *const> gi) {
                          for (size_t i = 0; i < g.size(); ++i) (*gi[0])[i] += g[i];
                        });
}

Tensor Concat(const std::vector<Tensor> &parts, int axis) {
  if (parts.empty()) Fail(ErrorKind::kShape, "concat: no inputs");
  int ax = NormalizeAxis("concat", parts[0], axis);
  Shape out_shape = parts[0].shape();
  out_shape[ax] = 0;
  for (const auto &p : parts) {
    Shape s = p.shape();
    if (s.size() != out_shape.size())
      Fail(ErrorKind::kShape, "concat: rank mismatch " + ShapeToString(parts[0].shape()) +
                                  " vs " + ShapeToString(s));
    for (size_t d = 0; d < s.size(); ++d)
      if (static_cast<int>(d) != ax && s[d] != parts[0].shape()[d])
        Fail(ErrorKind::kShape, "concat: shape mismatch " + ShapeToString(parts[0].shape()) +
                                    " vs " + ShapeToString(s));
    out_shape[ax] += s[ax];
  }
  AxisSplit sp = SplitAround(out_shape, ax);
  std::vector<double> out(NumElements(out_shape));
  std::vector<int64_t> widths;
  int64_t col = 0;
  for (const auto &p : parts) {
    int64_t w = static_cast<int64_t>(p.dim(ax)) * sp.inner;
    auto pv = p.values();
    for (int64_t o = 0; o < sp.outer; ++o)
      std::copy(pv.begin() + o * w, pv.begin() + (o + 1) * w,
                out.begin() + o * sp.n * sp.inner + col);
    widths.push_back(w);
    col += w;
  }
  return Tensor::MakeOp("concat", out_shape, std::move(out), parts,
                        [sp, widths](const std::vector<double> &g,
                                     std::span<std::vector<double> *const> gi) {
                          int64_t col = 0;
                          for (size_t k = 0; k < widths.size(); ++k) {
                            int64_t w = widths[k];
                            if (gi[k])
                              for (int64_t o = 0; o < sp.outer; ++o)
                                for (int64_t j = 0; j < w; ++j)
                                  (*gi[k])[o * w + j] += g[o * sp.n * sp.inner + col + j];
                            col += w;
                          }
                        });
}

Tensor Slice(const Tensor &a, int axis, int begin, int end) {
  int ax = NormalizeAxis("slice", a, axis);
  if (begin < 0 || end > a.dim(ax) || begin > end)
    Fail(ErrorKind::kShape, "slice: range [" + std::to_string(begin) + "," +
                                std::to_string(end) + ") invalid for axis " +
                                std::to_string(ax) + " of " + ShapeToString(a.shape()));
  AxisSplit sp = SplitAround(a.shape(), ax);
  Shape out_shape = a.shape();
  out_shape[ax] = end - begin;
  int64_t w = static_cast<int64_t>(end - begin) * sp.inner;
  int64_t off = static_cast<int64_t>(begin) * sp.inner;
  std::vector<double> out(sp.outer * w);
  auto av = a.values();
  for (int64_t o = 0; o < sp.outer; ++o)
    std::copy(av.begin() + o * sp.n * sp.inner + off,
              av.begin() + o * sp.n * sp.inner + off + w, out.begin() + o * w);
  return Tensor::MakeOp("slice", out_shape, std::move(out), {a},
                        [sp, w, off](const std::vector<double> &g,
                                     std::span<std::vector<double> *const> gi) {
                          for (int64_t o = 0; o < sp.outer; ++o)
                            for (int64_t j = 0; j < w; ++j)
                              (*gi[0])[o * sp.n * sp.inner + off + j] += g[o * w + j];
                        });
}

Tensor Sum(const Tensor &a) {
  double s = 0.0;
  for (double v : a.values()) s += v;
  return Tensor::MakeOp("sum", {}, {s}, {a},
                        [](const std::vector<double> &g,
                           std::span<std::vector<double> *const> gi) {
                          for (double &v : *gi[0]) v += g[0];
                        });
}

Tensor Mean(const Tensor &a) {
  if (a.size() == 0) Fail(ErrorKind::kShape, "mean of an empty tensor");
  return Scale(Sum(a), 1.0 / static_cast<double>(a.size()));
}

Tensor SumAxis(const Tensor &a, int axis) {
  int ax = NormalizeAxis("sum_axis", a, axis);
  AxisSplit sp = SplitAround(a.shape(), ax);
  Shape out_shape = a.shape();
  out_shape.erase(out_shape.begin() + ax);
  std::vector<double> out(sp.outer * sp.inner, 0.0);
  auto av = a.values();
  for (int64_t o = 0; o < sp.outer; ++o)
    for (int64_t k = 0; k < sp.n; ++k)
      for (int64_t i = 0; i < sp.inner; ++i)
        out[o * sp.inner + i] += av[(o * sp.n + k) * sp.inner + i];
  return Tensor::MakeOp("sum_axis", out_shape, std::move(out), {a},
                        [sp](const std::vector<double> &g,
                             std::span<std::vector<double> *const> gi) {
                          for (int64_t o = 0; o < sp.outer; ++o)
                            for (int64_t k = 0; k < sp.n; ++k)
                              for (int64_t i = 0; i < sp.inner; ++i)
                                (*gi[0])[(o * sp.n + k) * sp.inner + i] += g[o * sp.inner + i];
                        });
}

Tensor MeanAxis(const Tensor &a, int axis) {
  int ax = NormalizeAxis("mean_axis", a, axis);
  return Scale(SumAxis(a, ax), 1.0 / a.dim(ax));
}

Tensor Exp(const Tensor &a) {
  return Unary("exp", a, [](double x) { return std::exp(x); },
               [](double, double y) { return y; });
}

Tensor Log(const Tensor &a) {
  return Unary("log", a, [](double x) { return std::log(x); },
               [](double x, double) { return 1.0 / x; });
}

Tensor Sqrt(const Tensor &a) {
  return Unary("sqrt", a, [](double x) { return std::sqrt(x); },
               [](double, double y) { return 0.5 / y; });
}

Tensor Tanh(const Tensor &a) {
  return Unary("tanh", a, [](double x) { return std::tanh(x); },
               [](double, double y) { return 1.0 - y * y; });
}

Tensor Sigmoid(const Tensor &a) {
  return Unary("sigmoid", a, SigmoidScalar, [](double, double y) { return y * (1.0 - y); });
}

Tensor Swish(const Tensor &a) {
  return Unary("swish", a, [](double x) { return x * SigmoidScalar(x); },
               [](double x, double) {
                 double s = SigmoidScalar(x);
                 return s * (1.0 + x * (1.0 - s));
               });
}

Tensor Glu(const Tensor &a) {
  int c2 = a.dim(-1);
  if (c2 % 2 != 0)
    Fail(ErrorKind::kShape, "glu: last axis must be even, got " + ShapeToString(a.shape()));
  int c = c2 / 2;
  int64_t rows = a.size() / c2;
  Shape out_shape = a.shape();
  out_shape.back() = c;
  std::vector<double> out(rows * c);
  auto av = a.values();
  for (int64_t r = 0; r < rows; ++r)
    for (int j = 0; j < c; ++j)
      out[r * c + j] = av[r * c2 + j] * SigmoidScalar(av[r * c2 + c + j]);
  return Tensor::MakeOp("glu", out_shape, std::move(out), {a},
                        [a, rows, c](const std::vector<double> &g,
                                     std::span<std::vector<double> *const> gi) {
                          auto av = a.values();
                          int c2 = 2 * c;
                          for (int64_t r = 0; r < rows; ++r)
                            for (int j = 0; j < c; ++j) {
                              double x = av[r * c2 + j];
                              double s = SigmoidScalar(av[r * c2 + c + j]);
                              double gr = g[r * c + j];
                              (*gi[0])[r * c2 + j] += gr * s;
                              (*gi[0])[r * c2 + c + j] += gr * x * s * (1.0 - s);
                            }
                        });
}

Tensor Softmax(const Tensor &a) {
  int n = a.dim(-1);
  int64_t rows = a.size() / n;
  std::vector<double> out(a.size());
  auto av = a.values();
  for (int64_t r = 0; r < rows; ++r) {
    const double *x = av.data() + r * n;
    double *y = out.data() + r * n;
    double mx = *std::max_element(x, x + n);
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += (y[j] = std::exp(x[j] - mx));
    for (int j = 0; j < n; ++j) y[j] /= s;
  }
  auto saved = std::make_shared<std::vector<double>>(out);
  return Tensor::MakeOp("softmax", a.shape(), std::move(out), {a},
                        [saved, rows, n](const std::vector<double> &g,
                                         std::span<std::vector<double> *const> gi) {
                          const auto &y = *saved;
                          for (int64_t r = 0; r < rows; ++r) {
                            double dot = 0.0;
                            for (int j = 0; j < n; ++j) dot += g[r * n + j] * y[r * n + j];
                            for (int j = 0; j < n; ++j)
                              (*gi[0])[r * n + j] += y[r * n + j] * (g[r * n + j] - dot);
                          }
                        });
}

Tensor LogSoftmax(const Tensor &a) {
  int n = a.dim(-1);
  int64_t rows = a.size() / n;
  std::vector<double> out(a.size());
  auto av = a.values();
  for (int64_t r = 0; r < rows; ++r) {
    const double *x = av.data() + r * n;
    double mx = *std::max_element(x, x + n);
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += std::exp(x[j] - mx);
    double lse = mx + std::log(s);
    for (int j = 0; j < n; ++j) out[r * n + j] = x[j] - lse;
  }
  auto saved = std::make_shared<std::vector<double>>(out);
  return Tensor::MakeOp("log_softmax", a.shape(), std::move(out), {a},
                        [saved, rows, n](const std::vector<double> &g,
                                         std::span<std::vector<double> *const> gi) {
                          const auto &y = *saved;
                          for (int64_t r = 0; r < rows; ++r) {
                            double gs = 0.0;
                            for (int j = 0; j < n; ++j) gs += g[r * n + j];
                            for (int j = 0; j < n; ++j)
                              (*gi[0])[r * n + j] += g[r * n + j] - std::exp(y[r * n + j]) * gs;
                          }
                        });
}

Tensor LayerNorm(const Tensor &x, const Tensor &gamma, const Tensor &beta, double eps) {
  int d = x.dim(-1);
  if (gamma.size() != d || beta.size() != d)
    Fail(ErrorKind::kShape, "layer_norm: input " + ShapeToString(x.shape()) + " vs gamma " +
                                ShapeToString(gamma.shape()) + " / beta " +
                                ShapeToString(beta.shape()));
  int64_t rows = x.size() / d;
  auto xv = x.values();
  auto gv = gamma.values();
  auto bv = beta.values();
  auto xhat = std::make_shared<std::vector<double>>(x.size());
  auto inv_std = std::make_shared<std::vector<double>>(rows);
  std::vector<double> out(x.size());
  for (int64_t r = 0; r < rows; ++r) {
    const double *xr = xv.data() + r * d;
    double mean = 0.0;
    for (int j = 0; j < d; ++j) mean += xr[j];
    mean /= d;
    double var = 0.0;
    for (int j = 0; j < d; ++j) var += (xr[j] - mean) * (xr[j] - mean);
    var /= d;
    double is = 1.0 / std::sqrt(var + eps);
    (*inv_std)[r] = is;
    for (int j = 0; j < d; ++j) {
      double h = (xr[j] - mean) * is;
      (*xhat)[r * d + j] = h;
      out[r * d + j] = h * gv[j] + bv[j];
    }
  }
  return Tensor::MakeOp(
      "layer_norm", x.shape(), std::move(out), {x, gamma, beta},
      [gamma, xhat, inv_std, rows, d](const std::vector<double> &g,
                                      std::span<std::vector<double> *const> gi) {
        auto gv = gamma.values();
        const auto &h = *xhat;
        std::vector<double> dh(d);
        for (int64_t r = 0; r < rows; ++r) {
          double m1 = 0.0, m2 = 0.0;
          for (int j = 0; j < d; ++j) {
            double gr = g[r * d + j];
            if (gi[1]) (*gi[1])[j] += gr * h[r * d + j];
            if (gi[2]) (*gi[2])[j] += gr;
            dh[j] = gr * gv[j];
            m1 += dh[j];
            m2 += dh[j] * h[r * d + j];
          }
          if (!gi[0]) continue;
          m1 /= d;
          m2 /= d;
          for (int j = 0; j < d; ++j)
            (*gi[0])[r * d + j] += (*inv_std)[r] * (dh[j] - m1 - h[r * d + j] * m2);
        }
      });
}

Tensor BatchNormFolded(const Tensor &x, const Tensor &gamma, const Tensor &beta,
                       const std::vector<double> &running_mean,
                       const std::vector<double> &running_var, double eps) {
  int c = x.dim(-1);
  if (gamma.size() != c || beta.size() != c || static_cast<int>(running_mean.size()) != c ||
      static_cast<int>(running_var.size()) != c)
    Fail(ErrorKind::kShape, "batch_norm: input " + ShapeToString(x.shape()) +
                                " vs gamma " + ShapeToString(gamma.shape()));
  // Fold the frozen statistics into a per-channel affine map.
  std::vector<double> scale(c), shift(c);
  auto gv = gamma.values();
  auto bv = beta.values();
  for (int j = 0; j < c; ++j) {
    double is = 1.0 / std::sqrt(running_var[j] + eps);
    scale[j] = gv[j] * is;
    shift[j] = bv[j] - running_mean[j] * gv[j] * is;
  }
  int64_t rows = x.size() / c;
  auto xv = x.values();
  std::vector<double> out(x.size());
  for (int64_t r = 0; r < rows; ++r)
    for (int j = 0; j < c; ++j) out[r * c + j] = xv[r * c + j] * scale[j] + shift[j];
  std::vector<double> istd(c);
  for (int j = 0; j < c; ++j) istd[j] = 1.0 / std::sqrt(running_var[j] + eps);
  return Tensor::MakeOp(
      "batch_norm", x.shape(), std::move(out), {x, gamma, beta},
      [x, scale, istd, running_mean, rows, c](const std::vector<double> &g,
                                              std::span<std::vector<double> *const> gi) {
        auto xv = x.values();
        for (int64_t r = 0; r < rows; ++r)
          for (int j = 0; j < c; ++j) {
            double gr = g[r * c + j];
            if (gi[0]) (*gi[0])[r * c + j] += gr * scale[j];
            if (gi[1]) (*gi[1])[j] += gr * (xv[r * c + j] - running_mean[j]) * istd[j];
            if (gi[2]) (*gi[2])[j] += gr;
          }
      });
}

Tensor Dropout(const Tensor &x, double p, bool training, Rng *rng) {
  if (!training || p <= 0.0) return x;
  if (p >= 1.0) Fail(ErrorKind::kConfig, "dropout probability must be < 1");
  auto mask = std::make_shared<std::vector<double>>(x.size());
  double keep_scale = 1.0 / (1.0 - p);
  for (auto &m : *mask) m = rng->Uniform() < p ? 0.0 : keep_scale;
  std::vector<double> out(x.size());
  auto xv = x.values();
  for (int64_t i = 0; i < x.size(); ++i) out[i] = xv[i] * (*mask)[i];
  return Tensor::MakeOp("dropout", x.shape(), std::move(out), {x},
                        [mask](const std::vector<double> &g,
                               std::span<std::vector<double> *const> gi) {
                          for (size_t i = 0; i < g.size(); ++i)
                            (*gi[0])[i] += g[i] * (*mask)[i];
                        });
}

Tensor Conv1d(const Tensor &x, const Tensor &w, const Tensor &b, int stride, int pad) {
  CheckRank("conv1d", x, 2);
  CheckRank("conv1d", w, 3);
  int t_in = x.dim(0), cin = x.dim(1), cout = w.dim(0), k = w.dim(2);
  if (w.dim(1) != cin)
    Fail(ErrorKind::kShape, "conv1d: input " + ShapeToString(x.shape()) + " vs weight " +
                                ShapeToString(w.shape()));
  if (b.defined() && b.size() != cout)
    Fail(ErrorKind::kShape, "conv1d: bias " + ShapeToString(b.shape()) + " vs weight " +
                                ShapeToString(w.shape()));
  if (stride < 1) Fail(ErrorKind::kShape, "conv1d: stride must be positive");
  int t_out = (t_in + 2 * pad - k) / stride + 1;
  if (t_in + 2 * pad < k)
    Fail(ErrorKind::kShape, "conv1d: input " + ShapeToString(x.shape()) +
                                " shorter than kernel " + ShapeToString(w.shape()));
  int64_t width = static_cast<int64_t>(cin) * k;
  // cols[t, c*K + j] = x[t*stride + j - pad, c]
  auto cols = std::make_shared<std::vector<double>>(t_out * width, 0.0);
  auto xv = x.values();
  for (int t = 0; t < t_out; ++t)
    for (int j = 0; j < k; ++j) {
      int src = t * stride + j - pad;
      if (src < 0 || src >= t_in) continue;
      for (int c = 0; c < cin; ++c) (*cols)[t * width + c * k + j] = xv[src * cin + c];
    }
  std::vector<double> out(static_cast<int64_t>(t_out) * cout);
  auto O = View(out, t_out, cout);
  O.noalias() = View(*cols, t_out, width) * View(w.values(), cout, width).transpose();
  if (b.defined()) O.rowwise() += View(b.values(), 1, cout).row(0);
  std::vector<Tensor> inputs = {x, w};
  if (b.defined()) inputs.push_back(b);
  return Tensor::MakeOp(
      "conv1d", {t_out, cout}, std::move(out), inputs,
      [w, cols, t_in, t_out, cin, cout, k, stride, pad, width](
          const std::vector<double> &g, std::span<std::vector<double> *const> gi) {
        auto G = View(g, t_out, cout);
        if (gi[1]) View(*gi[1], cout, width).noalias() += G.transpose() * View(*cols, t_out, width);
        if (gi.size() > 2 && gi[2]) View(*gi[2], 1, cout) += G.colwise().sum();
        if (gi[0]) {
          RowMatrix dcols = G * View(w.values(), cout, width);
          auto &dx = *gi[0];
          for (int t = 0; t < t_out; ++t)
            for (int j = 0; j < k; ++j) {
              int src = t * stride + j - pad;
              if (src < 0 || src >= t_in) continue;
              for (int c = 0; c < cin; ++c) dx[src * cin + c] += dcols(t, c * k + j);
            }
        }
      });
}

Tensor DepthwiseConv1d(const Tensor &x, const Tensor &w, const Tensor &b, int pad) {
  CheckRank("depthwise_conv1d", x, 2);
  CheckRank("depthwise_conv1d", w, 2);
  int t_in = x.dim(0), c = x.dim(1), k = w.dim(1);
  if (w.dim(0) != c || (b.defined() && b.size() != c))
    Fail(ErrorKind::kShape, "depthwise_conv1d: input " + ShapeToString(x.shape()) +
                                " vs weight " + ShapeToString(w.shape()));
  int t_out = t_in + 2 * pad - k + 1;
  if (t_out < 1)
    Fail(ErrorKind::kShape, "depthwise_conv1d: input " + ShapeToString(x.shape()) +
                                " shorter than kernel " + ShapeToString(w.shape()));
  std::vector<double> out(static_cast<int64_t>(t_out) * c, 0.0);
  auto xv = x.values();
  auto wv = w.values();
  for (int t = 0; t < t_out; ++t) {
    double *o = out.data() + static_cast<int64_t>(t) * c;
    if (b.defined())
      for (int ch = 0; ch < c; ++ch) o[ch] = b[ch];
    for (int j = 0; j < k; ++j) {
      int src = t + j - pad;
      if (src < 0 || src >= t_in) continue;
      const double *xr = xv.data() + static_cast<int64_t>(src) * c;
      for (int ch = 0; ch < c; ++ch) o[ch] += wv[ch * k + j] * xr[ch];
    }
  }
  std::vector<Tensor> inputs = {x, w};
  if (b.defined()) inputs.push_back(b);
  return Tensor::MakeOp(
      "depthwise_conv1d", {t_out, c}, std::move(out), inputs,
      [x, w, t_in, t_out, c, k, pad](const std::vector<double> &g,
                                     std::span<std::vector<double> *const> gi) {
        auto xv = x.values();
        auto wv = w.values();
        for (int t = 0; t < t_out; ++t) {
          const double *gr = g.data() + static_cast<int64_t>(t) * c;
          if (gi.size() > 2 && gi[2])
            for (int ch = 0; ch < c; ++ch) (*gi[2])[ch] += gr[ch];
          for (int j = 0; j < k; ++j) {
            int src = t + j - pad;
            if (src < 0 || src >= t_in) continue;
            for (int ch = 0; ch < c; ++ch) {
              if (gi[0]) (*gi[0])[src * c + ch] += wv[ch * k + j] * gr[ch];
              if (gi[1]) (*gi[1])[ch * k + j] += xv[src * c + ch] * gr[ch];
            }
          }
        }
      });
}

Tensor Conv2d(const Tensor &x, const Tensor &w, const Tensor &b, int stride, int pad) {
  CheckRank("conv2d", x, 3);
  CheckRank("conv2d", w, 4);
  int cin = x.dim(0), h = x.dim(1), wd = x.dim(2);
  int cout = w.dim(0), kh = w.dim(2), kw = w.dim(3);
  if (w.dim(1) != cin || (b.defined() && b.size() != cout))
    Fail(ErrorKind::kShape, "conv2d: input " + ShapeToString(x.shape()) + " vs weight " +
                                ShapeToString(w.shape()));
  if (stride < 1) Fail(ErrorKind::kShape, "conv2d: stride must be positive");
  if (h + 2 * pad < kh || wd + 2 * pad < kw)
    Fail(ErrorKind::kShape, "conv2d: input " + ShapeToString(x.shape()) +
                                " smaller than kernel " + ShapeToString(w.shape()));
  int ho = (h + 2 * pad - kh) / stride + 1;
  int wo = (wd + 2 * pad - kw) / stride + 1;
  int64_t patch = static_cast<int64_t>(cin) * kh * kw;
  int64_t npos = static_cast<int64_t>(ho) * wo;
  // cols[(c*KH + i)*KW + j, oy*WO + ox]
  auto cols = std::make_shared<std::vector<double>>(patch * npos, 0.0);
  auto xv = x.values();
  for (int c = 0; c < cin; ++c)
    for (int i = 0; i < kh; ++i)
      for (int j = 0; j < kw; ++j) {
        double *row = cols->data() + ((static_cast<int64_t>(c) * kh + i) * kw + j) * npos;
        for (int oy = 0; oy < ho; ++oy) {
          int sy = oy * stride + i - pad;
          if (sy < 0 || sy >= h) continue;
          for (int ox = 0; ox < wo; ++ox) {
            int sx = ox * stride + j - pad;
            if (sx < 0 || sx >= wd) continue;
            row[oy * wo + ox] = xv[(static_cast<int64_t>(c) * h + sy) * wd + sx];
          }
        }
      }
  std::vector<double> out(cout * npos);
  auto O = View(out, cout, npos);
  O.noalias() = View(w.values(), cout, patch) * View(*cols, patch, npos);
  if (b.defined()) O.colwise() += View(b.values(), cout, 1).col(0);
  std::vector<Tensor> inputs = {x, w};
  if (b.defined()) inputs.push_back(b);
  return Tensor::MakeOp(
      "conv2d", {cout, ho, wo}, std::move(out), inputs,
      [w, cols, cin, h, wd, cout, kh, kw, ho, wo, stride, pad, patch, npos](
          const std::vector<double> &g, std::span<std::vector<double> *const> gi) {
        auto G = View(g, cout, npos);
        if (gi[1]) View(*gi[1], cout, patch).noalias() += G * View(*cols, patch, npos).transpose();
        if (gi.size() > 2 && gi[2]) View(*gi[2], cout, 1) += G.rowwise().sum();
        if (gi[0]) {
          RowMatrix dcols = View(w.values(), cout, patch).transpose() * G;
          auto &dx = *gi[0];
          for (int c = 0; c < cin; ++c)
            for (int i = 0; i < kh; ++i)
              for (int j = 0; j < kw; ++j) {
                const double *row = dcols.data() + ((static_cast<int64_t>(c) * kh + i) * kw + j) * npos;
                for (int oy = 0; oy < ho; ++oy) {
                  int sy = oy * stride + i - pad;
                  if (sy < 0 || sy >= h) continue;
                  for (int ox = 0; ox < wo; ++ox) {
                    int sx = ox * stride + j - pad;
                    if (sx < 0 || sx >= wd) continue;
                    dx[(static_cast<int64_t>(c) * h + sy) * wd + sx] += row[oy * wo + ox];
                  }
                }
              }
        }
      });
}

Tensor EmbeddingLookup(const Tensor &table, const std::vector<int> &indices) {
  CheckRank("embedding", table, 2);
  int n = table.dim(0), d = table.dim(1);
  std::vector<double> out(indices.size() * static_cast<size_t>(d));
  auto tv = table.values();
  for (size_t r = 0; r < indices.size(); ++r) {
    int idx = indices[r];
    if (idx < 0 || idx >= n)
      Fail(ErrorKind::kShape, "embedding: index " + std::to_string(idx) +
                                  " out of range for table " + ShapeToString(table.shape()));
    std::copy(tv.begin() + static_cast<int64_t>(idx) * d,
              tv.begin() + static_cast<int64_t>(idx + 1) * d, out.begin() + r * d);
  }
  return Tensor::MakeOp("embedding", {static_cast<int>(indices.size()), d}, std::move(out),
                        {table},
                        [indices, d](const std::vector<double> &g,
                                     std::span<std::vector<double> *const> gi) {
                          for (size_t r = 0; r < indices.size(); ++r)
                            for (int j = 0; j < d; ++j)
                              (*gi[0])[static_cast<int64_t>(indices[r]) * d + j] += g[r * d + j];
                        });
}

Tensor RepeatRows(const Tensor &a, int factor) {
  CheckRank("repeat_rows", a, 2);
  if (factor < 1) Fail(ErrorKind::kShape, "repeat_rows: factor must be positive");
  int t = a.dim(0), d = a.dim(1);
  std::vector<double> out(static_cast<int64_t>(t) * factor * d);
  auto av = a.values();
  for (int r = 0; r < t * factor; ++r)
    std::copy(av.begin() + static_cast<int64_t>(r / factor) * d,
              av.begin() + static_cast<int64_t>(r / factor + 1) * d,
              out.begin() + static_cast<int64_t>(r) * d);
  return Tensor::MakeOp("repeat_rows", {t * factor, d}, std::move(out), {a},
                        [t, d, factor](const std::vector<double> &g,
                                       std::span<std::vector<double> *const> gi) {
                          for (int r = 0; r < t * factor; ++r)
                            for (int j = 0; j < d; ++j)
                              (*gi[0])[static_cast<int64_t>(r / factor) * d + j] +=
                                  g[static_cast<int64_t>(r) * d + j];
                        });
}

Tensor FitRows(const Tensor &a, int rows) {
  CheckRank("fit_rows", a, 2);
  int t = a.dim(0), d = a.dim(1);
  if (rows < 0) Fail(ErrorKind::kShape, "fit_rows: negative row count");
  int keep = std::min(t, rows);
  std::vector<double> out(static_cast<int64_t>(rows) * d, 0.0);
  auto av = a.values();
  std::copy(av.begin(), av.begin() + static_cast<int64_t>(keep) * d, out.begin());
  return Tensor::MakeOp("fit_rows", {rows, d}, std::move(out), {a},
                        [keep, d](const std::vector<double> &g,
                                  std::span<std::vector<double> *const> gi) {
                          for (int64_t i = 0; i < static_cast<int64_t>(keep) * d; ++i)
                            (*gi[0])[i] += g[i];
                        });
}

}  // namespace tsasr
