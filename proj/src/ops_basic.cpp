#include <algorithm>
#include <cmath>
#include <cstring>

#include "lemma/ops.hpp"
#include "kernels.hpp"

namespace lemma {

namespace {

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape())
    fail(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
         shape_str(b.shape()));
}

}  // namespace

// ---------------- elementwise ----------------

Tensor add(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "add");
  std::vector<double> v(a.data());
  for (size_t i = 0; i < v.size(); ++i) v[i] += b.data()[i];
  return Tensor::make(
      a.shape(), std::move(v), {a, b},
      [](Node& n) {
        for (int pi = 0; pi < 2; ++pi) {
          Tensor& p = n.parents[static_cast<size_t>(pi)];
          if (!p.requires_grad()) continue;
          auto& g = p.node()->grad;
          for (size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i];
        }
      },
      "add");
}

Tensor sub(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "sub");
  std::vector<double> v(a.data());
  for (size_t i = 0; i < v.size(); ++i) v[i] -= b.data()[i];
  return Tensor::make(
      a.shape(), std::move(v), {a, b},
      [](Node& n) {
        if (n.parents[0].requires_grad()) {
          auto& g = n.parents[0].node()->grad;
          for (size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i];
        }
        if (n.parents[1].requires_grad()) {
          auto& g = n.parents[1].node()->grad;
          for (size_t i = 0; i < g.size(); ++i) g[i] -= n.grad[i];
        }
      },
      "sub");
}

Tensor mul(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "mul");
  std::vector<double> v(a.data());
  for (size_t i = 0; i < v.size(); ++i) v[i] *= b.data()[i];
  return Tensor::make(
      a.shape(), std::move(v), {a, b},
      [](Node& n) {
        const auto& av = n.parents[0].data();
        const auto& bv = n.parents[1].data();
        if (n.parents[0].requires_grad()) {
          auto& g = n.parents[0].node()->grad;
          for (size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i] * bv[i];
        }
        if (n.parents[1].requires_grad()) {
          auto& g = n.parents[1].node()->grad;
          for (size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i] * av[i];
        }
      },
      "mul");
}

Tensor affine(const Tensor& x, double a, double b) {
  std::vector<double> v(x.data());
  for (double& e : v) e = a * e + b;
  return Tensor::make(
      x.shape(), std::move(v), {x},
      [a](Node& n) {
        auto& g = n.parents[0].node()->grad;
        for (size_t i = 0; i < g.size(); ++i) g[i] += a * n.grad[i];
      },
      "affine");
}

Tensor scale(const Tensor& x, double a) { return affine(x, a, 0.0); }

namespace {

template <class Fwd, class Bwd>
Tensor unary_op(const Tensor& x, Fwd fwd, Bwd bwd, const char* name) {
  std::vector<double> v(x.data());
  for (double& e : v) e = fwd(e);
  return Tensor::make(
      x.shape(), std::move(v), {x},
      [bwd](Node& n) {
        const auto& xv = n.parents[0].data();
        auto& g = n.parents[0].node()->grad;
        for (size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i] * bwd(xv[i], n.value[i]);
      },
      name);
}

}  // namespace

Tensor relu(const Tensor& x) {
  return unary_op(
      x, [](double v) { return v > 0.0 ? v : 0.0; },
      [](double xv, double) { return xv > 0.0 ? 1.0 : 0.0; }, "relu");
}

Tensor gelu(const Tensor& x) {
  constexpr double kInvSqrt2 = 0.7071067811865475244;
  constexpr double kInvSqrt2Pi = 0.3989422804014326779;
  return unary_op(
      x, [](double v) { return 0.5 * v * (1.0 + std::erf(v * kInvSqrt2)); },
      [](double xv, double) {
        double cdf = 0.5 * (1.0 + std::erf(xv * kInvSqrt2));
        double pdf = kInvSqrt2Pi * std::exp(-0.5 * xv * xv);
        return cdf + xv * pdf;
      },
      "gelu");
}

Tensor sigmoid(const Tensor& x) {
  return unary_op(
      x,
      [](double v) { return v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v)); },
      [](double, double y) { return y * (1.0 - y); }, "sigmoid");
}

Tensor tanh_op(const Tensor& x) {
  return unary_op(
      x, [](double v) { return std::tanh(v); }, [](double, double y) { return 1.0 - y * y; },
      "tanh");
}

Tensor exp_op(const Tensor& x) {
  return unary_op(
      x, [](double v) { return std::exp(v); }, [](double, double y) { return y; }, "exp");
}

Tensor log_op(const Tensor& x) {
  return unary_op(
      x, [](double v) { return std::log(v); }, [](double xv, double) { return 1.0 / xv; }, "log");
}

Tensor abs_op(const Tensor& x) {
  return unary_op(
      x, [](double v) { return std::fabs(v); },
      [](double xv, double) { return xv >= 0.0 ? 1.0 : -1.0; }, "abs");
}

Tensor square(const Tensor& x) {
  return unary_op(
      x, [](double v) { return v * v; }, [](double xv, double) { return 2.0 * xv; }, "square");
}

Tensor prelu(const Tensor& x, const Tensor& slope) {
  if (slope.size() != 1) fail("prelu: slope must be a scalar parameter");
  const double a = slope.item();
  std::vector<double> v(x.data());
  for (double& e : v) e = e > 0.0 ? e : a * e;
  return Tensor::make(
      x.shape(), std::move(v), {x, slope},
      [a](Node& n) {
        const auto& xv = n.parents[0].data();
        if (n.parents[0].requires_grad()) {
          auto& g = n.parents[0].node()->grad;
          for (size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i] * (xv[i] > 0.0 ? 1.0 : a);
        }
        if (n.parents[1].requires_grad()) {
          double acc = 0.0;
          for (size_t i = 0; i < xv.size(); ++i)
            if (xv[i] <= 0.0) acc += n.grad[i] * xv[i];
          n.parents[1].node()->grad[0] += acc;
        }
      },
      "prelu");
}

// ---------------- broadcast helpers ----------------

Tensor add_bias_nchw(const Tensor& x, const Tensor& b) {
  if (x.ndim() != 4 || b.ndim() != 1 || b.dim(0) != x.dim(1))
    fail("add_bias_nchw: x " + shape_str(x.shape()) + " bias " + shape_str(b.shape()));
  const int B = x.dim(0), C = x.dim(1);
  const int64_t hw = static_cast<int64_t>(x.dim(2)) * x.dim(3);
  std::vector<double> v(x.data());
  for (int n = 0; n < B; ++n)
    for (int c = 0; c < C; ++c) {
      double bv = b.data()[static_cast<size_t>(c)];
      double* p = v.data() + (static_cast<int64_t>(n) * C + c) * hw;
      for (int64_t i = 0; i < hw; ++i) p[i] += bv;
    }
  return Tensor::make(
      x.shape(), std::move(v), {x, b},
      [B, C, hw](Node& n) {
        if (n.parents[0].requires_grad()) {
          auto& g = n.parents[0].node()->grad;
          for (size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i];
        }
        if (n.parents[1].requires_grad()) {
          auto& g = n.parents[1].node()->grad;
          for (int bb = 0; bb < B; ++bb)
            for (int c = 0; c < C; ++c) {
              const double* p = n.grad.data() + (static_cast<int64_t>(bb) * C + c) * hw;
              double acc = 0.0;
              for (int64_t i = 0; i < hw; ++i) acc += p[i];
              g[static_cast<size_t>(c)] += acc;
            }
        }
      },
      "add_bias_nchw");
}

Tensor add_bias_rows(const Tensor& x, const Tensor& b) {
  if (x.ndim() != 2 || b.ndim() != 1 || b.dim(0) != x.dim(1))
    fail("add_bias_rows: x " + shape_str(x.shape()) + " bias " + shape_str(b.shape()));
  const int M = x.dim(0), N = x.dim(1);
  std::vector<double> v(x.data());
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < N; ++j) v[static_cast<size_t>(i) * N + j] += b.data()[static_cast<size_t>(j)];
  return Tensor::make(
      x.shape(), std::move(v), {x, b},
      [M, N](Node& n) {
        if (n.parents[0].requires_grad()) {
          auto& g = n.parents[0].node()->grad;
          for (size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i];
        }
        if (n.parents[1].requires_grad()) {
          auto& g = n.parents[1].node()->grad;
          for (int j = 0; j < N; ++j) {
            double acc = 0.0;
            for (int i = 0; i < M; ++i) acc += n.grad[static_cast<size_t>(i) * N + j];
            g[static_cast<size_t>(j)] += acc;
          }
        }
      },
      "add_bias_rows");
}

Tensor mul_gate_nchw(const Tensor& x, const Tensor& g) {
  if (x.ndim() != 4 || g.ndim() != 2 || g.dim(0) != x.dim(0) || g.dim(1) != x.dim(1))
    fail("mul_gate_nchw: x " + shape_str(x.shape()) + " gate " + shape_str(g.shape()));
  const int B = x.dim(0), C = x.dim(1);
  const int64_t hw = static_cast<int64_t>(x.dim(2)) * x.dim(3);
  std::vector<double> v(x.data());
  for (int n = 0; n < B; ++n)
    for (int c = 0; c < C; ++c) {
      double gv = g.data()[static_cast<size_t>(n) * C + c];
      double* p = v.data() + (static_cast<int64_t>(n) * C + c) * hw;
      for (int64_t i = 0; i < hw; ++i) p[i] *= gv;
    }
  return Tensor::make(
      x.shape(), std::move(v), {x, g},
      [B, C, hw](Node& n) {
        const auto& xv = n.parents[0].data();
        const auto& gv = n.parents[1].data();
        for (int bb = 0; bb < B; ++bb)
          for (int c = 0; c < C; ++c) {
            const int64_t off = (static_cast<int64_t>(bb) * C + c) * hw;
            const double gate = gv[static_cast<size_t>(bb) * C + c];
            if (n.parents[0].requires_grad()) {
              auto& gx = n.parents[0].node()->grad;
              for (int64_t i = 0; i < hw; ++i) gx[static_cast<size_t>(off + i)] += n.grad[static_cast<size_t>(off + i)] * gate;
            }
            if (n.parents[1].requires_grad()) {
              double acc = 0.0;
              for (int64_t i = 0; i < hw; ++i)
                acc += n.grad[static_cast<size_t>(off + i)] * xv[static_cast<size_t>(off + i)];
              n.parents[1].node()->grad[static_cast<size_t>(bb) * C + c] += acc;
            }
          }
      },
      "mul_gate_nchw");
}

// ---------------- matmul ----------------

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.ndim() != 2 || b.ndim() != 2 || a.dim(1) != b.dim(0))
    fail("matmul: incompatible shapes " + shape_str(a.shape()) + " @ " + shape_str(b.shape()));
  const int64_t M = a.dim(0), K = a.dim(1), N = b.dim(1);
  std::vector<double> v(static_cast<size_t>(M * N), 0.0);
  detail::mm_accumulate(a.data().data(), b.data().data(), v.data(), M, K, N);
  return Tensor::make(
      {a.dim(0), b.dim(1)}, std::move(v), {a, b},
      [M, K, N](Node& n) {
        const auto& av = n.parents[0].data();
        const auto& bv = n.parents[1].data();
        if (n.parents[0].requires_grad()) {
          // dA = dC @ B^T ; computed as dA[i,k] += sum_j dC[i,j] * B[k,j]
          auto& g = n.parents[0].node()->grad;
          for (int64_t i = 0; i < M; ++i)
            for (int64_t k = 0; k < K; ++k) {
              const double* dc = n.grad.data() + i * N;
              const double* br = bv.data() + k * N;
              double acc = 0.0;
              for (int64_t j = 0; j < N; ++j) acc += dc[j] * br[j];
              g[static_cast<size_t>(i * K + k)] += acc;
            }
        }
        if (n.parents[1].requires_grad()) {
          // dB = A^T @ dC
          auto& g = n.parents[1].node()->grad;
          for (int64_t i = 0; i < M; ++i) {
            const double* ar = av.data() + i * K;
            const double* dc = n.grad.data() + i * N;
            for (int64_t k = 0; k < K; ++k) {
              const double av_ik = ar[k];
              double* gr = g.data() + k * N;
              for (int64_t j = 0; j < N; ++j) gr[j] += av_ik * dc[j];
            }
          }
        }
      },
      "matmul");
}

// ---------------- shape ----------------

Tensor reshape(const Tensor& x, Shape shape) {
  if (numel(shape) != x.size())
    fail("reshape: cannot view " + shape_str(x.shape()) + " as " + shape_str(shape));
  std::vector<double> v(x.data());
  return Tensor::make(
      std::move(shape), std::move(v), {x},
      [](Node& n) {
        auto& g = n.parents[0].node()->grad;
        for (size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i];
      },
      "reshape");
}

Tensor transpose2d(const Tensor& x) {
  if (x.ndim() != 2) fail("transpose2d: need rank 2, got " + shape_str(x.shape()));
  const int M = x.dim(0), N = x.dim(1);
  std::vector<double> v(static_cast<size_t>(x.size()));
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < N; ++j)
      v[static_cast<size_t>(j) * M + i] = x.data()[static_cast<size_t>(i) * N + j];
  return Tensor::make(
      {N, M}, std::move(v), {x},
      [M, N](Node& n) {
        auto& g = n.parents[0].node()->grad;
        for (int i = 0; i < M; ++i)
          for (int j = 0; j < N; ++j)
            g[static_cast<size_t>(i) * N + j] += n.grad[static_cast<size_t>(j) * M + i];
      },
      "transpose2d");
}

Tensor permute(const Tensor& x, const std::vector<int>& dims) {
  const int r = x.ndim();
  if (static_cast<int>(dims.size()) != r) fail("permute: rank mismatch");
  Shape out_shape(static_cast<size_t>(r));
  for (int i = 0; i < r; ++i) out_shape[static_cast<size_t>(i)] = x.dim(dims[static_cast<size_t>(i)]);
  auto in_strides = row_major_strides(x.shape());
  auto out_strides = row_major_strides(out_shape);
  const int64_t total = x.size();
  std::vector<double> v(static_cast<size_t>(total));
  // flat index map out -> in, reused by backward
  auto map_index = [r, dims, in_strides, out_strides, out_shape](int64_t oi) {
    int64_t rem = oi, ii = 0;
    for (int d = 0; d < r; ++d) {
      int64_t idx = rem / out_strides[static_cast<size_t>(d)];
      rem %= out_strides[static_cast<size_t>(d)];
      ii += idx * in_strides[static_cast<size_t>(dims[static_cast<size_t>(d)])];
    }
    return ii;
  };
  for (int64_t oi = 0; oi < total; ++oi) v[static_cast<size_t>(oi)] = x.data()[static_cast<size_t>(map_index(oi))];
  return Tensor::make(
      std::move(out_shape), std::move(v), {x},
      [map_index, total](Node& n) {
        auto& g = n.parents[0].node()->grad;
        for (int64_t oi = 0; oi < total; ++oi)
          g[static_cast<size_t>(map_index(oi))] += n.grad[static_cast<size_t>(oi)];
      },
      "permute");
}

Tensor concat(const std::vector<Tensor>& xs, int axis) {
  if (xs.empty()) fail("concat: empty input list");
  const int r = xs[0].ndim();
  if (axis < 0 || axis >= r) fail("concat: bad axis");
  Shape out_shape = xs[0].shape();
  int64_t axis_total = 0;
  for (const Tensor& t : xs) {
    if (t.ndim() != r) fail("concat: rank mismatch");
    for (int d = 0; d < r; ++d)
      if (d != axis && t.dim(d) != out_shape[static_cast<size_t>(d)])
        fail("concat: shape mismatch " + shape_str(t.shape()) + " vs " + shape_str(xs[0].shape()));
    axis_total += t.dim(axis);
  }
  out_shape[static_cast<size_t>(axis)] = static_cast<int>(axis_total);

  // outer = product of dims before axis, inner = product after
  int64_t outer = 1, inner = 1;
  for (int d = 0; d < axis; ++d) outer *= out_shape[static_cast<size_t>(d)];
  for (int d = axis + 1; d < r; ++d) inner *= out_shape[static_cast<size_t>(d)];

  std::vector<double> v(static_cast<size_t>(numel(out_shape)));
  int64_t offset = 0;
  for (const Tensor& t : xs) {
    const int64_t ax = t.dim(axis);
    for (int64_t o = 0; o < outer; ++o)
      std::memcpy(v.data() + (o * axis_total + offset) * inner,
                  t.data().data() + o * ax * inner, static_cast<size_t>(ax * inner) * sizeof(double));
    offset += ax;
  }
  std::vector<Tensor> parents(xs.begin(), xs.end());
  return Tensor::make(
      std::move(out_shape), std::move(v), std::move(parents),
      [axis, outer, inner, axis_total](Node& n) {
        int64_t offset = 0;
        for (Tensor& p : n.parents) {
          const int64_t ax = p.dim(axis);
          if (p.requires_grad()) {
            auto& g = p.node()->grad;
            for (int64_t o = 0; o < outer; ++o) {
              const double* src = n.grad.data() + (o * axis_total + offset) * inner;
              double* dst = g.data() + o * ax * inner;
              for (int64_t i = 0; i < ax * inner; ++i) dst[i] += src[i];
            }
          }
          offset += ax;
        }
      },
      "concat");
}

Tensor slice(const Tensor& x, int axis, int start, int len) {
  const int r = x.ndim();
  if (axis < 0 || axis >= r) fail("slice: bad axis");
  if (start < 0 || len <= 0 || start + len > x.dim(axis))
    fail("slice: range [" + std::to_string(start) + "," + std::to_string(start + len) +
         ") out of bounds for " + shape_str(x.shape()));
  Shape out_shape = x.shape();
  out_shape[static_cast<size_t>(axis)] = len;
  int64_t outer = 1, inner = 1;
  for (int d = 0; d < axis; ++d) outer *= x.dim(d);
  for (int d = axis + 1; d < r; ++d) inner *= x.dim(d);
  const int64_t ax_in = x.dim(axis);
  std::vector<double> v(static_cast<size_t>(numel(out_shape)));
  for (int64_t o = 0; o < outer; ++o)
    std::memcpy(v.data() + o * len * inner, x.data().data() + (o * ax_in + start) * inner,
                static_cast<size_t>(len * inner) * sizeof(double));
  return Tensor::make(
      std::move(out_shape), std::move(v), {x},
      [axis, start, len, outer, inner, ax_in](Node& n) {
        auto& g = n.parents[0].node()->grad;
        for (int64_t o = 0; o < outer; ++o) {
          const double* src = n.grad.data() + o * len * inner;
          double* dst = g.data() + (o * ax_in + start) * inner;
          for (int64_t i = 0; i < static_cast<int64_t>(len) * inner; ++i) dst[i] += src[i];
        }
      },
      "slice");
}

// ---------------- normalization / probability ----------------

Tensor softmax(const Tensor& x, int axis) {
  const int r = x.ndim();
  if (axis < 0 || axis >= r) fail("softmax: bad axis for " + shape_str(x.shape()));
  int64_t outer = 1, inner = 1;
  for (int d = 0; d < axis; ++d) outer *= x.dim(d);
  for (int d = axis + 1; d < r; ++d) inner *= x.dim(d);
  const int64_t ax = x.dim(axis);
  std::vector<double> v(x.data());
  for (int64_t o = 0; o < outer; ++o)
    for (int64_t in = 0; in < inner; ++in) {
      double* base = v.data() + o * ax * inner + in;
      double mx = base[0];
      for (int64_t a = 1; a < ax; ++a) mx = std::max(mx, base[a * inner]);
      double sum = 0.0;
      for (int64_t a = 0; a < ax; ++a) {
        double e = std::exp(base[a * inner] - mx);
        base[a * inner] = e;
        sum += e;
      }
      for (int64_t a = 0; a < ax; ++a) base[a * inner] /= sum;
    }
  return Tensor::make(
      x.shape(), std::move(v), {x},
      [outer, inner, ax](Node& n) {
        auto& g = n.parents[0].node()->grad;
        for (int64_t o = 0; o < outer; ++o)
          for (int64_t in = 0; in < inner; ++in) {
            const int64_t off = o * ax * inner + in;
            double dot = 0.0;
            for (int64_t a = 0; a < ax; ++a)
              dot += n.grad[static_cast<size_t>(off + a * inner)] * n.value[static_cast<size_t>(off + a * inner)];
            for (int64_t a = 0; a < ax; ++a) {
              const size_t i = static_cast<size_t>(off + a * inner);
              g[i] += n.value[i] * (n.grad[i] - dot);
            }
          }
      },
      "softmax");
}

Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps) {
  const int r = x.ndim();
  const int d = x.dim(r - 1);
  if (gamma.size() != d || beta.size() != d)
    fail("layer_norm: affine params must match last axis of " + shape_str(x.shape()));
  const int64_t rows = x.size() / d;
  std::vector<double> v(static_cast<size_t>(x.size()));
  std::vector<double> inv_std(static_cast<size_t>(rows));
  std::vector<double> xhat(static_cast<size_t>(x.size()));
  for (int64_t rI = 0; rI < rows; ++rI) {
    const double* xr = x.data().data() + rI * d;
    double mean = 0.0;
    for (int j = 0; j < d; ++j) mean += xr[j];
    mean /= d;
    double var = 0.0;
    for (int j = 0; j < d; ++j) var += (xr[j] - mean) * (xr[j] - mean);
    var /= d;
    const double is = 1.0 / std::sqrt(var + eps);
    inv_std[static_cast<size_t>(rI)] = is;
    for (int j = 0; j < d; ++j) {
      const double h = (xr[j] - mean) * is;
      xhat[static_cast<size_t>(rI * d + j)] = h;
      v[static_cast<size_t>(rI * d + j)] = h * gamma.data()[static_cast<size_t>(j)] + beta.data()[static_cast<size_t>(j)];
    }
  }
  return Tensor::make(
      x.shape(), std::move(v), {x, gamma, beta},
      [rows, d, inv_std = std::move(inv_std), xhat = std::move(xhat)](Node& n) {
        const auto& gm = n.parents[1].data();
        for (int64_t rI = 0; rI < rows; ++rI) {
          const double* dy = n.grad.data() + rI * d;
          const double* xh = xhat.data() + rI * d;
          if (n.parents[0].requires_grad()) {
            double m1 = 0.0, m2 = 0.0;
            for (int j = 0; j < d; ++j) {
              const double dh = dy[j] * gm[static_cast<size_t>(j)];
              m1 += dh;
              m2 += dh * xh[j];
            }
            m1 /= d;
            m2 /= d;
            auto& gx = n.parents[0].node()->grad;
            const double is = inv_std[static_cast<size_t>(rI)];
            for (int j = 0; j < d; ++j) {
              const double dh = dy[j] * gm[static_cast<size_t>(j)];
              gx[static_cast<size_t>(rI * d + j)] += is * (dh - m1 - xh[j] * m2);
            }
          }
          if (n.parents[1].requires_grad()) {
            auto& gg = n.parents[1].node()->grad;
            for (int j = 0; j < d; ++j) gg[static_cast<size_t>(j)] += dy[j] * xh[j];
          }
          if (n.parents[2].requires_grad()) {
            auto& gb = n.parents[2].node()->grad;
            for (int j = 0; j < d; ++j) gb[static_cast<size_t>(j)] += dy[j];
          }
        }
      },
      "layer_norm");
}

Tensor instance_norm(const Tensor& x, double eps) {
  if (x.ndim() != 4) fail("instance_norm: need [B,C,H,W], got " + shape_str(x.shape()));
  const int B = x.dim(0), C = x.dim(1);
  const int64_t hw = static_cast<int64_t>(x.dim(2)) * x.dim(3);
  std::vector<double> v(static_cast<size_t>(x.size()));
  std::vector<double> inv_std(static_cast<size_t>(B) * C);
  for (int64_t p = 0; p < static_cast<int64_t>(B) * C; ++p) {
    const double* xr = x.data().data() + p * hw;
    double mean = 0.0;
    for (int64_t i = 0; i < hw; ++i) mean += xr[i];
    mean /= static_cast<double>(hw);
    double var = 0.0;
    for (int64_t i = 0; i < hw; ++i) var += (xr[i] - mean) * (xr[i] - mean);
    var /= static_cast<double>(hw);
    const double is = 1.0 / std::sqrt(var + eps);
    inv_std[static_cast<size_t>(p)] = is;
    for (int64_t i = 0; i < hw; ++i) v[static_cast<size_t>(p * hw + i)] = (xr[i] - mean) * is;
  }
  return Tensor::make(
      x.shape(), std::move(v), {x},
      [B, C, hw, inv_std = std::move(inv_std)](Node& n) {
        auto& g = n.parents[0].node()->grad;
        for (int64_t p = 0; p < static_cast<int64_t>(B) * C; ++p) {
          const double* dy = n.grad.data() + p * hw;
          const double* y = n.value.data() + p * hw;
          double m1 = 0.0, m2 = 0.0;
          for (int64_t i = 0; i < hw; ++i) {
            m1 += dy[i];
            m2 += dy[i] * y[i];
          }
          m1 /= static_cast<double>(hw);
          m2 /= static_cast<double>(hw);
          const double is = inv_std[static_cast<size_t>(p)];
          for (int64_t i = 0; i < hw; ++i)
            g[static_cast<size_t>(p * hw + i)] += is * (dy[i] - m1 - y[i] * m2);
        }
      },
      "instance_norm");
}

Tensor batch_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, Tensor& running_mean,
                  Tensor& running_var, bool train, double momentum, double eps) {
  if (x.ndim() != 4) fail("batch_norm: need [B,C,H,W], got " + shape_str(x.shape()));
  const int B = x.dim(0), C = x.dim(1);
  const int64_t hw = static_cast<int64_t>(x.dim(2)) * x.dim(3);
  const int64_t cnt = static_cast<int64_t>(B) * hw;
  if (gamma.size() != C || beta.size() != C || running_mean.size() != C || running_var.size() != C)
    fail("batch_norm: per-channel params must have length C");

  std::vector<double> mean(static_cast<size_t>(C)), var(static_cast<size_t>(C));
  if (train) {
    for (int c = 0; c < C; ++c) {
      double m = 0.0;
      for (int b = 0; b < B; ++b) {
        const double* p = x.data().data() + (static_cast<int64_t>(b) * C + c) * hw;
        for (int64_t i = 0; i < hw; ++i) m += p[i];
      }
      m /= static_cast<double>(cnt);
      double vv = 0.0;
      for (int b = 0; b < B; ++b) {
        const double* p = x.data().data() + (static_cast<int64_t>(b) * C + c) * hw;
        for (int64_t i = 0; i < hw; ++i) vv += (p[i] - m) * (p[i] - m);
      }
      vv /= static_cast<double>(cnt);
      mean[static_cast<size_t>(c)] = m;
      var[static_cast<size_t>(c)] = vv;
      // running stats use the unbiased variance
      const double unbiased = cnt > 1 ? vv * static_cast<double>(cnt) / static_cast<double>(cnt - 1) : vv;
      running_mean.data()[static_cast<size_t>(c)] =
          (1.0 - momentum) * running_mean.data()[static_cast<size_t>(c)] + momentum * m;
      running_var.data()[static_cast<size_t>(c)] =
          (1.0 - momentum) * running_var.data()[static_cast<size_t>(c)] + momentum * unbiased;
    }
  } else {
    for (int c = 0; c < C; ++c) {
      mean[static_cast<size_t>(c)] = running_mean.data()[static_cast<size_t>(c)];
      var[static_cast<size_t>(c)] = running_var.data()[static_cast<size_t>(c)];
    }
  }

  std::vector<double> inv_std(static_cast<size_t>(C));
  for (int c = 0; c < C; ++c) inv_std[static_cast<size_t>(c)] = 1.0 / std::sqrt(var[static_cast<size_t>(c)] + eps);

  std::vector<double> v(static_cast<size_t>(x.size()));
  for (int b = 0; b < B; ++b)
    for (int c = 0; c < C; ++c) {
      const double m = mean[static_cast<size_t>(c)];
      const double is = inv_std[static_cast<size_t>(c)];
      const double gm = gamma.data()[static_cast<size_t>(c)];
      const double bt = beta.data()[static_cast<size_t>(c)];
      const int64_t off = (static_cast<int64_t>(b) * C + c) * hw;
      const double* xp = x.data().data() + off;
      double* vp = v.data() + off;
      for (int64_t i = 0; i < hw; ++i) vp[i] = (xp[i] - m) * is * gm + bt;
    }

  return Tensor::make(
      x.shape(), std::move(v), {x, gamma, beta},
      [B, C, hw, cnt, train, mean = std::move(mean), inv_std = std::move(inv_std)](Node& n) {
        const auto& xv = n.parents[0].data();
        const auto& gm = n.parents[1].data();
        for (int c = 0; c < C; ++c) {
          const double m = mean[static_cast<size_t>(c)];
          const double is = inv_std[static_cast<size_t>(c)];
          // accumulate per-channel sums of dy and dy*xhat
          double s1 = 0.0, s2 = 0.0;
          for (int b = 0; b < B; ++b) {
            const int64_t off = (static_cast<int64_t>(b) * C + c) * hw;
            for (int64_t i = 0; i < hw; ++i) {
              const double dy = n.grad[static_cast<size_t>(off + i)];
              s1 += dy;
              s2 += dy * (xv[static_cast<size_t>(off + i)] - m) * is;
            }
          }
          if (n.parents[1].requires_grad()) n.parents[1].node()->grad[static_cast<size_t>(c)] += s2;
          if (n.parents[2].requires_grad()) n.parents[2].node()->grad[static_cast<size_t>(c)] += s1;
          if (n.parents[0].requires_grad()) {
            auto& gx = n.parents[0].node()->grad;
            const double g = gm[static_cast<size_t>(c)];
            if (train) {
              const double inv_cnt = 1.0 / static_cast<double>(cnt);
              for (int b = 0; b < B; ++b) {
                const int64_t off = (static_cast<int64_t>(b) * C + c) * hw;
                for (int64_t i = 0; i < hw; ++i) {
                  const double dy = n.grad[static_cast<size_t>(off + i)];
                  const double xh = (xv[static_cast<size_t>(off + i)] - m) * is;
                  gx[static_cast<size_t>(off + i)] += g * is * (dy - inv_cnt * s1 - xh * inv_cnt * s2);
                }
              }
            } else {
              for (int b = 0; b < B; ++b) {
                const int64_t off = (static_cast<int64_t>(b) * C + c) * hw;
                for (int64_t i = 0; i < hw; ++i)
                  gx[static_cast<size_t>(off + i)] += g * is * n.grad[static_cast<size_t>(off + i)];
              }
            }
          }
        }
      },
      "batch_norm");
}

// ---------------- reductions ----------------

Tensor sum_all(const Tensor& x) {
  double acc = 0.0;
  for (double v : x.data()) acc += v;
  return Tensor::make(
      {1}, {acc}, {x},
      [](Node& n) {
        auto& g = n.parents[0].node()->grad;
        const double d = n.grad[0];
        for (double& e : g) e += d;
      },
      "sum_all");
}

Tensor mean_all(const Tensor& x) {
  double acc = 0.0;
  for (double v : x.data()) acc += v;
  const double inv = 1.0 / static_cast<double>(x.size());
  return Tensor::make(
      {1}, {acc * inv}, {x},
      [inv](Node& n) {
        auto& g = n.parents[0].node()->grad;
        const double d = n.grad[0] * inv;
        for (double& e : g) e += d;
      },
      "mean_all");
}

namespace {

Tensor reduce_axis(const Tensor& x, int axis, bool mean, const char* name) {
  const int r = x.ndim();
  if (axis < 0 || axis >= r) fail(std::string(name) + ": bad axis");
  int64_t outer = 1, inner = 1;
  for (int d = 0; d < axis; ++d) outer *= x.dim(d);
  for (int d = axis + 1; d < r; ++d) inner *= x.dim(d);
  const int64_t ax = x.dim(axis);
  Shape out_shape;
  for (int d = 0; d < r; ++d)
    if (d != axis) out_shape.push_back(x.dim(d));
  if (out_shape.empty()) out_shape.push_back(1);
  const double norm = mean ? 1.0 / static_cast<double>(ax) : 1.0;
  std::vector<double> v(static_cast<size_t>(outer * inner), 0.0);
  for (int64_t o = 0; o < outer; ++o)
    for (int64_t a = 0; a < ax; ++a) {
      const double* src = x.data().data() + (o * ax + a) * inner;
      double* dst = v.data() + o * inner;
      for (int64_t i = 0; i < inner; ++i) dst[i] += src[i];
    }
  if (mean)
    for (double& e : v) e *= norm;
  return Tensor::make(
      std::move(out_shape), std::move(v), {x},
      [outer, inner, ax, norm](Node& n) {
        auto& g = n.parents[0].node()->grad;
        for (int64_t o = 0; o < outer; ++o)
          for (int64_t a = 0; a < ax; ++a) {
            double* dst = g.data() + (o * ax + a) * inner;
            const double* src = n.grad.data() + o * inner;
            for (int64_t i = 0; i < inner; ++i) dst[i] += src[i] * norm;
          }
      },
      name);
}

}  // namespace

Tensor sum_axis(const Tensor& x, int axis) { return reduce_axis(x, axis, false, "sum_axis"); }
Tensor mean_axis(const Tensor& x, int axis) { return reduce_axis(x, axis, true, "mean_axis"); }

Tensor max_axis(const Tensor& x, int axis) {
  const int r = x.ndim();
  if (axis < 0 || axis >= r) fail("max_axis: bad axis");
  int64_t outer = 1, inner = 1;
  for (int d = 0; d < axis; ++d) outer *= x.dim(d);
  for (int d = axis + 1; d < r; ++d) inner *= x.dim(d);
  const int64_t ax = x.dim(axis);
  Shape out_shape;
  for (int d = 0; d < r; ++d)
    if (d != axis) out_shape.push_back(x.dim(d));
  if (out_shape.empty()) out_shape.push_back(1);
  std::vector<double> v(static_cast<size_t>(outer * inner));
  std::vector<int64_t> argmax(static_cast<size_t>(outer * inner));
  for (int64_t o = 0; o < outer; ++o)
    for (int64_t i = 0; i < inner; ++i) {
      double best = x.data()[static_cast<size_t>(o * ax * inner + i)];
      int64_t bi = 0;
      for (int64_t a = 1; a < ax; ++a) {
        const double e = x.data()[static_cast<size_t>((o * ax + a) * inner + i)];
        if (e > best) {
          best = e;
          bi = a;
        }
      }
      v[static_cast<size_t>(o * inner + i)] = best;
      argmax[static_cast<size_t>(o * inner + i)] = bi;
    }
  return Tensor::make(
      std::move(out_shape), std::move(v), {x},
      [outer, inner, ax, argmax = std::move(argmax)](Node& n) {
        auto& g = n.parents[0].node()->grad;
        for (int64_t o = 0; o < outer; ++o)
          for (int64_t i = 0; i < inner; ++i) {
            const int64_t a = argmax[static_cast<size_t>(o * inner + i)];
            g[static_cast<size_t>((o * ax + a) * inner + i)] += n.grad[static_cast<size_t>(o * inner + i)];
          }
      },
      "max_axis");
}

}  // namespace lemma
