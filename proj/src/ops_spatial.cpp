#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>

#include "kernels.hpp"
#include "lemma/ops.hpp"

namespace lemma {

namespace {

// col:[Cin*kh*kw, Ho*Wo] for one sample
void im2col(const double* x, int cin, int h, int w, int kh, int kw, int stride, int pad,
            int out_h, int out_w, double* col) {
  const int64_t P = static_cast<int64_t>(out_h) * out_w;
  for (int c = 0; c < cin; ++c)
    for (int ky = 0; ky < kh; ++ky)
      for (int kx = 0; kx < kw; ++kx) {
        double* dst = col + (static_cast<int64_t>(c) * kh * kw + ky * kw + kx) * P;
        for (int oy = 0; oy < out_h; ++oy) {
          const int iy = oy * stride + ky - pad;
          for (int ox = 0; ox < out_w; ++ox) {
            const int ix = ox * stride + kx - pad;
            dst[static_cast<int64_t>(oy) * out_w + ox] =
                (iy >= 0 && iy < h && ix >= 0 && ix < w)
                    ? x[(static_cast<int64_t>(c) * h + iy) * w + ix]
                    : 0.0;
          }
        }
      }
}

void col2im_add(const double* col, int cin, int h, int w, int kh, int kw, int stride, int pad,
                int out_h, int out_w, double* x) {
  const int64_t P = static_cast<int64_t>(out_h) * out_w;
  for (int c = 0; c < cin; ++c)
    for (int ky = 0; ky < kh; ++ky)
      for (int kx = 0; kx < kw; ++kx) {
        const double* src = col + (static_cast<int64_t>(c) * kh * kw + ky * kw + kx) * P;
        for (int oy = 0; oy < out_h; ++oy) {
          const int iy = oy * stride + ky - pad;
          if (iy < 0 || iy >= h) continue;
          for (int ox = 0; ox < out_w; ++ox) {
            const int ix = ox * stride + kx - pad;
            if (ix < 0 || ix >= w) continue;
            x[(static_cast<int64_t>(c) * h + iy) * w + ix] += src[static_cast<int64_t>(oy) * out_w + ox];
          }
        }
      }
}

}  // namespace

Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& bias, int stride, int pad) {
  if (x.ndim() != 4 || w.ndim() != 4)
    fail("conv2d: need x[B,Cin,H,W] and w[Cout,Cin,kh,kw], got x " + shape_str(x.shape()) +
         " w " + shape_str(w.shape()));
  if (x.dim(1) != w.dim(1))
    fail("conv2d: channel mismatch, x " + shape_str(x.shape()) + " vs w " + shape_str(w.shape()));
  const int B = x.dim(0), Cin = x.dim(1), H = x.dim(2), W = x.dim(3);
  const int Cout = w.dim(0), kh = w.dim(2), kw = w.dim(3);
  if (kh > H + 2 * pad || kw > W + 2 * pad)
    fail("conv2d: kernel " + shape_str(w.shape()) + " larger than padded input " +
         shape_str(x.shape()));
  if (stride < 1) fail("conv2d: stride must be >= 1");
  const int out_h = (H + 2 * pad - kh) / stride + 1;
  const int out_w = (W + 2 * pad - kw) / stride + 1;
  const int64_t P = static_cast<int64_t>(out_h) * out_w;
  const int64_t CK = static_cast<int64_t>(Cin) * kh * kw;
  const bool has_bias = bias.defined();
  if (has_bias && bias.size() != Cout) fail("conv2d: bias length must equal Cout");

  std::vector<double> v(static_cast<size_t>(B) * Cout * P, 0.0);
  std::vector<double> col(static_cast<size_t>(CK * P));
  for (int b = 0; b < B; ++b) {
    im2col(x.data().data() + static_cast<int64_t>(b) * Cin * H * W, Cin, H, W, kh, kw, stride,
           pad, out_h, out_w, col.data());
    detail::mm_accumulate(w.data().data(), col.data(), v.data() + static_cast<int64_t>(b) * Cout * P,
                          Cout, CK, P);
  }
  if (has_bias)
    for (int b = 0; b < B; ++b)
      for (int c = 0; c < Cout; ++c) {
        double* p = v.data() + (static_cast<int64_t>(b) * Cout + c) * P;
        const double bv = bias.data()[static_cast<size_t>(c)];
        for (int64_t i = 0; i < P; ++i) p[i] += bv;
      }

  std::vector<Tensor> parents = {x, w};
  if (has_bias) parents.push_back(bias);
  return Tensor::make(
      {B, Cout, out_h, out_w}, std::move(v), std::move(parents),
      [B, Cin, H, W, Cout, kh, kw, stride, pad, out_h, out_w, P, CK, has_bias](Node& n) {
        const Tensor& x = n.parents[0];
        const Tensor& w = n.parents[1];
        std::vector<double> col(static_cast<size_t>(CK * P));
        std::vector<double> wt;  // w^T lazily built for dX
        if (x.requires_grad()) {
          wt.assign(static_cast<size_t>(CK) * Cout, 0.0);
          for (int co = 0; co < Cout; ++co)
            for (int64_t k = 0; k < CK; ++k)
              wt[static_cast<size_t>(k) * Cout + co] = w.data()[static_cast<size_t>(co) * CK + k];
        }
        std::vector<double> dcol(x.requires_grad() ? static_cast<size_t>(CK * P) : 0);
        for (int b = 0; b < B; ++b) {
          const double* dy = n.grad.data() + static_cast<int64_t>(b) * Cout * P;
          if (w.requires_grad() || x.requires_grad())
            im2col(x.data().data() + static_cast<int64_t>(b) * Cin * H * W, Cin, H, W, kh, kw,
                   stride, pad, out_h, out_w, col.data());
          if (w.requires_grad()) {
            // dW[co,k] += sum_p dy[co,p] * col[k,p]
            auto& gw = w.node()->grad;
            for (int co = 0; co < Cout; ++co)
              for (int64_t k = 0; k < CK; ++k) {
                const double* a = dy + static_cast<int64_t>(co) * P;
                const double* c = col.data() + k * P;
                double acc = 0.0;
                for (int64_t p = 0; p < P; ++p) acc += a[p] * c[p];
                gw[static_cast<size_t>(co * CK + k)] += acc;
              }
          }
          if (x.requires_grad()) {
            std::fill(dcol.begin(), dcol.end(), 0.0);
            detail::mm_accumulate(wt.data(), dy, dcol.data(), CK, Cout, P);
            col2im_add(dcol.data(), Cin, H, W, kh, kw, stride, pad, out_h, out_w,
                       x.node()->grad.data() + static_cast<int64_t>(b) * Cin * H * W);
          }
          if (has_bias && n.parents[2].requires_grad()) {
            auto& gb = n.parents[2].node()->grad;
            for (int co = 0; co < Cout; ++co) {
              const double* a = dy + static_cast<int64_t>(co) * P;
              double acc = 0.0;
              for (int64_t p = 0; p < P; ++p) acc += a[p];
              gb[static_cast<size_t>(co)] += acc;
            }
          }
        }
      },
      "conv2d");
}

Tensor conv2d_shared_stencil(const Tensor& x, const Tensor& stencil) {
  if (x.ndim() != 4 || stencil.shape() != Shape{3, 3})
    fail("conv2d_shared_stencil: need x[B,C,H,W] and stencil[3,3]");
  const int B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  const double* st = stencil.data().data();
  std::vector<double> v(static_cast<size_t>(x.size()), 0.0);
  for (int64_t plane = 0; plane < static_cast<int64_t>(B) * C; ++plane) {
    const double* xp = x.data().data() + plane * H * W;
    double* vp = v.data() + plane * H * W;
    for (int y = 0; y < H; ++y)
      for (int xcoord = 0; xcoord < W; ++xcoord) {
        double acc = 0.0;
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const int iy = y + dy, ix = xcoord + dx;
            if (iy < 0 || iy >= H || ix < 0 || ix >= W) continue;
            acc += st[(dy + 1) * 3 + (dx + 1)] * xp[static_cast<int64_t>(iy) * W + ix];
          }
        vp[static_cast<int64_t>(y) * W + xcoord] = acc;
      }
  }
  return Tensor::make(
      x.shape(), std::move(v), {x, stencil},
      [B, C, H, W](Node& n) {
        const auto& xv = n.parents[0].data();
        const double* st = n.parents[1].data().data();
        for (int64_t plane = 0; plane < static_cast<int64_t>(B) * C; ++plane) {
          const double* dy_p = n.grad.data() + plane * H * W;
          const double* xp = xv.data() + plane * H * W;
          if (n.parents[0].requires_grad()) {
            double* gx = n.parents[0].node()->grad.data() + plane * H * W;
            for (int y = 0; y < H; ++y)
              for (int xc = 0; xc < W; ++xc) {
                const double d = dy_p[static_cast<int64_t>(y) * W + xc];
                if (d == 0.0) continue;
                for (int dy = -1; dy <= 1; ++dy)
                  for (int dx = -1; dx <= 1; ++dx) {
                    const int iy = y + dy, ix = xc + dx;
                    if (iy < 0 || iy >= H || ix < 0 || ix >= W) continue;
                    gx[static_cast<int64_t>(iy) * W + ix] += d * st[(dy + 1) * 3 + (dx + 1)];
                  }
              }
          }
          if (n.parents[1].requires_grad()) {
            auto& gs = n.parents[1].node()->grad;
            for (int dy = -1; dy <= 1; ++dy)
              for (int dx = -1; dx <= 1; ++dx) {
                double acc = 0.0;
                for (int y = 0; y < H; ++y) {
                  const int iy = y + dy;
                  if (iy < 0 || iy >= H) continue;
                  for (int xc = 0; xc < W; ++xc) {
                    const int ix = xc + dx;
                    if (ix < 0 || ix >= W) continue;
                    acc += dy_p[static_cast<int64_t>(y) * W + xc] * xp[static_cast<int64_t>(iy) * W + ix];
                  }
                }
                gs[static_cast<size_t>((dy + 1) * 3 + (dx + 1))] += acc;
              }
          }
        }
      },
      "conv2d_shared_stencil");
}

Tensor pixel_shuffle(const Tensor& x, int f) {
  if (x.ndim() != 4) fail("pixel_shuffle: need [B,C*f*f,H,W]");
  const int B = x.dim(0), Cf = x.dim(1), H = x.dim(2), W = x.dim(3);
  if (f < 1 || Cf % (f * f) != 0)
    fail("pixel_shuffle: channel count " + std::to_string(Cf) + " not divisible by f^2=" +
         std::to_string(f * f));
  const int C = Cf / (f * f);
  std::vector<double> v(static_cast<size_t>(x.size()));
  auto src_index = [=](int b, int c, int oy, int ox) {
    const int h = oy / f, dy = oy % f, w = ox / f, dx = ox % f;
    const int ci = (c * f + dy) * f + dx;
    return ((static_cast<int64_t>(b) * Cf + ci) * H + h) * W + w;
  };
  const int fH = H * f, fW = W * f;
  for (int b = 0; b < B; ++b)
    for (int c = 0; c < C; ++c)
      for (int oy = 0; oy < fH; ++oy)
        for (int ox = 0; ox < fW; ++ox)
          v[((static_cast<int64_t>(b) * C + c) * fH + oy) * fW + ox] =
              x.data()[static_cast<size_t>(src_index(b, c, oy, ox))];
  return Tensor::make(
      {B, C, fH, fW}, std::move(v), {x},
      [=](Node& n) {
        auto& g = n.parents[0].node()->grad;
        for (int b = 0; b < B; ++b)
          for (int c = 0; c < C; ++c)
            for (int oy = 0; oy < fH; ++oy)
              for (int ox = 0; ox < fW; ++ox)
                g[static_cast<size_t>(src_index(b, c, oy, ox))] +=
                    n.grad[((static_cast<int64_t>(b) * C + c) * fH + oy) * fW + ox];
      },
      "pixel_shuffle");
}

Tensor pixel_unshuffle(const Tensor& x, int f) {
  if (x.ndim() != 4) fail("pixel_unshuffle: need [B,C,fH,fW]");
  const int B = x.dim(0), C = x.dim(1), fH = x.dim(2), fW = x.dim(3);
  if (f < 1 || fH % f != 0 || fW % f != 0) fail("pixel_unshuffle: extents not divisible by f");
  const int H = fH / f, W = fW / f, Cf = C * f * f;
  std::vector<double> v(static_cast<size_t>(x.size()));
  auto dst_index = [=](int b, int c, int oy, int ox) {
    const int h = oy / f, dy = oy % f, w = ox / f, dx = ox % f;
    const int ci = (c * f + dy) * f + dx;
    return ((static_cast<int64_t>(b) * Cf + ci) * H + h) * W + w;
  };
  for (int b = 0; b < B; ++b)
    for (int c = 0; c < C; ++c)
      for (int oy = 0; oy < fH; ++oy)
        for (int ox = 0; ox < fW; ++ox)
          v[static_cast<size_t>(dst_index(b, c, oy, ox))] =
              x.data()[((static_cast<int64_t>(b) * C + c) * fH + oy) * fW + ox];
  return Tensor::make(
      {B, Cf, H, W}, std::move(v), {x},
      [=](Node& n) {
        auto& g = n.parents[0].node()->grad;
        for (int b = 0; b < B; ++b)
          for (int c = 0; c < C; ++c)
            for (int oy = 0; oy < fH; ++oy)
              for (int ox = 0; ox < fW; ++ox)
                g[((static_cast<int64_t>(b) * C + c) * fH + oy) * fW + ox] +=
                    n.grad[static_cast<size_t>(dst_index(b, c, oy, ox))];
      },
      "pixel_unshuffle");
}

Tensor affine_grid(const Tensor& theta, int out_h, int out_w) {
  if (theta.ndim() != 3 || theta.dim(1) != 2 || theta.dim(2) != 3)
    fail("affine_grid: theta must be [B,2,3], got " + shape_str(theta.shape()));
  const int B = theta.dim(0);
  std::vector<double> v(static_cast<size_t>(B) * out_h * out_w * 2);
  auto norm = [](int i, int n) { return n > 1 ? 2.0 * i / (n - 1) - 1.0 : 0.0; };
  for (int b = 0; b < B; ++b) {
    const double* t = theta.data().data() + static_cast<int64_t>(b) * 6;
    for (int i = 0; i < out_h; ++i) {
      const double yn = norm(i, out_h);
      for (int j = 0; j < out_w; ++j) {
        const double xn = norm(j, out_w);
        const int64_t off = ((static_cast<int64_t>(b) * out_h + i) * out_w + j) * 2;
        v[static_cast<size_t>(off)] = t[0] * xn + t[1] * yn + t[2];
        v[static_cast<size_t>(off + 1)] = t[3] * xn + t[4] * yn + t[5];
      }
    }
  }
  return Tensor::make(
      {B, out_h, out_w, 2}, std::move(v), {theta},
      [B, out_h, out_w, norm](Node& n) {
        auto& g = n.parents[0].node()->grad;
        for (int b = 0; b < B; ++b) {
          double* gt = g.data() + static_cast<int64_t>(b) * 6;
          for (int i = 0; i < out_h; ++i) {
            const double yn = norm(i, out_h);
            for (int j = 0; j < out_w; ++j) {
              const double xn = norm(j, out_w);
              const int64_t off = ((static_cast<int64_t>(b) * out_h + i) * out_w + j) * 2;
              const double dgx = n.grad[static_cast<size_t>(off)];
              const double dgy = n.grad[static_cast<size_t>(off + 1)];
              gt[0] += dgx * xn;
              gt[1] += dgx * yn;
              gt[2] += dgx;
              gt[3] += dgy * xn;
              gt[4] += dgy * yn;
              gt[5] += dgy;
            }
          }
        }
      },
      "affine_grid");
}

Tensor grid_sample_bilinear(const Tensor& x, const Tensor& grid) {
  if (x.ndim() != 4 || grid.ndim() != 4 || grid.dim(3) != 2 || grid.dim(0) != x.dim(0))
    fail("grid_sample: need x[B,C,H,W], grid[B,Ho,Wo,2]");
  const int B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  const int Ho = grid.dim(1), Wo = grid.dim(2);
  std::vector<double> v(static_cast<size_t>(B) * C * Ho * Wo);

  auto sample_setup = [=](double gx, double gy, int& x0, int& y0, double& wx, double& wy,
                          bool& in_x, bool& in_y) {
    double ix = (gx + 1.0) * 0.5 * (W - 1);
    double iy = (gy + 1.0) * 0.5 * (H - 1);
    in_x = ix > 0.0 && ix < W - 1;  // grid gradient vanishes once clamped
    in_y = iy > 0.0 && iy < H - 1;
    ix = std::clamp(ix, 0.0, static_cast<double>(W - 1));
    iy = std::clamp(iy, 0.0, static_cast<double>(H - 1));
    x0 = std::min(static_cast<int>(ix), W > 1 ? W - 2 : 0);
    y0 = std::min(static_cast<int>(iy), H > 1 ? H - 2 : 0);
    wx = ix - x0;
    wy = iy - y0;
  };

  for (int b = 0; b < B; ++b)
    for (int i = 0; i < Ho; ++i)
      for (int j = 0; j < Wo; ++j) {
        const int64_t goff = ((static_cast<int64_t>(b) * Ho + i) * Wo + j) * 2;
        int x0, y0;
        double wx, wy;
        bool in_x, in_y;
        sample_setup(grid.data()[static_cast<size_t>(goff)], grid.data()[static_cast<size_t>(goff + 1)],
                     x0, y0, wx, wy, in_x, in_y);
        const int x1 = W > 1 ? x0 + 1 : x0;
        const int y1 = H > 1 ? y0 + 1 : y0;
        for (int c = 0; c < C; ++c) {
          const double* xp = x.data().data() + (static_cast<int64_t>(b) * C + c) * H * W;
          const double v00 = xp[static_cast<int64_t>(y0) * W + x0];
          const double v01 = xp[static_cast<int64_t>(y0) * W + x1];
          const double v10 = xp[static_cast<int64_t>(y1) * W + x0];
          const double v11 = xp[static_cast<int64_t>(y1) * W + x1];
          v[((static_cast<int64_t>(b) * C + c) * Ho + i) * Wo + j] =
              (1 - wy) * ((1 - wx) * v00 + wx * v01) + wy * ((1 - wx) * v10 + wx * v11);
        }
      }

  return Tensor::make(
      {B, C, Ho, Wo}, std::move(v), {x, grid},
      [=](Node& n) {
        const Tensor& x = n.parents[0];
        const Tensor& grid = n.parents[1];
        for (int b = 0; b < B; ++b)
          for (int i = 0; i < Ho; ++i)
            for (int j = 0; j < Wo; ++j) {
              const int64_t goff = ((static_cast<int64_t>(b) * Ho + i) * Wo + j) * 2;
              int x0, y0;
              double wx, wy;
              bool in_x, in_y;
              sample_setup(grid.data()[static_cast<size_t>(goff)],
                           grid.data()[static_cast<size_t>(goff + 1)], x0, y0, wx, wy, in_x, in_y);
              const int x1 = W > 1 ? x0 + 1 : x0;
              const int y1 = H > 1 ? y0 + 1 : y0;
              double dgx = 0.0, dgy = 0.0;
              for (int c = 0; c < C; ++c) {
                const double d = n.grad[((static_cast<int64_t>(b) * C + c) * Ho + i) * Wo + j];
                if (d == 0.0) continue;
                const double* xp = x.data().data() + (static_cast<int64_t>(b) * C + c) * H * W;
                const double v00 = xp[static_cast<int64_t>(y0) * W + x0];
                const double v01 = xp[static_cast<int64_t>(y0) * W + x1];
                const double v10 = xp[static_cast<int64_t>(y1) * W + x0];
                const double v11 = xp[static_cast<int64_t>(y1) * W + x1];
                if (x.requires_grad()) {
                  double* gx = x.node()->grad.data() + (static_cast<int64_t>(b) * C + c) * H * W;
                  gx[static_cast<int64_t>(y0) * W + x0] += d * (1 - wy) * (1 - wx);
                  gx[static_cast<int64_t>(y0) * W + x1] += d * (1 - wy) * wx;
                  gx[static_cast<int64_t>(y1) * W + x0] += d * wy * (1 - wx);
                  gx[static_cast<int64_t>(y1) * W + x1] += d * wy * wx;
                }
                dgx += d * ((1 - wy) * (v01 - v00) + wy * (v11 - v10));
                dgy += d * ((1 - wx) * (v10 - v00) + wx * (v11 - v01));
              }
              if (grid.requires_grad()) {
                auto& gg = grid.node()->grad;
                if (in_x) gg[static_cast<size_t>(goff)] += dgx * 0.5 * (W - 1);
                if (in_y) gg[static_cast<size_t>(goff + 1)] += dgy * 0.5 * (H - 1);
              }
            }
      },
      "grid_sample");
}

Tensor resize_bilinear(const Tensor& x, int out_h, int out_w) {
  if (x.ndim() != 4) fail("resize_bilinear: need [B,C,H,W], got " + shape_str(x.shape()));
  const int B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  const int64_t planes = static_cast<int64_t>(B) * C;
  // align_corners mapping; weights are a fixed linear map, so the op is linear in x
  std::vector<int> x0s(static_cast<size_t>(out_w)), y0s(static_cast<size_t>(out_h));
  std::vector<double> wxs(static_cast<size_t>(out_w)), wys(static_cast<size_t>(out_h));
  for (int j = 0; j < out_w; ++j) {
    double ix = out_w > 1 ? static_cast<double>(j) * (W - 1) / (out_w - 1) : 0.0;
    int x0 = std::min(static_cast<int>(ix), W > 1 ? W - 2 : 0);
    x0s[static_cast<size_t>(j)] = x0;
    wxs[static_cast<size_t>(j)] = ix - x0;
  }
  for (int i = 0; i < out_h; ++i) {
    double iy = out_h > 1 ? static_cast<double>(i) * (H - 1) / (out_h - 1) : 0.0;
    int y0 = std::min(static_cast<int>(iy), H > 1 ? H - 2 : 0);
    y0s[static_cast<size_t>(i)] = y0;
    wys[static_cast<size_t>(i)] = iy - y0;
  }
  std::vector<double> v(static_cast<size_t>(planes) * out_h * out_w);
  for (int64_t p = 0; p < planes; ++p) {
    const double* xp = x.data().data() + p * H * W;
    double* vp = v.data() + p * out_h * out_w;
    for (int i = 0; i < out_h; ++i) {
      const int y0 = y0s[static_cast<size_t>(i)], y1 = H > 1 ? y0 + 1 : y0;
      const double wy = wys[static_cast<size_t>(i)];
      for (int j = 0; j < out_w; ++j) {
        const int x0 = x0s[static_cast<size_t>(j)], x1 = W > 1 ? x0 + 1 : x0;
        const double wx = wxs[static_cast<size_t>(j)];
        vp[static_cast<int64_t>(i) * out_w + j] =
            (1 - wy) * ((1 - wx) * xp[static_cast<int64_t>(y0) * W + x0] + wx * xp[static_cast<int64_t>(y0) * W + x1]) +
            wy * ((1 - wx) * xp[static_cast<int64_t>(y1) * W + x0] + wx * xp[static_cast<int64_t>(y1) * W + x1]);
      }
    }
  }
  return Tensor::make(
      {B, C, out_h, out_w}, std::move(v), {x},
      [planes, H, W, out_h, out_w, x0s = std::move(x0s), y0s = std::move(y0s), wxs = std::move(wxs),
       wys = std::move(wys)](Node& n) {
        auto& g = n.parents[0].node()->grad;
        for (int64_t p = 0; p < planes; ++p) {
          double* gp = g.data() + p * H * W;
          const double* dp = n.grad.data() + p * out_h * out_w;
          for (int i = 0; i < out_h; ++i) {
            const int y0 = y0s[static_cast<size_t>(i)], y1 = H > 1 ? y0 + 1 : y0;
            const double wy = wys[static_cast<size_t>(i)];
            for (int j = 0; j < out_w; ++j) {
              const int x0 = x0s[static_cast<size_t>(j)], x1 = W > 1 ? x0 + 1 : x0;
              const double wx = wxs[static_cast<size_t>(j)];
              const double d = dp[static_cast<int64_t>(i) * out_w + j];
              gp[static_cast<int64_t>(y0) * W + x0] += d * (1 - wy) * (1 - wx);
              gp[static_cast<int64_t>(y0) * W + x1] += d * (1 - wy) * wx;
              gp[static_cast<int64_t>(y1) * W + x0] += d * wy * (1 - wx);
              gp[static_cast<int64_t>(y1) * W + x1] += d * wy * wx;
            }
          }
        }
      },
      "resize_bilinear");
}

Tensor gather_coords(const Tensor& x, const std::vector<Coord>& coords) {
  if (x.ndim() != 3) fail("gather_coords: need [C,H,W], got " + shape_str(x.shape()));
  const int C = x.dim(0), H = x.dim(1), W = x.dim(2);
  const int K = static_cast<int>(coords.size());
  for (const auto& [r, c] : coords)
    if (r < 0 || r >= H || c < 0 || c >= W)
      fail("gather_coords: coordinate (" + std::to_string(r) + "," + std::to_string(c) +
           ") out of bounds for " + shape_str(x.shape()));
  std::vector<double> v(static_cast<size_t>(K) * C);
  for (int k = 0; k < K; ++k)
    for (int c = 0; c < C; ++c)
      v[static_cast<size_t>(k) * C + c] =
          x.data()[(static_cast<int64_t>(c) * H + coords[static_cast<size_t>(k)].first) * W +
                   coords[static_cast<size_t>(k)].second];
  return Tensor::make(
      {K, C}, std::move(v), {x},
      [C, H, W, K, coords](Node& n) {
        auto& g = n.parents[0].node()->grad;
        for (int k = 0; k < K; ++k)
          for (int c = 0; c < C; ++c)
            g[(static_cast<int64_t>(c) * H + coords[static_cast<size_t>(k)].first) * W +
              coords[static_cast<size_t>(k)].second] += n.grad[static_cast<size_t>(k) * C + c];
      },
      "gather_coords");
}

Tensor scatter_rows(const Tensor& tokens, const std::vector<Coord>& coords, int h, int w) {
  if (tokens.ndim() != 2 || static_cast<int>(coords.size()) != tokens.dim(0))
    fail("scatter_rows: tokens [K,d] must match coordinate count");
  const int K = tokens.dim(0), d = tokens.dim(1);
  std::vector<int64_t> rows(static_cast<size_t>(K));
  std::vector<char> seen(static_cast<size_t>(h) * w, 0);
  for (int k = 0; k < K; ++k) {
    const auto& [r, c] = coords[static_cast<size_t>(k)];
    if (r < 0 || r >= h || c < 0 || c >= w) fail("scatter_rows: coordinate out of bounds");
    const int64_t row = static_cast<int64_t>(r) * w + c;
    if (seen[static_cast<size_t>(row)]) fail("scatter_rows: duplicate coordinate in foreground set");
    seen[static_cast<size_t>(row)] = 1;
    rows[static_cast<size_t>(k)] = row;
  }
  std::vector<double> v(static_cast<size_t>(h) * w * d, 0.0);
  for (int k = 0; k < K; ++k)
    std::memcpy(v.data() + rows[static_cast<size_t>(k)] * d, tokens.data().data() + static_cast<int64_t>(k) * d,
                static_cast<size_t>(d) * sizeof(double));
  return Tensor::make(
      {h * w, d}, std::move(v), {tokens},
      [K, d, rows = std::move(rows)](Node& n) {
        auto& g = n.parents[0].node()->grad;
        for (int k = 0; k < K; ++k) {
          const double* src = n.grad.data() + rows[static_cast<size_t>(k)] * d;
          double* dst = g.data() + static_cast<int64_t>(k) * d;
          for (int j = 0; j < d; ++j) dst[j] += src[j];
        }
      },
      "scatter_rows");
}

Tensor gather_per_row(const Tensor& x, const std::vector<int>& cols) {
  if (x.ndim() != 2 || static_cast<int>(cols.size()) != x.dim(0))
    fail("gather_per_row: need [M,N] with one column index per row");
  const int M = x.dim(0), N = x.dim(1);
  std::vector<double> v(static_cast<size_t>(M));
  for (int i = 0; i < M; ++i) {
    if (cols[static_cast<size_t>(i)] < 0 || cols[static_cast<size_t>(i)] >= N)
      fail("gather_per_row: column index out of range");
    v[static_cast<size_t>(i)] = x.data()[static_cast<size_t>(i) * N + cols[static_cast<size_t>(i)]];
  }
  return Tensor::make(
      {M}, std::move(v), {x},
      [M, N, cols](Node& n) {
        auto& g = n.parents[0].node()->grad;
        for (int i = 0; i < M; ++i)
          g[static_cast<size_t>(i) * N + cols[static_cast<size_t>(i)]] += n.grad[static_cast<size_t>(i)];
      },
      "gather_per_row");
}

std::vector<Coord> topk_coords(const Tensor& values, int k) {
  if (values.ndim() != 2) fail("topk_coords: need [H,W], got " + shape_str(values.shape()));
  const int H = values.dim(0), W = values.dim(1);
  const int64_t total = static_cast<int64_t>(H) * W;
  if (k < 1 || k > total)
    fail("topk_coords: K=" + std::to_string(k) + " out of range [1," + std::to_string(total) + "]");
  std::vector<int32_t> idx(static_cast<size_t>(total));
  std::iota(idx.begin(), idx.end(), 0);
  const auto& v = values.data();
  // stable: ties keep row-major scan order
  std::stable_sort(idx.begin(), idx.end(),
                   [&v](int32_t a, int32_t b) { return v[static_cast<size_t>(a)] > v[static_cast<size_t>(b)]; });
  idx.resize(static_cast<size_t>(k));
  std::sort(idx.begin(), idx.end());
  std::vector<Coord> out;
  out.reserve(static_cast<size_t>(k));
  for (int32_t flat : idx) out.emplace_back(flat / W, flat % W);
  return out;
}

}  // namespace lemma
