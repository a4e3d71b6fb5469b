#pragma once

#include <utility>
#include <vector>

#include "lemma/tensor.hpp"

namespace lemma {

// ---- elementwise (identical shapes) ----
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
// a*x + b
Tensor affine(const Tensor& x, double a, double b);
Tensor scale(const Tensor& x, double a);

Tensor relu(const Tensor& x);
Tensor gelu(const Tensor& x);
Tensor sigmoid(const Tensor& x);
Tensor tanh_op(const Tensor& x);
Tensor exp_op(const Tensor& x);
Tensor log_op(const Tensor& x);
Tensor abs_op(const Tensor& x);
Tensor square(const Tensor& x);
// slope is a scalar parameter tensor (one learnable negative slope)
Tensor prelu(const Tensor& x, const Tensor& slope);

// ---- broadcast helpers ----
// x:[B,C,H,W] + b:[C]
Tensor add_bias_nchw(const Tensor& x, const Tensor& b);
// x:[M,N] + b:[N] per row
Tensor add_bias_rows(const Tensor& x, const Tensor& b);
// x:[B,C,H,W] * g:[B,C] broadcast over spatial extent
Tensor mul_gate_nchw(const Tensor& x, const Tensor& g);

// ---- linear algebra ----
// a:[M,K] @ b:[K,N]
Tensor matmul(const Tensor& a, const Tensor& b);

// ---- shape ----
Tensor reshape(const Tensor& x, Shape shape);
Tensor transpose2d(const Tensor& x);
Tensor permute(const Tensor& x, const std::vector<int>& dims);
Tensor concat(const std::vector<Tensor>& xs, int axis);
Tensor slice(const Tensor& x, int axis, int start, int len);

// ---- normalization / probability ----
Tensor softmax(const Tensor& x, int axis);
// x:[..., d] normalized over the last axis with learned affine
Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps = 1e-5);
// x:[B,C,H,W], no learned affine
Tensor instance_norm(const Tensor& x, double eps = 1e-5);
// x:[B,C,H,W]; running_* are plain buffers updated in-place when train=true
Tensor batch_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, Tensor& running_mean,
                  Tensor& running_var, bool train, double momentum = 0.1, double eps = 1e-5);

// ---- reductions ----
Tensor sum_all(const Tensor& x);
Tensor mean_all(const Tensor& x);
Tensor sum_axis(const Tensor& x, int axis);
Tensor mean_axis(const Tensor& x, int axis);
// subgradient routed to the first maximal element along the axis
Tensor max_axis(const Tensor& x, int axis);

// ---- convolution / spatial ----
// x:[B,Cin,H,W], w:[Cout,Cin,kh,kw], bias:[Cout] or undefined
Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& bias, int stride = 1, int pad = 0);
// every channel convolved with the same 3x3 stencil, zero padding
Tensor conv2d_shared_stencil(const Tensor& x, const Tensor& stencil);
Tensor pixel_shuffle(const Tensor& x, int f);
Tensor pixel_unshuffle(const Tensor& x, int f);
// grid:[B,Ho,Wo,2] normalized coords in [-1,1], align_corners=true, border clamp
Tensor grid_sample_bilinear(const Tensor& x, const Tensor& grid);
// theta:[B,2,3] -> grid:[B,Ho,Wo,2]
Tensor affine_grid(const Tensor& theta, int out_h, int out_w);
Tensor resize_bilinear(const Tensor& x, int out_h, int out_w);

// ---- gather / scatter ----
using Coord = std::pair<int, int>;
// x:[C,H,W] -> [K,C]; gradient scatters back additively
Tensor gather_coords(const Tensor& x, const std::vector<Coord>& coords);
// tokens:[K,d] -> [H*W,d], token i at row r_i*W+c_i, zeros elsewhere
Tensor scatter_rows(const Tensor& tokens, const std::vector<Coord>& coords, int h, int w);
// x:[M,N] select one column index per row -> [M]
Tensor gather_per_row(const Tensor& x, const std::vector<int>& cols);

// ---- selection ----
// values:[H,W]; every kept score >= every dropped score; ties keep the
// earliest row-major coordinate; result sorted by row-major coordinate
std::vector<Coord> topk_coords(const Tensor& values, int k);

}  // namespace lemma
