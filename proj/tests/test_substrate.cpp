#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "lemma/grad_check.hpp"
#include "lemma/ops.hpp"
#include "lemma/rng.hpp"
#include "test_util.hpp"

using namespace lemma;
using testutil::random_tensor;

// ---------------------------------------------------------------- conv2d

TEST_CASE("conv2d: 3x3 ones against 3x3 ones gives the element count") {
  Tensor x = Tensor::full({1, 1, 3, 3}, 1.0);
  Tensor w = Tensor::full({1, 1, 3, 3}, 1.0);
  Tensor y = conv2d(x, w, Tensor(), 1, 0);
  CHECK(y.shape() == Shape{1, 1, 1, 1});
  CHECK(y.item() == 9.0);
}

TEST_CASE("conv2d: identity 1x1 kernel passes input through") {
  Rng rng(11);
  Tensor x = random_tensor({2, 1, 4, 5}, rng);
  Tensor w = Tensor::full({1, 1, 1, 1}, 1.0);
  Tensor y = conv2d(x, w, Tensor(), 1, 0);
  CHECK(testutil::max_abs_diff(x.data(), y.data()) == 0.0);
}

namespace {

// independent six-loop oracle for cross-correlation with zero padding
std::vector<double> conv_oracle(const Tensor& x, const Tensor& w, int stride, int pad) {
  const int B = x.dim(0), Cin = x.dim(1), H = x.dim(2), W = x.dim(3);
  const int Cout = w.dim(0), kh = w.dim(2), kw = w.dim(3);
  const int oh = (H + 2 * pad - kh) / stride + 1, ow = (W + 2 * pad - kw) / stride + 1;
  std::vector<double> out(static_cast<size_t>(B) * Cout * oh * ow, 0.0);
  for (int b = 0; b < B; ++b)
    for (int co = 0; co < Cout; ++co)
      for (int oy = 0; oy < oh; ++oy)
        for (int ox = 0; ox < ow; ++ox) {
          double acc = 0.0;
          for (int ci = 0; ci < Cin; ++ci)
            for (int ky = 0; ky < kh; ++ky)
              for (int kx = 0; kx < kw; ++kx) {
                int iy = oy * stride + ky - pad, ix = ox * stride + kx - pad;
                if (iy < 0 || iy >= H || ix < 0 || ix >= W) continue;
                acc += x.at({b, ci, iy, ix}) * w.at({co, ci, ky, kx});
              }
          out[((static_cast<size_t>(b) * Cout + co) * oh + oy) * ow + ox] = acc;
        }
  return out;
}

}  // namespace

TEST_CASE("conv2d: random case matches nested-loop oracle exactly") {
  Rng rng(42);
  Tensor x = random_tensor({1, 2, 4, 4}, rng);
  Tensor w = random_tensor({3, 2, 3, 3}, rng);
  Tensor y = conv2d(x, w, Tensor(), 1, 1);
  auto expect = conv_oracle(x, w, 1, 1);
  CHECK(testutil::max_abs_diff(y.data(), expect) == 0.0);
}

TEST_CASE("conv2d: strided case matches oracle") {
  Rng rng(43);
  Tensor x = random_tensor({2, 3, 6, 5}, rng);
  Tensor w = random_tensor({4, 3, 3, 3}, rng);
  Tensor y = conv2d(x, w, Tensor(), 2, 1);
  auto expect = conv_oracle(x, w, 2, 1);
  CHECK(testutil::max_abs_diff(y.data(), expect) < 1e-15);
}

TEST_CASE("conv2d: shape mismatch names both shapes") {
  Tensor x = Tensor::zeros({1, 2, 4, 4});
  Tensor w = Tensor::zeros({3, 5, 3, 3});
  CHECK_THROWS_WITH_AS(conv2d(x, w, Tensor(), 1, 1),
                       doctest::Contains("[1,2,4,4]"), std::runtime_error);
}

// ---------------------------------------------------------------- softmax

TEST_CASE("softmax: constant vector is uniform") {
  Tensor x = Tensor::full({7}, 3.25);
  Tensor y = softmax(x, 0);
  for (double v : y.data()) CHECK(v == doctest::Approx(1.0 / 7).epsilon(1e-14));
}

TEST_CASE("softmax: [0, ln3] forces [0.25, 0.75]") {
  Tensor x = Tensor::from_vector({2}, {0.0, std::log(3.0)});
  Tensor y = softmax(x, 0);
  CHECK(y.data()[0] == doctest::Approx(0.25).epsilon(1e-13));
  CHECK(y.data()[1] == doctest::Approx(0.75).epsilon(1e-13));
}

TEST_CASE("softmax: matches exp/sum oracle within 1e-12 and rows sum to 1") {
  Rng rng(7);
  Tensor x = random_tensor({4, 7}, rng, -3.0, 3.0);
  Tensor y = softmax(x, 1);
  for (int i = 0; i < 4; ++i) {
    double denom = 0.0;
    for (int j = 0; j < 7; ++j) denom += std::exp(x.at({i, j}));
    double row_sum = 0.0;
    for (int j = 0; j < 7; ++j) {
      CHECK(y.at({i, j}) == doctest::Approx(std::exp(x.at({i, j})) / denom).epsilon(1e-12));
      row_sum += y.at({i, j});
    }
    CHECK(std::fabs(row_sum - 1.0) < 1e-12);
  }
}

TEST_CASE("softmax: sums to 1 within 1e-12 for extreme finite inputs") {
  Tensor x = Tensor::from_vector({4}, {700.0, -700.0, 350.0, 0.0});
  Tensor y = softmax(x, 0);
  double s = 0.0;
  for (double v : y.data()) {
    CHECK(v >= 0.0);
    s += v;
  }
  CHECK(std::fabs(s - 1.0) < 1e-12);
}

// ---------------------------------------------------------------- instance_norm

TEST_CASE("instance_norm: constant plane maps to zeros") {
  Tensor x = Tensor::full({1, 2, 3, 4}, 5.0);
  Tensor y = instance_norm(x, 1e-5);
  for (double v : y.data()) CHECK(v == 0.0);
}

TEST_CASE("instance_norm: two-value plane standardizes to -1,1 as eps vanishes") {
  Tensor x = Tensor::from_vector({1, 1, 1, 2}, {1.0, 3.0});
  Tensor y = instance_norm(x, 1e-12);
  CHECK(y.data()[0] == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK(y.data()[1] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("instance_norm: per-plane mean/variance oracle") {
  Rng rng(99);
  // plane variance must dominate eps for the output variance to sit
  // within 1e-6 of 1
  Tensor x = random_tensor({2, 3, 4, 5}, rng, -20.0, 20.0);
  Tensor y = instance_norm(x, 1e-5);
  const int hw = 20;
  for (int b = 0; b < 2; ++b)
    for (int c = 0; c < 3; ++c) {
      double mean = 0.0, var = 0.0;
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 5; ++j) mean += y.at({b, c, i, j});
      mean /= hw;
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 5; ++j) var += (y.at({b, c, i, j}) - mean) * (y.at({b, c, i, j}) - mean);
      var /= hw;
      CHECK(std::fabs(mean) < 1e-10);
      CHECK(var == doctest::Approx(1.0).epsilon(1e-6));
    }
}

// ---------------------------------------------------------------- topk_coords

TEST_CASE("topk_coords: full selection is every coordinate in row-major order") {
  Rng rng(5);
  Tensor x = random_tensor({3, 4}, rng);
  auto coords = topk_coords(x, 12);
  REQUIRE(coords.size() == 12);
  int i = 0;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 4; ++c, ++i) CHECK(coords[static_cast<size_t>(i)] == Coord{r, c});
}

TEST_CASE("topk_coords: single maximum found") {
  Tensor x = Tensor::zeros({4, 8});
  x.data()[2 * 8 + 5] = 1.0;
  auto coords = topk_coords(x, 1);
  REQUIRE(coords.size() == 1);
  CHECK(coords[0] == Coord{2, 5});
}

TEST_CASE("topk_coords: matches full-sort oracle with the same tie rule") {
  Rng rng(123);
  Tensor x = random_tensor({8, 16}, rng);
  // inject some exact ties
  x.data()[5] = x.data()[77] = x.data()[100];
  auto got = topk_coords(x, 32);

  // oracle: sort (value desc, flat asc), cut at K, reorder row-major
  std::vector<std::pair<double, int>> entries;
  for (int f = 0; f < 128; ++f) entries.emplace_back(x.data()[static_cast<size_t>(f)], f);
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::vector<int> kept;
  for (int i = 0; i < 32; ++i) kept.push_back(entries[static_cast<size_t>(i)].second);
  std::sort(kept.begin(), kept.end());
  REQUIRE(got.size() == 32);
  for (int i = 0; i < 32; ++i)
    CHECK(got[static_cast<size_t>(i)] == Coord{kept[static_cast<size_t>(i)] / 16, kept[static_cast<size_t>(i)] % 16});
}

TEST_CASE("topk_coords: deterministic across repeated runs and selection-optimal") {
  Rng rng(31);
  Tensor x = random_tensor({6, 6}, rng);
  auto a = topk_coords(x, 9);
  auto b = topk_coords(x, 9);
  CHECK(a == b);
  double min_kept = 1e300;
  for (auto [r, c] : a) min_kept = std::min(min_kept, x.at({r, c}));
  std::vector<char> sel(36, 0);
  for (auto [r, c] : a) sel[static_cast<size_t>(r * 6 + c)] = 1;
  for (int f = 0; f < 36; ++f)
    if (!sel[static_cast<size_t>(f)]) CHECK(x.data()[static_cast<size_t>(f)] <= min_kept);
  CHECK_THROWS(topk_coords(x, 0));
  CHECK_THROWS(topk_coords(x, 37));
}

// ---------------------------------------------------------------- pixel_shuffle

TEST_CASE("pixel_shuffle: f=1 is the identity") {
  Rng rng(3);
  Tensor x = random_tensor({2, 3, 4, 5}, rng);
  Tensor y = pixel_shuffle(x, 1);
  CHECK(testutil::max_abs_diff(x.data(), y.data()) == 0.0);
}

TEST_CASE("pixel_shuffle: definitional 2x2 layout") {
  Tensor x = Tensor::from_vector({1, 4, 1, 1}, {1.0, 2.0, 3.0, 4.0});
  Tensor y = pixel_shuffle(x, 2);
  CHECK(y.shape() == Shape{1, 1, 2, 2});
  CHECK(y.data() == std::vector<double>{1.0, 2.0, 3.0, 4.0});
}

TEST_CASE("pixel_shuffle: value multiset preserved and index map matches loop oracle") {
  Rng rng(8);
  Tensor x = random_tensor({2, 8, 3, 5}, rng);
  Tensor y = pixel_shuffle(x, 2);
  CHECK(y.shape() == Shape{2, 2, 6, 10});

  auto xs = x.data();
  auto ys = y.data();
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());
  CHECK(xs == ys);

  for (int b = 0; b < 2; ++b)
    for (int c = 0; c < 2; ++c)
      for (int oy = 0; oy < 6; ++oy)
        for (int ox = 0; ox < 10; ++ox)
          CHECK(y.at({b, c, oy, ox}) == x.at({b, (c * 2 + oy % 2) * 2 + ox % 2, oy / 2, ox / 2}));
}

TEST_CASE("pixel_shuffle: unshuffle inverts shuffle on any tensor") {
  Rng rng(21);
  for (int f : {1, 2, 3}) {
    Tensor x = random_tensor({2, 2 * f * f, 3, 4}, rng);
    Tensor y = pixel_unshuffle(pixel_shuffle(x, f), f);
    CHECK(testutil::max_abs_diff(x.data(), y.data()) == 0.0);
  }
  CHECK_THROWS(pixel_shuffle(Tensor::zeros({1, 3, 2, 2}), 2));
}

// ---------------------------------------------------------------- grad_check harness

TEST_CASE("grad_check: quadratic has analytic gradient [2,4]") {
  Tensor x = Tensor::from_vector({2}, {1.0, 2.0}, true);
  auto res = grad_check([x] { return sum_all(square(x)); }, {x});
  CHECK(res.max_rel_err < 1e-9);
  Tensor out = sum_all(square(x));
  x.zero_grad();
  out.backward();
  CHECK(x.grad()[0] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(x.grad()[1] == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("grad_check: softmax-dot composite under 1e-6") {
  Rng rng(17);
  Tensor x = random_tensor({6}, rng, -1.0, 1.0, true);
  Tensor w = random_tensor({6}, rng, -1.0, 1.0, true);
  auto res = grad_check([x, w] { return sum_all(mul(softmax(x, 0), w)); }, {x, w});
  CHECK(res.max_rel_err < 1e-6);
}

TEST_CASE("grad_check: rejects non-scalar outputs") {
  Tensor x = Tensor::from_vector({2}, {1.0, 2.0}, true);
  CHECK_THROWS(grad_check([x] { return square(x); }, {x}));
}

// ---------------------------------------------------------------- misc invariants

TEST_CASE("gradients accumulate by addition across uses") {
  Tensor x = Tensor::from_vector({1}, {3.0}, true);
  Tensor y = add(square(x), square(x));  // 2x^2, dy/dx = 4x = 12
  x.zero_grad();
  y.backward();
  CHECK(x.grad()[0] == doctest::Approx(12.0).epsilon(1e-12));
}

TEST_CASE("non-finite values are a hard error in 64-bit mode") {
  Tensor x = Tensor::from_vector({1}, {0.0});
  CHECK_THROWS_WITH_AS(log_op(x), doctest::Contains("non-finite"), std::runtime_error);
}

TEST_CASE("f32 mode rounds stored values through binary32") {
  set_precision(Precision::f32);
  Tensor a = Tensor::from_vector({2}, {1.0, 3.0});
  Tensor b = Tensor::from_vector({2}, {1e-9, 0.1});
  Tensor c = add(a, b);
  for (double v : c.data()) CHECK(v == static_cast<double>(static_cast<float>(v)));
  set_precision(Precision::f64);
}

TEST_CASE("detach blocks gradient flow") {
  Tensor x = Tensor::from_vector({1}, {2.0}, true);
  Tensor y = sum_all(square(x.detach()));
  CHECK_FALSE(y.requires_grad());
  Tensor z = add(sum_all(square(x)), y);
  x.zero_grad();
  z.backward();
  CHECK(x.grad()[0] == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("max_axis routes gradient to first maximal element on ties") {
  Tensor x = Tensor::from_vector({3}, {2.0, 2.0, 1.0}, true);
  Tensor y = sum_all(max_axis(x, 0));
  x.zero_grad();
  y.backward();
  CHECK(x.grad() == std::vector<double>{1.0, 0.0, 0.0});
}
