#include "lemma/verify.hpp"

#include <algorithm>

#include "lemma/ops.hpp"
#include "lemma/rng.hpp"

namespace lemma {

namespace {

Tensor rand_t(Shape shape, Rng& rng, double margin = 0.0) {
  std::vector<double> v(static_cast<size_t>(numel(shape)));
  for (double& e : v) {
    double x = rng.uniform(-1.0, 1.0);
    if (margin > 0.0) x = x >= 0.0 ? x + margin : x - margin;
    e = x;
  }
  return Tensor::from_vector(std::move(shape), std::move(v), true);
}

Tensor rand_pos(Shape shape, Rng& rng, double lo, double hi) {
  std::vector<double> v(static_cast<size_t>(numel(shape)));
  for (double& e : v) e = rng.uniform(lo, hi);
  return Tensor::from_vector(std::move(shape), std::move(v), true);
}

struct Case {
  const char* name;
  // builds leaves and a scalar-valued forward over them
  std::function<std::pair<std::vector<Tensor>, std::function<Tensor()>>(Rng&)> build;
};

// Note: normalized outputs (instance/batch/layer norm) make sum-of-squares
// nearly invariant, which starves finite differences; those cases weight
// the output by a fixed random tensor instead.
Tensor to_scalar(const Tensor& t) { return sum_all(square(t)); }

}  // namespace

std::vector<OpCheckResult> run_substrate_grad_checks(int seeds) {
  std::vector<Case> cases;

  auto simple = [&cases](const char* name, auto make_output) {
    cases.push_back(
        {name, [make_output](Rng& rng) -> std::pair<std::vector<Tensor>, std::function<Tensor()>> {
           auto [leaves, out_fn] = make_output(rng);
           return {leaves, out_fn};
         }});
  };

  simple("add", [](Rng& rng) {
    Tensor a = rand_pos({3, 5}, rng, 0.1, 1.1), b = rand_pos({3, 5}, rng, 0.1, 1.1);
    return std::pair{std::vector<Tensor>{a, b},
                     std::function<Tensor()>([a, b] { return to_scalar(add(a, b)); })};
  });
  simple("sub", [](Rng& rng) {
    Tensor a = rand_pos({4, 3}, rng, -1.0, 1.0), b = rand_pos({4, 3}, rng, 2.0, 3.0);
    return std::pair{std::vector<Tensor>{a, b},
                     std::function<Tensor()>([a, b] { return to_scalar(sub(a, b)); })};
  });
  simple("mul", [](Rng& rng) {
    Tensor a = rand_pos({2, 6}, rng, 0.2, 1.2), b = rand_pos({2, 6}, rng, 0.2, 1.2);
    return std::pair{std::vector<Tensor>{a, b},
                     std::function<Tensor()>([a, b] { return to_scalar(mul(a, b)); })};
  });
  simple("affine", [](Rng& rng) {
    Tensor a = rand_pos({5}, rng, 0.5, 1.5);
    return std::pair{std::vector<Tensor>{a},
                     std::function<Tensor()>([a] { return to_scalar(affine(a, 1.7, -0.3)); })};
  });
  simple("relu", [](Rng& rng) {
    Tensor a = rand_t({4, 4}, rng, 0.05);
    return std::pair{std::vector<Tensor>{a},
                     std::function<Tensor()>([a] { return to_scalar(relu(a)); })};
  });
  simple("gelu", [](Rng& rng) {
    Tensor a = rand_t({4, 4}, rng);
    return std::pair{std::vector<Tensor>{a},
                     std::function<Tensor()>([a] { return to_scalar(gelu(a)); })};
  });
  simple("sigmoid", [](Rng& rng) {
    Tensor a = rand_t({3, 6}, rng);
    return std::pair{std::vector<Tensor>{a},
                     std::function<Tensor()>([a] { return to_scalar(sigmoid(a)); })};
  });
  simple("tanh", [](Rng& rng) {
    Tensor a = rand_t({6}, rng);
    return std::pair{std::vector<Tensor>{a},
                     std::function<Tensor()>([a] { return to_scalar(tanh_op(a)); })};
  });
  simple("exp", [](Rng& rng) {
    Tensor a = rand_t({5}, rng);
    return std::pair{std::vector<Tensor>{a},
                     std::function<Tensor()>([a] { return to_scalar(exp_op(a)); })};
  });
  simple("log", [](Rng& rng) {
    Tensor a = rand_pos({5}, rng, 0.2, 2.0);
    return std::pair{std::vector<Tensor>{a},
                     std::function<Tensor()>([a] { return to_scalar(log_op(a)); })};
  });
  simple("abs", [](Rng& rng) {
    Tensor a = rand_t({6}, rng, 0.05);
    return std::pair{std::vector<Tensor>{a},
                     std::function<Tensor()>([a] { return to_scalar(abs_op(a)); })};
  });
  simple("prelu", [](Rng& rng) {
    Tensor a = rand_t({3, 5}, rng, 0.05);
    Tensor s = Tensor::from_vector({1}, {0.25}, true);
    return std::pair{std::vector<Tensor>{a, s},
                     std::function<Tensor()>([a, s] { return to_scalar(prelu(a, s)); })};
  });
  simple("add_bias_nchw", [](Rng& rng) {
    Tensor x = rand_pos({2, 3, 4, 5}, rng, 0.1, 1.1), b = rand_pos({3}, rng, 0.1, 1.1);
    return std::pair{std::vector<Tensor>{x, b},
                     std::function<Tensor()>([x, b] { return to_scalar(add_bias_nchw(x, b)); })};
  });
  simple("add_bias_rows", [](Rng& rng) {
    Tensor x = rand_pos({4, 6}, rng, 0.1, 1.1), b = rand_pos({6}, rng, 0.1, 1.1);
    return std::pair{std::vector<Tensor>{x, b},
                     std::function<Tensor()>([x, b] { return to_scalar(add_bias_rows(x, b)); })};
  });
  simple("mul_gate_nchw", [](Rng& rng) {
    Tensor x = rand_pos({2, 4, 3, 3}, rng, 0.2, 1.2), g = rand_pos({2, 4}, rng, 0.2, 1.2);
    return std::pair{std::vector<Tensor>{x, g},
                     std::function<Tensor()>([x, g] { return to_scalar(mul_gate_nchw(x, g)); })};
  });
  simple("matmul", [](Rng& rng) {
    Tensor a = rand_pos({4, 5}, rng, 0.3, 1.3), b = rand_pos({5, 6}, rng, 0.3, 1.3);
    return std::pair{std::vector<Tensor>{a, b},
                     std::function<Tensor()>([a, b] { return to_scalar(matmul(a, b)); })};
  });
  simple("reshape", [](Rng& rng) {
    Tensor a = rand_t({4, 6}, rng, 0.05);
    return std::pair{std::vector<Tensor>{a}, std::function<Tensor()>([a] {
                       return to_scalar(reshape(a, {2, 3, 4}));
                     })};
  });
  simple("transpose2d", [](Rng& rng) {
    Tensor a = rand_t({4, 6}, rng, 0.05);
    return std::pair{std::vector<Tensor>{a},
                     std::function<Tensor()>([a] { return to_scalar(transpose2d(a)); })};
  });
  simple("permute", [](Rng& rng) {
    Tensor a = rand_t({2, 3, 4, 5}, rng, 0.05);
    return std::pair{std::vector<Tensor>{a}, std::function<Tensor()>([a] {
                       return to_scalar(permute(a, {0, 2, 3, 1}));
                     })};
  });
  simple("concat", [](Rng& rng) {
    Tensor a = rand_t({3, 2, 4}, rng, 0.05), b = rand_t({3, 5, 4}, rng, 0.05);
    return std::pair{std::vector<Tensor>{a, b}, std::function<Tensor()>([a, b] {
                       return to_scalar(concat({a, b}, 1));
                     })};
  });
  simple("slice", [](Rng& rng) {
    Tensor a = rand_t({4, 6, 3}, rng, 0.05);
    return std::pair{std::vector<Tensor>{a}, std::function<Tensor()>([a] {
                       return to_scalar(slice(a, 1, 2, 3));
                     })};
  });
  simple("softmax", [](Rng& rng) {
    Tensor a = rand_t({4, 6}, rng);
    return std::pair{std::vector<Tensor>{a},
                     std::function<Tensor()>([a] { return to_scalar(softmax(a, 1)); })};
  });
  simple("layer_norm", [](Rng& rng) {
    Tensor a = rand_t({3, 6}, rng);
    Tensor g = rand_pos({6}, rng, 0.5, 1.5);
    Tensor b = rand_t({6}, rng);
    Tensor w = rand_t({3, 6}, rng);
    return std::pair{std::vector<Tensor>{a, g, b}, std::function<Tensor()>([a, g, b, w] {
                       return sum_all(mul(layer_norm(a, g, b), w.detach()));
                     })};
  });
  simple("instance_norm", [](Rng& rng) {
    Tensor a = rand_t({2, 3, 4, 5}, rng);
    Tensor w = rand_t({2, 3, 4, 5}, rng);
    return std::pair{std::vector<Tensor>{a}, std::function<Tensor()>([a, w] {
                       return sum_all(mul(instance_norm(a), w.detach()));
                     })};
  });
  simple("batch_norm_train", [](Rng& rng) {
    Tensor a = rand_t({3, 4, 3, 3}, rng);
    Tensor g = rand_pos({4}, rng, 0.5, 1.5);
    Tensor b = rand_t({4}, rng);
    Tensor w = rand_t({3, 4, 3, 3}, rng);
    return std::pair{std::vector<Tensor>{a, g, b}, std::function<Tensor()>([a, g, b, w] {
                       Tensor rm = Tensor::zeros({4});
                       Tensor rv = Tensor::full({4}, 1.0);
                       return sum_all(mul(batch_norm(a, g, b, rm, rv, true), w.detach()));
                     })};
  });
  simple("sum_all", [](Rng& rng) {
    Tensor a = rand_pos({4, 5}, rng, 0.1, 1.1);
    return std::pair{std::vector<Tensor>{a}, std::function<Tensor()>([a] {
                       return square(sum_all(a));
                     })};
  });
  simple("mean_all", [](Rng& rng) {
    Tensor a = rand_pos({4, 5}, rng, 0.1, 1.1);
    return std::pair{std::vector<Tensor>{a}, std::function<Tensor()>([a] {
                       return square(mean_all(a));
                     })};
  });
  simple("sum_axis", [](Rng& rng) {
    Tensor a = rand_pos({3, 4, 5}, rng, 0.1, 1.1);
    return std::pair{std::vector<Tensor>{a},
                     std::function<Tensor()>([a] { return to_scalar(sum_axis(a, 1)); })};
  });
  simple("mean_axis", [](Rng& rng) {
    Tensor a = rand_pos({3, 4, 5}, rng, 0.1, 1.1);
    return std::pair{std::vector<Tensor>{a},
                     std::function<Tensor()>([a] { return to_scalar(mean_axis(a, 2)); })};
  });
  simple("max_axis", [](Rng& rng) {
    Tensor a = rand_pos({3, 4, 5}, rng, 0.2, 1.2);
    return std::pair{std::vector<Tensor>{a},
                     std::function<Tensor()>([a] { return to_scalar(max_axis(a, 1)); })};
  });
  simple("conv2d", [](Rng& rng) {
    Tensor x = rand_pos({2, 3, 5, 6}, rng, 0.1, 1.1);
    Tensor w = rand_pos({4, 3, 3, 3}, rng, 0.1, 1.1);
    Tensor b = rand_pos({4}, rng, 0.1, 1.1);
    return std::pair{std::vector<Tensor>{x, w, b}, std::function<Tensor()>([x, w, b] {
                       return to_scalar(conv2d(x, w, b, 1, 1));
                     })};
  });
  simple("conv2d_strided", [](Rng& rng) {
    Tensor x = rand_pos({1, 2, 6, 6}, rng, 0.1, 1.1);
    Tensor w = rand_pos({3, 2, 3, 3}, rng, 0.1, 1.1);
    Tensor b = rand_pos({3}, rng, 0.1, 1.1);
    return std::pair{std::vector<Tensor>{x, w, b}, std::function<Tensor()>([x, w, b] {
                       return to_scalar(conv2d(x, w, b, 2, 1));
                     })};
  });
  simple("conv2d_shared_stencil", [](Rng& rng) {
    Tensor x = rand_pos({2, 3, 4, 5}, rng, 0.1, 1.1);
    Tensor s = rand_pos({3, 3}, rng, 0.1, 1.1);
    return std::pair{std::vector<Tensor>{x, s}, std::function<Tensor()>([x, s] {
                       return to_scalar(conv2d_shared_stencil(x, s));
                     })};
  });
  simple("pixel_shuffle", [](Rng& rng) {
    Tensor x = rand_t({2, 8, 3, 4}, rng, 0.05);
    return std::pair{std::vector<Tensor>{x},
                     std::function<Tensor()>([x] { return to_scalar(pixel_shuffle(x, 2)); })};
  });
  simple("pixel_unshuffle", [](Rng& rng) {
    Tensor x = rand_t({2, 2, 4, 6}, rng, 0.05);
    return std::pair{std::vector<Tensor>{x},
                     std::function<Tensor()>([x] { return to_scalar(pixel_unshuffle(x, 2)); })};
  });
  simple("affine_grid", [](Rng& rng) {
    Tensor theta = rand_t({2, 2, 3}, rng, 0.05);
    return std::pair{std::vector<Tensor>{theta}, std::function<Tensor()>([theta] {
                       return to_scalar(affine_grid(theta, 4, 5));
                     })};
  });
  simple("grid_sample", [](Rng& rng) {
    const int H = 5, W = 6;
    Tensor x = rand_pos({1, 2, H, W}, rng, 0.2, 1.2);
    // build sample points with interpolation weights in [0.2, 0.8] so no
    // bilinear corner weight is small enough to drown in roundoff
    std::vector<double> g(static_cast<size_t>(4 * 5 * 2));
    for (size_t i = 0; i < g.size(); i += 2) {
      const double ix = rng.uniform_int(0, W - 2) + rng.uniform(0.2, 0.8);
      const double iy = rng.uniform_int(0, H - 2) + rng.uniform(0.2, 0.8);
      g[i] = 2.0 * ix / (W - 1) - 1.0;
      g[i + 1] = 2.0 * iy / (H - 1) - 1.0;
    }
    Tensor grid = Tensor::from_vector({1, 4, 5, 2}, std::move(g), true);
    return std::pair{std::vector<Tensor>{x, grid}, std::function<Tensor()>([x, grid] {
                       return to_scalar(grid_sample_bilinear(x, grid));
                     })};
  });
  simple("resize_bilinear", [](Rng& rng) {
    Tensor x = rand_t({2, 2, 3, 5}, rng, 0.05);
    return std::pair{std::vector<Tensor>{x}, std::function<Tensor()>([x] {
                       return to_scalar(resize_bilinear(x, 5, 8));
                     })};
  });
  simple("gather_coords", [](Rng& rng) {
    Tensor x = rand_t({3, 4, 5}, rng, 0.05);
    std::vector<Coord> coords = {{0, 0}, {1, 3}, {2, 2}, {3, 4}};
    return std::pair{std::vector<Tensor>{x}, std::function<Tensor()>([x, coords] {
                       return to_scalar(gather_coords(x, coords));
                     })};
  });
  simple("scatter_rows", [](Rng& rng) {
    Tensor t = rand_t({3, 4}, rng, 0.05);
    std::vector<Coord> coords = {{0, 1}, {2, 0}, {3, 3}};
    return std::pair{std::vector<Tensor>{t}, std::function<Tensor()>([t, coords] {
                       return to_scalar(scatter_rows(t, coords, 4, 4));
                     })};
  });
  simple("gather_per_row", [](Rng& rng) {
    Tensor x = rand_t({4, 5}, rng, 0.05);
    std::vector<int> cols = {1, 0, 4, 2};
    return std::pair{std::vector<Tensor>{x}, std::function<Tensor()>([x, cols] {
                       return to_scalar(gather_per_row(x, cols));
                     })};
  });

  std::vector<OpCheckResult> results;
  for (const Case& c : cases) {
    OpCheckResult r;
    r.op = c.name;
    for (int s = 0; s < seeds; ++s) {
      Rng rng(0x5eedULL * 1315423911ULL + static_cast<uint64_t>(s) * 2654435761ULL +
              std::hash<std::string>{}(c.name));
      auto [leaves, fwd] = c.build(rng);
      GradCheckResult g = grad_check(fwd, leaves);
      r.max_rel_err = std::max(r.max_rel_err, g.max_rel_err);
      r.checked += g.checked;
    }
    results.push_back(std::move(r));
  }
  return results;
}

double worst_substrate_grad_error(const std::vector<OpCheckResult>& results) {
  double worst = 0.0;
  for (const auto& r : results) worst = std::max(worst, r.max_rel_err);
  return worst;
}

}  // namespace lemma
