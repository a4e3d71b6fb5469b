#include "lemma/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "lemma/rng.hpp"

namespace lemma {

GradCheckResult grad_check(const std::function<Tensor()>& forward, std::vector<Tensor> leaves,
                           const GradCheckOptions& opts) {
  if (precision() != Precision::f64) fail("grad_check requires 64-bit mode");

  Tensor out = forward();
  if (out.size() != 1) fail("grad_check: forward must return a scalar");
  for (Tensor& l : leaves) l.zero_grad();
  out.backward();

  // snapshot analytic gradients (a later forward() must not disturb them)
  std::vector<std::vector<double>> analytic;
  analytic.reserve(leaves.size());
  for (Tensor& l : leaves) {
    if (!l.requires_grad()) fail("grad_check: leaf without requires_grad");
    analytic.push_back(l.has_grad() ? l.grad() : std::vector<double>(static_cast<size_t>(l.size()), 0.0));
  }

  GradCheckResult res;
  Rng rng(opts.sample_seed);
  for (size_t li = 0; li < leaves.size(); ++li) {
    Tensor& leaf = leaves[li];
    const int64_t n = leaf.size();
    std::vector<int64_t> coords;
    if (opts.max_coords_per_tensor <= 0 || n <= opts.max_coords_per_tensor) {
      coords.resize(static_cast<size_t>(n));
      for (int64_t i = 0; i < n; ++i) coords[static_cast<size_t>(i)] = i;
    } else {
      // seeded distinct sample
      std::vector<int64_t> all(static_cast<size_t>(n));
      for (int64_t i = 0; i < n; ++i) all[static_cast<size_t>(i)] = i;
      rng.shuffle(all);
      coords.assign(all.begin(), all.begin() + opts.max_coords_per_tensor);
    }
    for (int64_t ci : coords) {
      const double orig = leaf.data()[static_cast<size_t>(ci)];
      leaf.data()[static_cast<size_t>(ci)] = orig + opts.h;
      const double fp = forward().item();
      leaf.data()[static_cast<size_t>(ci)] = orig - opts.h;
      const double fm = forward().item();
      leaf.data()[static_cast<size_t>(ci)] = orig;
      const double numeric = (fp - fm) / (2.0 * opts.h);
      const double a = analytic[li][static_cast<size_t>(ci)];
      const double rel = std::fabs(a - numeric) / std::max({std::fabs(a), std::fabs(numeric), 1e-8});
      ++res.checked;
      if (rel > res.max_rel_err) {
        res.max_rel_err = rel;
        res.worst = "leaf " + std::to_string(li) + " coord " + std::to_string(ci) + ": analytic " +
                    std::to_string(a) + " vs numeric " + std::to_string(numeric);
      }
    }
  }
  return res;
}

}  // namespace lemma
