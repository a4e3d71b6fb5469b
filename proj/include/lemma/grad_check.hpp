#pragma once

#include <functional>
#include <string>
#include <vector>

#include "lemma/tensor.hpp"

namespace lemma {

struct GradCheckOptions {
  double h = 1e-5;
  // 0 checks every coordinate; otherwise a seeded sample per tensor
  int max_coords_per_tensor = 0;
  uint64_t sample_seed = 17;
};

struct GradCheckResult {
  double max_rel_err = 0.0;
  std::string worst;  // "param[i]: analytic vs numeric"
  int checked = 0;
};

// Central-difference check of reverse-mode gradients. `forward` must
// rebuild the graph from the current leaf values and return a scalar.
// Relative error uses denominator max(|a|,|b|,1e-8).
GradCheckResult grad_check(const std::function<Tensor()>& forward, std::vector<Tensor> leaves,
                           const GradCheckOptions& opts = {});

}  // namespace lemma
