#pragma once

#include <cmath>
#include <vector>

#include "lemma/rng.hpp"
#include "lemma/tensor.hpp"

namespace testutil {

inline lemma::Tensor random_tensor(lemma::Shape shape, lemma::Rng& rng, double lo = -1.0,
                                   double hi = 1.0, bool requires_grad = false) {
  std::vector<double> v(static_cast<size_t>(lemma::numel(shape)));
  for (double& e : v) e = rng.uniform(lo, hi);
  return lemma::Tensor::from_vector(std::move(shape), std::move(v), requires_grad);
}

// random values kept away from zero so relu/abs kinks cannot interfere
// with finite differences
inline lemma::Tensor random_tensor_off_kink(lemma::Shape shape, lemma::Rng& rng,
                                            bool requires_grad = false, double margin = 0.05) {
  std::vector<double> v(static_cast<size_t>(lemma::numel(shape)));
  for (double& e : v) {
    double x = rng.uniform(-1.0, 1.0);
    e = x >= 0.0 ? x + margin : x - margin;
  }
  return lemma::Tensor::from_vector(std::move(shape), std::move(v), requires_grad);
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

}  // namespace testutil
