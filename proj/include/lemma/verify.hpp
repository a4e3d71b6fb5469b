#pragma once

#include <string>
#include <vector>

#include "lemma/grad_check.hpp"

namespace lemma {

struct OpCheckResult {
  std::string op;
  double max_rel_err = 0.0;
  int checked = 0;
};

// Finite-difference check of every differentiable substrate op in
// isolation: random shapes up to 6 per axis, `seeds` seeded repetitions
// each. Inputs are sampled away from relu/abs kinks.
std::vector<OpCheckResult> run_substrate_grad_checks(int seeds = 5);

double worst_substrate_grad_error(const std::vector<OpCheckResult>& results);

}  // namespace lemma
