#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>

#include "lemma/verify.hpp"

// Isolated finite-difference checks for every differentiable substrate op,
// five seeds each. Tolerance matches the substrate contract.
TEST_CASE("every substrate op passes isolated grad_check below 1e-6") {
  auto results = lemma::run_substrate_grad_checks(5);
  CHECK(results.size() >= 35);
  for (const auto& r : results) {
    INFO(r.op, ": max rel err ", r.max_rel_err, " over ", r.checked, " coords");
    CHECK(r.max_rel_err < 1e-6);
  }
}
