#pragma once

#include <cstdint>

namespace lemma::detail {

// C[M,N] += A[M,K] @ B[K,N]. Each output element is a single sequential
// reduction, so results are bit-reproducible regardless of call pattern.
inline void mm_accumulate(const double* A, const double* B, double* C, int64_t M, int64_t K,
                          int64_t N) {
  for (int64_t i = 0; i < M; ++i) {
    double* c = C + i * N;
    const double* a = A + i * K;
    for (int64_t k = 0; k < K; ++k) {
      const double av = a[k];
      const double* b = B + k * N;
      for (int64_t j = 0; j < N; ++j) c[j] += av * b[j];
    }
  }
}

}  // namespace lemma::detail
