#include "lemma/metrics.hpp"

#include <cmath>

#include "lemma/tensor.hpp"

namespace lemma {

double psnr(const Image& a, const Image& b) {
  if (a.h != b.h || a.w != b.w || a.c != b.c) fail("psnr: image geometry mismatch");
  double mse = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double d = a.v[i] - b.v[i];
    mse += d * d;
  }
  mse /= static_cast<double>(a.size());
  if (mse == 0.0) return 100.0;
  return std::min(100.0, 10.0 * std::log10(1.0 / mse));
}

double ssim(const Image& a, const Image& b) {
  if (a.h != b.h || a.w != b.w || a.c != b.c) fail("ssim: image geometry mismatch");
  constexpr int kWin = 11;
  constexpr double kSigma = 1.5;
  constexpr double kC1 = 0.01 * 0.01;
  constexpr double kC2 = 0.03 * 0.03;
  if (a.h < kWin || a.w < kWin) fail("ssim: image smaller than the 11x11 window");

  double win[kWin][kWin];
  double wsum = 0.0;
  for (int i = 0; i < kWin; ++i)
    for (int j = 0; j < kWin; ++j) {
      const double dy = i - 5, dx = j - 5;
      win[i][j] = std::exp(-(dx * dx + dy * dy) / (2.0 * kSigma * kSigma));
      wsum += win[i][j];
    }
  for (int i = 0; i < kWin; ++i)
    for (int j = 0; j < kWin; ++j) win[i][j] /= wsum;

  double total = 0.0;
  int64_t count = 0;
  for (int ch = 0; ch < a.c; ++ch)
    for (int y = 0; y + kWin <= a.h; ++y)
      for (int x = 0; x + kWin <= a.w; ++x) {
        double mu_a = 0.0, mu_b = 0.0;
        for (int i = 0; i < kWin; ++i)
          for (int j = 0; j < kWin; ++j) {
            mu_a += win[i][j] * a.at(y + i, x + j, ch);
            mu_b += win[i][j] * b.at(y + i, x + j, ch);
          }
        double va = 0.0, vb = 0.0, cov = 0.0;
        for (int i = 0; i < kWin; ++i)
          for (int j = 0; j < kWin; ++j) {
            const double da = a.at(y + i, x + j, ch) - mu_a;
            const double db = b.at(y + i, x + j, ch) - mu_b;
            va += win[i][j] * da * da;
            vb += win[i][j] * db * db;
            cov += win[i][j] * da * db;
          }
        total += ((2.0 * mu_a * mu_b + kC1) * (2.0 * cov + kC2)) /
                 ((mu_a * mu_a + mu_b * mu_b + kC1) * (va + vb + kC2));
        ++count;
      }
  return total / static_cast<double>(count);
}

}  // namespace lemma
