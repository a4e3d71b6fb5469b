#pragma once

#include "lemma/image.hpp"

namespace lemma {

// 10*log10(1/MSE) on [0,1] images, capped at 100 dB when MSE is 0
double psnr(const Image& a, const Image& b);

// 11x11 Gaussian window (sigma 1.5), K1=0.01, K2=0.03, dynamic range 1;
// mean over channels and fully-interior window positions
double ssim(const Image& a, const Image& b);

}  // namespace lemma
