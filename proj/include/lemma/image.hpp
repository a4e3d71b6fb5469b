#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lemma/tensor.hpp"

namespace lemma {

// Interleaved row-major image, values in [0,1].
struct Image {
  int h = 0;
  int w = 0;
  int c = 0;
  std::vector<double> v;  // h*w*c

  Image() = default;
  Image(int h_, int w_, int c_, double fill = 0.0)
      : h(h_), w(w_), c(c_), v(static_cast<size_t>(h_) * w_ * c_, fill) {}

  double& at(int y, int x, int ch) { return v[(static_cast<size_t>(y) * w + x) * c + ch]; }
  double at(int y, int x, int ch) const { return v[(static_cast<size_t>(y) * w + x) * c + ch]; }
  size_t size() const { return v.size(); }
};

std::vector<uint8_t> to_u8(const Image& img);
Image from_u8(const std::vector<uint8_t>& bytes, int h, int w, int c);
// rounds every sample to the nearest 8-bit level
void quantize_u8_inplace(Image& img);

// image <-> [C,H,W] tensor
Tensor image_to_tensor(const Image& img);
Image tensor_to_image(const Tensor& t);

// Catmull-Rom bicubic resize, replicate borders
Image resize_bicubic(const Image& img, int out_h, int out_w);

// PNG, 8-bit, color type 0 (gray) or 2 (RGB). Reading also accepts RGBA
// (alpha dropped). Interlaced or palette files are rejected.
void write_png(const std::string& path, const Image& img);
Image read_png(const std::string& path);

}  // namespace lemma
