#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "lemma/alphabet.hpp"
#include "lemma/image.hpp"

namespace lemma {

// Axis-aligned character box in HR pixel coordinates, [x0,x1) x [y0,y1).
struct CharBox {
  uint16_t x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  bool operator==(const CharBox&) const = default;
};

struct SamplePair {
  Image lr;   // 16x64x3
  Image hr;   // 32x128x3
  Label label;
  std::vector<CharBox> boxes;
  uint64_t seed = 0;
};

struct DegradeParams {
  double blur_sigma = 1.2;   // [0.5, 2.5]
  double noise_sigma = 4.0 / 255.0;  // [0, 8/255]
};

struct SynthConfig {
  int hr_h = 32, hr_w = 128;
  int min_len = 3, max_len = 10;
  double min_contrast = 0.18;
  double max_contrast = 0.95;
};

// Deterministic per seed. Character glyphs come from a built-in 5x7
// bitmap font laid out on a fixed 10-slot grid with global and per-glyph
// jitter; backgrounds are gradients, value noise, or random shapes.
void render_sample(uint64_t seed, const SynthConfig& cfg, Image& hr, Label& label,
                   std::vector<CharBox>& boxes, std::string forced_label = "");

// Gaussian blur (kernel truncated at 2*sigma) -> 2x area-average
// downsample -> additive Gaussian noise -> clamp to [0,1], quantized to
// 8-bit levels. Deterministic per seed.
Image degrade(const Image& hr, const DegradeParams& params, uint64_t seed);

// render + seeded degradation parameters
SamplePair make_sample(uint64_t seed, const SynthConfig& cfg = {});

std::vector<SamplePair> make_dataset(uint64_t base_seed, int count, const SynthConfig& cfg = {});

// Dataset file: magic "LMSR", u16 version=1, u32 count; per record:
// u64 seed, u8 label_len, label bytes, label_len*4 u16 box coords,
// HR payload (32*128*3 bytes), LR payload (16*64*3 bytes), u32 CRC32 of
// the record bytes. Little-endian integers throughout.
void write_dataset(const std::string& path, const std::vector<SamplePair>& pairs);
std::vector<SamplePair> read_dataset(const std::string& path);

// 5x7 glyph rows (low 5 bits used), indexed by alphabet symbol index
const std::array<uint8_t, 7>& glyph_rows(int symbol_index);

}  // namespace lemma
