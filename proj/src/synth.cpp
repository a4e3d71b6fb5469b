#include "lemma/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "lemma/crc32.hpp"
#include "lemma/rng.hpp"

namespace lemma {

namespace {

// 5x7 uppercase-style glyphs for a-z followed by 0-9; each row uses the
// low 5 bits, MSB = leftmost column.
constexpr uint8_t kFont[36][7] = {
    {0x0E, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11},  // a
    {0x1E, 0x11, 0x11, 0x1E, 0x11, 0x11, 0x1E},  // b
    {0x0E, 0x11, 0x10, 0x10, 0x10, 0x11, 0x0E},  // c
    {0x1E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x1E},  // d
    {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x1F},  // e
    {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x10},  // f
    {0x0E, 0x11, 0x10, 0x17, 0x11, 0x11, 0x0F},  // g
    {0x11, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11},  // h
    {0x0E, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0E},  // i
    {0x07, 0x02, 0x02, 0x02, 0x02, 0x12, 0x0C},  // j
    {0x11, 0x12, 0x14, 0x18, 0x14, 0x12, 0x11},  // k
    {0x10, 0x10, 0x10, 0x10, 0x10, 0x10, 0x1F},  // l
    {0x11, 0x1B, 0x15, 0x15, 0x11, 0x11, 0x11},  // m
    {0x11, 0x11, 0x19, 0x15, 0x13, 0x11, 0x11},  // n
    {0x0E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E},  // o
    {0x1E, 0x11, 0x11, 0x1E, 0x10, 0x10, 0x10},  // p
    {0x0E, 0x11, 0x11, 0x11, 0x15, 0x12, 0x0D},  // q
    {0x1E, 0x11, 0x11, 0x1E, 0x14, 0x12, 0x11},  // r
    {0x0F, 0x10, 0x10, 0x0E, 0x01, 0x01, 0x1E},  // s
    {0x1F, 0x04, 0x04, 0x04, 0x04, 0x04, 0x04},  // t
    {0x11, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E},  // u
    {0x11, 0x11, 0x11, 0x11, 0x11, 0x0A, 0x04},  // v
    {0x11, 0x11, 0x11, 0x15, 0x15, 0x15, 0x0A},  // w
    {0x11, 0x11, 0x0A, 0x04, 0x0A, 0x11, 0x11},  // x
    {0x11, 0x11, 0x11, 0x0A, 0x04, 0x04, 0x04},  // y
    {0x1F, 0x01, 0x02, 0x04, 0x08, 0x10, 0x1F},  // z
    {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E},  // 0
    {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E},  // 1
    {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F},  // 2
    {0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E},  // 3
    {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02},  // 4
    {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E},  // 5
    {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E},  // 6
    {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08},  // 7
    {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E},  // 8
    {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C},  // 9
};

constexpr int kSlots = 10;

constexpr uint64_t kRenderStream = 0;
constexpr uint64_t kNoiseStream = 1;
constexpr uint64_t kDegradeParamStream = 2;

double luminance(double r, double g, double b) { return 0.299 * r + 0.587 * g + 0.114 * b; }

void paint_gradient(Image& img, Rng& rng) {
  double c0[3], c1[3];
  for (int i = 0; i < 3; ++i) {
    c0[i] = rng.uniform(0.0, 1.0);
    c1[i] = rng.uniform(0.0, 1.0);
  }
  const double ang = rng.uniform(0.0, 6.2831853);
  const double dx = std::cos(ang), dy = std::sin(ang);
  for (int y = 0; y < img.h; ++y)
    for (int x = 0; x < img.w; ++x) {
      double t = (x * dx / img.w + y * dy / img.h + 1.0) * 0.5;
      t = std::clamp(t, 0.0, 1.0);
      for (int ch = 0; ch < 3; ++ch) img.at(y, x, ch) = c0[ch] * (1.0 - t) + c1[ch] * t;
    }
}

void paint_value_noise(Image& img, Rng& rng) {
  const int gh = 5, gw = 17;
  std::vector<double> grid(static_cast<size_t>(gh) * gw);
  for (double& g : grid) g = rng.uniform(0.0, 1.0);
  double c0[3], c1[3];
  for (int i = 0; i < 3; ++i) {
    c0[i] = rng.uniform(0.0, 1.0);
    c1[i] = rng.uniform(0.0, 1.0);
  }
  for (int y = 0; y < img.h; ++y)
    for (int x = 0; x < img.w; ++x) {
      const double fy = static_cast<double>(y) * (gh - 1) / (img.h - 1);
      const double fx = static_cast<double>(x) * (gw - 1) / (img.w - 1);
      const int y0 = std::min(static_cast<int>(fy), gh - 2);
      const int x0 = std::min(static_cast<int>(fx), gw - 2);
      const double wy = fy - y0, wx = fx - x0;
      const double t = (1 - wy) * ((1 - wx) * grid[static_cast<size_t>(y0) * gw + x0] +
                                   wx * grid[static_cast<size_t>(y0) * gw + x0 + 1]) +
                       wy * ((1 - wx) * grid[static_cast<size_t>(y0 + 1) * gw + x0] +
                             wx * grid[static_cast<size_t>(y0 + 1) * gw + x0 + 1]);
      for (int ch = 0; ch < 3; ++ch) img.at(y, x, ch) = c0[ch] * (1.0 - t) + c1[ch] * t;
    }
}

void paint_shapes(Image& img, Rng& rng) {
  double base[3];
  for (int i = 0; i < 3; ++i) base[i] = rng.uniform(0.0, 1.0);
  for (int y = 0; y < img.h; ++y)
    for (int x = 0; x < img.w; ++x)
      for (int ch = 0; ch < 3; ++ch) img.at(y, x, ch) = base[ch];
  const int n = rng.uniform_int(3, 8);
  for (int s = 0; s < n; ++s) {
    const bool ellipse = rng.uniform() < 0.5;
    double col[3];
    for (int i = 0; i < 3; ++i) col[i] = rng.uniform(0.0, 1.0);
    const double cx = rng.uniform(0.0, img.w);
    const double cy = rng.uniform(0.0, img.h);
    const double rx = rng.uniform(img.w * 0.05, img.w * 0.3);
    const double ry = rng.uniform(img.h * 0.08, img.h * 0.5);
    for (int y = 0; y < img.h; ++y)
      for (int x = 0; x < img.w; ++x) {
        const double u = (x - cx) / rx, v = (y - cy) / ry;
        const bool inside = ellipse ? (u * u + v * v <= 1.0)
                                    : (std::fabs(u) <= 1.0 && std::fabs(v) <= 1.0);
        if (inside)
          for (int ch = 0; ch < 3; ++ch) img.at(y, x, ch) = col[ch];
      }
  }
}

}  // namespace

const std::array<uint8_t, 7>& glyph_rows(int symbol_index) {
  if (symbol_index < 0 || symbol_index >= 36) fail("glyph_rows: index out of range");
  static std::array<std::array<uint8_t, 7>, 36> rows = [] {
    std::array<std::array<uint8_t, 7>, 36> r{};
    for (int g = 0; g < 36; ++g)
      for (int i = 0; i < 7; ++i) r[static_cast<size_t>(g)][static_cast<size_t>(i)] = kFont[g][i];
    return r;
  }();
  return rows[static_cast<size_t>(symbol_index)];
}

void render_sample(uint64_t seed, const SynthConfig& cfg, Image& hr, Label& label,
                   std::vector<CharBox>& boxes, std::string forced_label) {
  Rng rng(Rng::mix(seed, kRenderStream));
  hr = Image(cfg.hr_h, cfg.hr_w, 3);
  boxes.clear();

  switch (rng.uniform_int(0, 2)) {
    case 0: paint_gradient(hr, rng); break;
    case 1: paint_value_noise(hr, rng); break;
    default: paint_shapes(hr, rng); break;
  }

  if (forced_label.empty()) {
    const int len = rng.uniform_int(cfg.min_len, cfg.max_len);
    label.text.clear();
    for (int i = 0; i < len; ++i)
      label.text.push_back(alphabet::char_of(rng.uniform_int(0, alphabet::kCharCount - 1)));
  } else {
    if (!alphabet::is_valid_text(forced_label)) fail("render_sample: invalid forced label");
    label.text = forced_label;
  }

  // mean background luminance drives the foreground contrast draw
  double bg_lum = 0.0;
  for (int y = 0; y < hr.h; ++y)
    for (int x = 0; x < hr.w; ++x) bg_lum += luminance(hr.at(y, x, 0), hr.at(y, x, 1), hr.at(y, x, 2));
  bg_lum /= static_cast<double>(hr.h) * hr.w;

  const double contrast = rng.uniform(cfg.min_contrast, cfg.max_contrast);
  const double fg_lum = bg_lum > 0.5 ? std::max(0.0, bg_lum - contrast)
                                     : std::min(1.0, bg_lum + contrast);
  double fg[3];
  {
    // random chroma around the target luminance
    const double r = std::clamp(fg_lum + rng.uniform(-0.15, 0.15), 0.0, 1.0);
    const double g = std::clamp((fg_lum - 0.299 * r) / 0.587 + rng.uniform(-0.08, 0.08), 0.0, 1.0);
    const double b = std::clamp((fg_lum - 0.299 * r - 0.587 * g) / 0.114, 0.0, 1.0);
    fg[0] = r;
    fg[1] = g;
    fg[2] = b;
  }

  // fixed slot grid; the global offset/scale jitter is the small affine
  // deformation the rectifier is expected to undo
  const double pitch = (cfg.hr_w - 12.0) / kSlots;
  const double gdx = rng.uniform(-2.0, 2.0);
  const double gdy = rng.uniform(-1.5, 1.5);
  const double gscale = rng.uniform(0.9, 1.1);
  const double base_sy = rng.uniform(2.4, 3.0) * gscale;  // glyph is 7 rows

  const int len = static_cast<int>(label.text.size());
  for (int ci = 0; ci < len; ++ci) {
    const int sym = alphabet::index_of(label.text[static_cast<size_t>(ci)]);
    const auto& rows = glyph_rows(sym);
    const double s = rng.uniform(0.85, 1.0);
    const double sy = base_sy * s;
    const double sx = sy * 5.0 / 7.0 * rng.uniform(0.9, 1.1);
    const double gw = 5.0 * sx, gh = 7.0 * sy;
    const double x0 = 6.0 + pitch * ci + (pitch - gw) * 0.5 + gdx + rng.uniform(-0.7, 0.7);
    const double y0 = (cfg.hr_h - gh) * 0.5 + gdy + rng.uniform(-1.0, 1.0);

    // 3x3 supersampled coverage of the glyph bitmap
    const int px0 = std::max(0, static_cast<int>(std::floor(x0)));
    const int py0 = std::max(0, static_cast<int>(std::floor(y0)));
    const int px1 = std::min(cfg.hr_w, static_cast<int>(std::ceil(x0 + gw)));
    const int py1 = std::min(cfg.hr_h, static_cast<int>(std::ceil(y0 + gh)));
    for (int y = py0; y < py1; ++y)
      for (int x = px0; x < px1; ++x) {
        int hits = 0;
        for (int sy_i = 0; sy_i < 3; ++sy_i)
          for (int sx_i = 0; sx_i < 3; ++sx_i) {
            const double u = (x + (sx_i + 0.5) / 3.0 - x0) / sx;
            const double v = (y + (sy_i + 0.5) / 3.0 - y0) / sy;
            const int cu = static_cast<int>(std::floor(u));
            const int cv = static_cast<int>(std::floor(v));
            if (cu < 0 || cu >= 5 || cv < 0 || cv >= 7) continue;
            if ((rows[static_cast<size_t>(cv)] >> (4 - cu)) & 1) ++hits;
          }
        if (hits == 0) continue;
        const double alpha = hits / 9.0;
        for (int ch = 0; ch < 3; ++ch)
          hr.at(y, x, ch) = hr.at(y, x, ch) * (1.0 - alpha) + fg[ch] * alpha;
      }

    CharBox box;
    box.x0 = static_cast<uint16_t>(std::clamp(px0, 0, cfg.hr_w - 1));
    box.y0 = static_cast<uint16_t>(std::clamp(py0, 0, cfg.hr_h - 1));
    box.x1 = static_cast<uint16_t>(std::clamp(px1, box.x0 + 1, cfg.hr_w));
    box.y1 = static_cast<uint16_t>(std::clamp(py1, box.y0 + 1, cfg.hr_h));
    boxes.push_back(box);
  }
  quantize_u8_inplace(hr);
}

Image degrade(const Image& hr, const DegradeParams& params, uint64_t seed) {
  Rng rng(Rng::mix(seed, kNoiseStream));
  Image work = hr;

  if (params.blur_sigma > 1e-9) {
    const int radius = static_cast<int>(std::ceil(2.0 * params.blur_sigma));
    std::vector<double> k(static_cast<size_t>(2 * radius + 1));
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
      k[static_cast<size_t>(i + radius)] = std::exp(-0.5 * i * i / (params.blur_sigma * params.blur_sigma));
      sum += k[static_cast<size_t>(i + radius)];
    }
    for (double& e : k) e /= sum;

    Image tmp(work.h, work.w, work.c);
    for (int y = 0; y < work.h; ++y)
      for (int x = 0; x < work.w; ++x)
        for (int ch = 0; ch < work.c; ++ch) {
          double acc = 0.0;
          for (int i = -radius; i <= radius; ++i)
            acc += k[static_cast<size_t>(i + radius)] * work.at(y, std::clamp(x + i, 0, work.w - 1), ch);
          tmp.at(y, x, ch) = acc;
        }
    for (int y = 0; y < work.h; ++y)
      for (int x = 0; x < work.w; ++x)
        for (int ch = 0; ch < work.c; ++ch) {
          double acc = 0.0;
          for (int i = -radius; i <= radius; ++i)
            acc += k[static_cast<size_t>(i + radius)] * tmp.at(std::clamp(y + i, 0, work.h - 1), x, ch);
          work.at(y, x, ch) = acc;
        }
  }

  Image lr(work.h / 2, work.w / 2, work.c);
  for (int y = 0; y < lr.h; ++y)
    for (int x = 0; x < lr.w; ++x)
      for (int ch = 0; ch < lr.c; ++ch)
        lr.at(y, x, ch) = 0.25 * (work.at(2 * y, 2 * x, ch) + work.at(2 * y, 2 * x + 1, ch) +
                                  work.at(2 * y + 1, 2 * x, ch) + work.at(2 * y + 1, 2 * x + 1, ch));

  if (params.noise_sigma > 0.0)
    for (double& v : lr.v) v += params.noise_sigma * rng.normal();
  for (double& v : lr.v) v = std::clamp(v, 0.0, 1.0);
  quantize_u8_inplace(lr);
  return lr;
}

SamplePair make_sample(uint64_t seed, const SynthConfig& cfg) {
  SamplePair p;
  p.seed = seed;
  render_sample(seed, cfg, p.hr, p.label, p.boxes);
  Rng rng(Rng::mix(seed, kDegradeParamStream));
  DegradeParams params;
  params.blur_sigma = rng.uniform(0.5, 2.5);
  params.noise_sigma = rng.uniform(0.0, 8.0 / 255.0);
  p.lr = degrade(p.hr, params, seed);
  return p;
}

std::vector<SamplePair> make_dataset(uint64_t base_seed, int count, const SynthConfig& cfg) {
  std::vector<SamplePair> out;
  out.reserve(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i)
    out.push_back(make_sample(base_seed + static_cast<uint64_t>(i), cfg));
  return out;
}

// ------------------------------------------------------------- file format

namespace {

constexpr char kMagic[4] = {'L', 'M', 'S', 'R'};
constexpr uint16_t kVersion = 1;
constexpr size_t kHrBytes = 32 * 128 * 3;
constexpr size_t kLrBytes = 16 * 64 * 3;

void put_u16(std::vector<uint8_t>& out, uint16_t v) {
  out.push_back(static_cast<uint8_t>(v & 0xFF));
  out.push_back(static_cast<uint8_t>(v >> 8));
}

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::vector<uint8_t>& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<uint8_t>((v >> (8 * i)) & 0xFF));
}

struct Reader {
  const std::vector<uint8_t>& b;
  size_t pos = 0;
  const char* what;

  void need(size_t n, const std::string& ctx) const {
    if (pos + n > b.size()) fail(std::string(what) + ": truncated " + ctx);
  }
  uint8_t u8(const std::string& ctx) {
    need(1, ctx);
    return b[pos++];
  }
  uint16_t u16(const std::string& ctx) {
    need(2, ctx);
    uint16_t v = static_cast<uint16_t>(b[pos] | (b[pos + 1] << 8));
    pos += 2;
    return v;
  }
  uint32_t u32(const std::string& ctx) {
    need(4, ctx);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(b[pos + static_cast<size_t>(i)]) << (8 * i);
    pos += 4;
    return v;
  }
  uint64_t u64(const std::string& ctx) {
    need(8, ctx);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(b[pos + static_cast<size_t>(i)]) << (8 * i);
    pos += 8;
    return v;
  }
};

}  // namespace

void write_dataset(const std::string& path, const std::vector<SamplePair>& pairs) {
  std::vector<uint8_t> out;
  out.insert(out.end(), kMagic, kMagic + 4);
  put_u16(out, kVersion);
  put_u32(out, static_cast<uint32_t>(pairs.size()));
  for (const SamplePair& p : pairs) {
    std::vector<uint8_t> rec;
    put_u64(rec, p.seed);
    rec.push_back(static_cast<uint8_t>(p.label.text.size()));
    rec.insert(rec.end(), p.label.text.begin(), p.label.text.end());
    if (p.boxes.size() != p.label.text.size())
      fail("write_dataset: box count does not match label length");
    for (const CharBox& b : p.boxes) {
      put_u16(rec, b.x0);
      put_u16(rec, b.y0);
      put_u16(rec, b.x1);
      put_u16(rec, b.y1);
    }
    const auto hr = to_u8(p.hr);
    const auto lr = to_u8(p.lr);
    if (hr.size() != kHrBytes || lr.size() != kLrBytes)
      fail("write_dataset: sample has wrong geometry");
    rec.insert(rec.end(), hr.begin(), hr.end());
    rec.insert(rec.end(), lr.begin(), lr.end());
    put_u32(rec, crc32(rec.data(), rec.size()));
    out.insert(out.end(), rec.begin(), rec.end());
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) fail("write_dataset: cannot open '" + path + "'");
  f.write(reinterpret_cast<const char*>(out.data()), static_cast<long>(out.size()));
  if (!f) fail("write_dataset: write failed");
}

std::vector<SamplePair> read_dataset(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail("read_dataset: cannot open '" + path + "'");
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  Reader r{bytes, 0, "read_dataset"};
  r.need(4, "header");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) fail("read_dataset: bad magic, not a dataset file");
  r.pos = 4;
  const uint16_t version = r.u16("header");
  if (version != kVersion)
    fail("read_dataset: version mismatch, file has " + std::to_string(version) + ", expected " +
         std::to_string(kVersion));
  const uint32_t count = r.u32("header");
  std::vector<SamplePair> out;
  out.reserve(count);
  for (uint32_t i = 0; i < count; ++i) {
    const std::string ctx = "record " + std::to_string(i);
    const size_t rec_start = r.pos;
    SamplePair p;
    p.seed = r.u64(ctx);
    const uint8_t label_len = r.u8(ctx);
    r.need(label_len, ctx);
    p.label.text.assign(bytes.begin() + static_cast<long>(r.pos),
                        bytes.begin() + static_cast<long>(r.pos + label_len));
    r.pos += label_len;
    for (int bi = 0; bi < label_len; ++bi) {
      CharBox b;
      b.x0 = r.u16(ctx);
      b.y0 = r.u16(ctx);
      b.x1 = r.u16(ctx);
      b.y1 = r.u16(ctx);
      p.boxes.push_back(b);
    }
    r.need(kHrBytes + kLrBytes, ctx);
    std::vector<uint8_t> hr(bytes.begin() + static_cast<long>(r.pos),
                            bytes.begin() + static_cast<long>(r.pos + kHrBytes));
    r.pos += kHrBytes;
    std::vector<uint8_t> lr(bytes.begin() + static_cast<long>(r.pos),
                            bytes.begin() + static_cast<long>(r.pos + kLrBytes));
    r.pos += kLrBytes;
    const uint32_t expect = crc32(bytes.data() + rec_start, r.pos - rec_start);
    const uint32_t stored = r.u32(ctx);
    if (expect != stored)
      fail("read_dataset: checksum failure in record " + std::to_string(i));
    p.hr = from_u8(hr, 32, 128, 3);
    p.lr = from_u8(lr, 16, 64, 3);
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace lemma
