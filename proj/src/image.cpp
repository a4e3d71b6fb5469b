#include "lemma/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "lemma/crc32.hpp"

namespace lemma {

std::vector<uint8_t> to_u8(const Image& img) {
  std::vector<uint8_t> out(img.size());
  for (size_t i = 0; i < img.size(); ++i) {
    double x = std::clamp(img.v[i], 0.0, 1.0);
    out[i] = static_cast<uint8_t>(std::lround(x * 255.0));
  }
  return out;
}

Image from_u8(const std::vector<uint8_t>& bytes, int h, int w, int c) {
  Image img(h, w, c);
  if (bytes.size() != img.size()) fail("from_u8: byte count does not match image geometry");
  for (size_t i = 0; i < bytes.size(); ++i) img.v[i] = bytes[i] / 255.0;
  return img;
}

void quantize_u8_inplace(Image& img) {
  for (double& x : img.v) x = std::lround(std::clamp(x, 0.0, 1.0) * 255.0) / 255.0;
}

Tensor image_to_tensor(const Image& img) {
  std::vector<double> v(img.size());
  for (int ch = 0; ch < img.c; ++ch)
    for (int y = 0; y < img.h; ++y)
      for (int x = 0; x < img.w; ++x)
        v[(static_cast<size_t>(ch) * img.h + y) * img.w + x] = img.at(y, x, ch);
  return Tensor::from_vector({img.c, img.h, img.w}, std::move(v));
}

Image tensor_to_image(const Tensor& t) {
  if (t.ndim() != 3) fail("tensor_to_image: need [C,H,W], got " + shape_str(t.shape()));
  Image img(t.dim(1), t.dim(2), t.dim(0));
  for (int ch = 0; ch < img.c; ++ch)
    for (int y = 0; y < img.h; ++y)
      for (int x = 0; x < img.w; ++x) img.at(y, x, ch) = t.at({ch, y, x});
  return img;
}

namespace {

double cubic_kernel(double x) {
  // Catmull-Rom (a = -0.5)
  const double a = -0.5;
  x = std::fabs(x);
  if (x < 1.0) return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
  if (x < 2.0) return ((a * x - 5.0 * a) * x + 8.0 * a) * x - 4.0 * a;
  return 0.0;
}

}  // namespace

Image resize_bicubic(const Image& img, int out_h, int out_w) {
  Image out(out_h, out_w, img.c);
  const double sy = static_cast<double>(img.h) / out_h;
  const double sx = static_cast<double>(img.w) / out_w;
  for (int oy = 0; oy < out_h; ++oy) {
    const double fy = (oy + 0.5) * sy - 0.5;
    const int y0 = static_cast<int>(std::floor(fy));
    for (int ox = 0; ox < out_w; ++ox) {
      const double fx = (ox + 0.5) * sx - 0.5;
      const int x0 = static_cast<int>(std::floor(fx));
      for (int ch = 0; ch < img.c; ++ch) {
        double acc = 0.0, wsum = 0.0;
        for (int dy = -1; dy <= 2; ++dy)
          for (int dx = -1; dx <= 2; ++dx) {
            const int yy = std::clamp(y0 + dy, 0, img.h - 1);
            const int xx = std::clamp(x0 + dx, 0, img.w - 1);
            const double wgt = cubic_kernel(fy - (y0 + dy)) * cubic_kernel(fx - (x0 + dx));
            acc += wgt * img.at(yy, xx, ch);
            wsum += wgt;
          }
        out.at(oy, ox, ch) = acc / wsum;
      }
    }
  }
  return out;
}

// ------------------------------------------------------------------ PNG

namespace {

constexpr uint8_t kPngSig[8] = {137, 80, 78, 71, 13, 10, 26, 10};

void put_u32_be(std::vector<uint8_t>& out, uint32_t v) {
  out.push_back(static_cast<uint8_t>(v >> 24));
  out.push_back(static_cast<uint8_t>(v >> 16));
  out.push_back(static_cast<uint8_t>(v >> 8));
  out.push_back(static_cast<uint8_t>(v));
}

void write_chunk(std::vector<uint8_t>& out, const char type[4], const std::vector<uint8_t>& data) {
  put_u32_be(out, static_cast<uint32_t>(data.size()));
  std::vector<uint8_t> body(type, type + 4);
  body.insert(body.end(), data.begin(), data.end());
  out.insert(out.end(), body.begin(), body.end());
  put_u32_be(out, crc32(body.data(), body.size()));
}

uint32_t adler32(const uint8_t* data, size_t len) {
  uint32_t a = 1, b = 0;
  for (size_t i = 0; i < len; ++i) {
    a = (a + data[i]) % 65521;
    b = (b + a) % 65521;
  }
  return (b << 16) | a;
}

// zlib stream with stored deflate blocks; valid everywhere, no compression
std::vector<uint8_t> zlib_store(const std::vector<uint8_t>& raw) {
  std::vector<uint8_t> out = {0x78, 0x01};
  size_t pos = 0;
  do {
    const size_t n = std::min<size_t>(raw.size() - pos, 65535);
    const bool final = pos + n == raw.size();
    out.push_back(final ? 1 : 0);
    out.push_back(static_cast<uint8_t>(n & 0xFF));
    out.push_back(static_cast<uint8_t>(n >> 8));
    out.push_back(static_cast<uint8_t>(~n & 0xFF));
    out.push_back(static_cast<uint8_t>((~n >> 8) & 0xFF));
    out.insert(out.end(), raw.begin() + static_cast<long>(pos), raw.begin() + static_cast<long>(pos + n));
    pos += n;
  } while (pos < raw.size());
  put_u32_be(out, adler32(raw.data(), raw.size()));
  return out;
}

// ---- inflate (RFC 1951), enough for any valid single-image stream ----

struct BitReader {
  const uint8_t* data;
  size_t len;
  size_t pos = 0;
  int bit = 0;

  uint32_t bits(int n) {
    uint32_t v = 0;
    for (int i = 0; i < n; ++i) {
      if (pos >= len) fail("png: truncated deflate stream");
      v |= static_cast<uint32_t>((data[pos] >> bit) & 1) << i;
      if (++bit == 8) {
        bit = 0;
        ++pos;
      }
    }
    return v;
  }
  void align() {
    if (bit) {
      bit = 0;
      ++pos;
    }
  }
};

struct Huffman {
  // canonical code tables per RFC 1951 3.2.2
  std::vector<uint16_t> counts;   // per length
  std::vector<uint16_t> symbols;  // sorted by (length, symbol)

  void build(const std::vector<uint8_t>& lengths) {
    counts.assign(16, 0);
    for (uint8_t l : lengths) ++counts[l];
    counts[0] = 0;
    symbols.clear();
    for (int l = 1; l < 16; ++l)
      for (size_t s = 0; s < lengths.size(); ++s)
        if (lengths[s] == l) symbols.push_back(static_cast<uint16_t>(s));
  }

  int decode(BitReader& br) const {
    int code = 0, first = 0, index = 0;
    for (int l = 1; l < 16; ++l) {
      code |= static_cast<int>(br.bits(1));
      const int count = counts[static_cast<size_t>(l)];
      if (code - first < count) return symbols[static_cast<size_t>(index + (code - first))];
      index += count;
      first = (first + count) << 1;
      code <<= 1;
    }
    fail("png: invalid huffman code");
  }
};

std::vector<uint8_t> inflate(const uint8_t* data, size_t len) {
  static const int kLenBase[29] = {3,  4,  5,  6,  7,  8,  9,  10, 11,  13,  15,  17,  19, 23, 27,
                                   31, 35, 43, 51, 59, 67, 83, 99, 115, 131, 163, 195, 227, 258};
  static const int kLenExtra[29] = {0, 0, 0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 2, 2, 2,
                                    2, 3, 3, 3, 3, 4, 4, 4, 4, 5, 5, 5, 5, 0};
  static const int kDistBase[30] = {1,    2,    3,    4,    5,    7,     9,     13,   17,   25,
                                    33,   49,   65,   97,   129,  193,   257,   385,  513,  769,
                                    1025, 1537, 2049, 3073, 4097, 6145,  8193,  12289, 16385, 24577};
  static const int kDistExtra[30] = {0, 0, 0, 0, 1, 1, 2, 2,  3,  3,  4,  4,  5,  5,  6,
                                     6, 7, 7, 8, 8, 9, 9, 10, 10, 11, 11, 12, 12, 13, 13};

  BitReader br{data, len};
  std::vector<uint8_t> out;
  bool final = false;
  while (!final) {
    final = br.bits(1) != 0;
    const uint32_t btype = br.bits(2);
    if (btype == 0) {
      br.align();
      if (br.pos + 4 > br.len) fail("png: truncated stored block");
      const uint32_t n = data[br.pos] | (static_cast<uint32_t>(data[br.pos + 1]) << 8);
      const uint32_t nn = data[br.pos + 2] | (static_cast<uint32_t>(data[br.pos + 3]) << 8);
      if ((n ^ 0xFFFF) != nn) fail("png: stored block length check failed");
      br.pos += 4;
      if (br.pos + n > br.len) fail("png: truncated stored block payload");
      out.insert(out.end(), data + br.pos, data + br.pos + n);
      br.pos += n;
      continue;
    }
    Huffman lit, dist;
    if (btype == 1) {
      std::vector<uint8_t> ll(288);
      for (int i = 0; i < 144; ++i) ll[static_cast<size_t>(i)] = 8;
      for (int i = 144; i < 256; ++i) ll[static_cast<size_t>(i)] = 9;
      for (int i = 256; i < 280; ++i) ll[static_cast<size_t>(i)] = 7;
      for (int i = 280; i < 288; ++i) ll[static_cast<size_t>(i)] = 8;
      lit.build(ll);
      dist.build(std::vector<uint8_t>(30, 5));
    } else if (btype == 2) {
      const int hlit = static_cast<int>(br.bits(5)) + 257;
      const int hdist = static_cast<int>(br.bits(5)) + 1;
      const int hclen = static_cast<int>(br.bits(4)) + 4;
      static const int kOrder[19] = {16, 17, 18, 0, 8, 7, 9, 6, 10, 5, 11, 4, 12, 3, 13, 2, 14, 1, 15};
      std::vector<uint8_t> cl(19, 0);
      for (int i = 0; i < hclen; ++i) cl[static_cast<size_t>(kOrder[i])] = static_cast<uint8_t>(br.bits(3));
      Huffman clh;
      clh.build(cl);
      std::vector<uint8_t> lengths;
      lengths.reserve(static_cast<size_t>(hlit + hdist));
      while (static_cast<int>(lengths.size()) < hlit + hdist) {
        const int sym = clh.decode(br);
        if (sym < 16) {
          lengths.push_back(static_cast<uint8_t>(sym));
        } else if (sym == 16) {
          if (lengths.empty()) fail("png: bad code length repeat");
          const int rep = 3 + static_cast<int>(br.bits(2));
          lengths.insert(lengths.end(), static_cast<size_t>(rep), lengths.back());
        } else if (sym == 17) {
          lengths.insert(lengths.end(), 3 + br.bits(3), 0);
        } else {
          lengths.insert(lengths.end(), 11 + br.bits(7), 0);
        }
      }
      if (static_cast<int>(lengths.size()) != hlit + hdist) fail("png: code length overflow");
      lit.build({lengths.begin(), lengths.begin() + hlit});
      dist.build({lengths.begin() + hlit, lengths.end()});
    } else {
      fail("png: reserved deflate block type");
    }
    for (;;) {
      const int sym = lit.decode(br);
      if (sym < 256) {
        out.push_back(static_cast<uint8_t>(sym));
      } else if (sym == 256) {
        break;
      } else {
        const int li = sym - 257;
        if (li >= 29) fail("png: bad length symbol");
        const int length = kLenBase[li] + static_cast<int>(br.bits(kLenExtra[li]));
        const int di = dist.decode(br);
        if (di >= 30) fail("png: bad distance symbol");
        const size_t distance = static_cast<size_t>(kDistBase[di]) + br.bits(kDistExtra[di]);
        if (distance > out.size()) fail("png: distance beyond output");
        for (int i = 0; i < length; ++i) out.push_back(out[out.size() - distance]);
      }
    }
  }
  return out;
}

int paeth(int a, int b, int c) {
  const int p = a + b - c;
  const int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
  if (pa <= pb && pa <= pc) return a;
  if (pb <= pc) return b;
  return c;
}

}  // namespace

void write_png(const std::string& path, const Image& img) {
  if (img.c != 1 && img.c != 3) fail("write_png: only gray or RGB images supported");
  std::vector<uint8_t> ihdr;
  put_u32_be(ihdr, static_cast<uint32_t>(img.w));
  put_u32_be(ihdr, static_cast<uint32_t>(img.h));
  ihdr.push_back(8);                                   // bit depth
  ihdr.push_back(img.c == 3 ? 2 : 0);                  // color type
  ihdr.push_back(0);
  ihdr.push_back(0);
  ihdr.push_back(0);

  const std::vector<uint8_t> pix = to_u8(img);
  std::vector<uint8_t> raw;
  raw.reserve(static_cast<size_t>(img.h) * (1 + static_cast<size_t>(img.w) * img.c));
  const size_t stride = static_cast<size_t>(img.w) * img.c;
  for (int y = 0; y < img.h; ++y) {
    raw.push_back(0);  // filter: none
    raw.insert(raw.end(), pix.begin() + static_cast<long>(y * stride),
               pix.begin() + static_cast<long>((y + 1) * stride));
  }

  std::vector<uint8_t> out(kPngSig, kPngSig + 8);
  write_chunk(out, "IHDR", ihdr);
  write_chunk(out, "IDAT", zlib_store(raw));
  write_chunk(out, "IEND", {});

  std::ofstream f(path, std::ios::binary);
  if (!f) fail("write_png: cannot open '" + path + "'");
  f.write(reinterpret_cast<const char*>(out.data()), static_cast<long>(out.size()));
  if (!f) fail("write_png: write failed for '" + path + "'");
}

Image read_png(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail("read_png: cannot open '" + path + "'");
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kPngSig, 8) != 0)
    fail("read_png: '" + path + "' is not a PNG file");

  size_t pos = 8;
  int w = 0, h = 0, color = -1;
  std::vector<uint8_t> idat;
  auto u32 = [&bytes](size_t p) {
    return (static_cast<uint32_t>(bytes[p]) << 24) | (static_cast<uint32_t>(bytes[p + 1]) << 16) |
           (static_cast<uint32_t>(bytes[p + 2]) << 8) | bytes[p + 3];
  };
  while (pos + 8 <= bytes.size()) {
    const uint32_t len = u32(pos);
    if (pos + 12 + len > bytes.size()) fail("read_png: truncated chunk");
    const std::string type(bytes.begin() + static_cast<long>(pos + 4), bytes.begin() + static_cast<long>(pos + 8));
    const uint8_t* data = bytes.data() + pos + 8;
    if (type == "IHDR") {
      w = static_cast<int>(u32(pos + 8));
      h = static_cast<int>(u32(pos + 12));
      const int depth = data[8];
      color = data[9];
      const int interlace = data[12];
      if (depth != 8) fail("read_png: only 8-bit depth supported");
      if (interlace != 0) fail("read_png: interlaced PNG not supported");
      if (color != 0 && color != 2 && color != 6)
        fail("read_png: unsupported color type " + std::to_string(color));
    } else if (type == "IDAT") {
      idat.insert(idat.end(), data, data + len);
    } else if (type == "IEND") {
      break;
    }
    pos += 12 + len;
  }
  if (w <= 0 || h <= 0 || idat.size() < 2) fail("read_png: missing image data");

  const std::vector<uint8_t> raw = inflate(idat.data() + 2, idat.size() - 2);  // skip zlib header
  const int nch = color == 0 ? 1 : (color == 2 ? 3 : 4);
  const size_t stride = static_cast<size_t>(w) * nch;
  if (raw.size() != static_cast<size_t>(h) * (stride + 1)) fail("read_png: unexpected data size");

  std::vector<uint8_t> pix(static_cast<size_t>(h) * stride);
  for (int y = 0; y < h; ++y) {
    const uint8_t filter = raw[static_cast<size_t>(y) * (stride + 1)];
    const uint8_t* src = raw.data() + static_cast<size_t>(y) * (stride + 1) + 1;
    uint8_t* dst = pix.data() + static_cast<size_t>(y) * stride;
    const uint8_t* up = y > 0 ? pix.data() + static_cast<size_t>(y - 1) * stride : nullptr;
    for (size_t i = 0; i < stride; ++i) {
      const int a = i >= static_cast<size_t>(nch) ? dst[i - static_cast<size_t>(nch)] : 0;
      const int b = up ? up[i] : 0;
      const int c = (up && i >= static_cast<size_t>(nch)) ? up[i - static_cast<size_t>(nch)] : 0;
      int v = src[i];
      switch (filter) {
        case 0: break;
        case 1: v += a; break;
        case 2: v += b; break;
        case 3: v += (a + b) / 2; break;
        case 4: v += paeth(a, b, c); break;
        default: fail("read_png: unknown filter type " + std::to_string(filter));
      }
      dst[i] = static_cast<uint8_t>(v & 0xFF);
    }
  }

  const int out_c = nch == 4 ? 3 : nch;
  Image img(h, w, out_c);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int ch = 0; ch < out_c; ++ch)
        img.at(y, x, ch) = pix[(static_cast<size_t>(y) * w + x) * nch + ch] / 255.0;
  return img;
}

}  // namespace lemma
