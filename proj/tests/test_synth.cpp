#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>

#include "lemma/rng.hpp"
#include "lemma/synth.hpp"

using namespace lemma;

TEST_CASE("render: same seed twice gives byte-identical output") {
  Image a, b;
  Label la, lb;
  std::vector<CharBox> ba, bb;
  render_sample(1234, {}, a, la, ba);
  render_sample(1234, {}, b, lb, bb);
  CHECK(to_u8(a) == to_u8(b));
  CHECK(la.text == lb.text);
  CHECK(ba == bb);
}

TEST_CASE("render: forced single-character label produces exactly one box") {
  Image hr;
  Label label;
  std::vector<CharBox> boxes;
  render_sample(55, {}, hr, label, boxes, "a");
  CHECK(label.text == "a");
  CHECK(boxes.size() == 1);
}

TEST_CASE("render: box invariants hold across seeds") {
  for (uint64_t seed = 0; seed < 200; ++seed) {
    Image hr;
    Label label;
    std::vector<CharBox> boxes;
    render_sample(seed, {}, hr, label, boxes);
    REQUIRE(boxes.size() == label.text.size());
    for (size_t i = 0; i < boxes.size(); ++i) {
      const CharBox& b = boxes[i];
      CHECK(b.x0 < b.x1);
      CHECK(b.y0 < b.y1);
      CHECK(b.x1 <= 128);
      CHECK(b.y1 <= 32);
      if (i > 0) {
        const CharBox& prev = boxes[i - 1];
        CHECK(prev.x0 <= b.x0);  // left-to-right
        // pairwise horizontal overlap at most 30% of the narrower box
        const int overlap = std::max(0, static_cast<int>(prev.x1) - static_cast<int>(b.x0));
        const int narrow = std::min(prev.x1 - prev.x0, b.x1 - b.x0);
        CHECK(overlap <= 0.3 * narrow);
      }
      // mapped to LR/feature coordinates the box stays non-empty
      CHECK(b.x1 / 2 > b.x0 / 2);
      CHECK(b.y1 / 2 > b.y0 / 2);
    }
  }
}

TEST_CASE("render: label length histogram is uniform on 3..10 (chi-squared)") {
  std::array<int, 11> hist{};
  const int n = 1000;
  for (uint64_t seed = 0; seed < n; ++seed) {
    Image hr;
    Label label;
    std::vector<CharBox> boxes;
    render_sample(seed + 50000, {}, hr, label, boxes);
    REQUIRE(label.text.size() >= 3);
    REQUIRE(label.text.size() <= 10);
    ++hist[label.text.size()];
  }
  const double expect = n / 8.0;
  double stat = 0.0;
  for (int len = 3; len <= 10; ++len) {
    const double d = hist[static_cast<size_t>(len)] - expect;
    stat += d * d / expect;
  }
  // chi-squared critical value, df=7, p=0.01
  CHECK(stat < 18.475);
}

TEST_CASE("degrade: zero blur and zero noise reduce to the 2x2 block mean") {
  Image hr;
  Label label;
  std::vector<CharBox> boxes;
  render_sample(7, {}, hr, label, boxes);
  DegradeParams p{0.0, 0.0};
  Image lr = degrade(hr, p, 99);
  REQUIRE(lr.h == 16);
  REQUIRE(lr.w == 64);
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 64; ++x)
      for (int c = 0; c < 3; ++c) {
        const double mean = 0.25 * (hr.at(2 * y, 2 * x, c) + hr.at(2 * y, 2 * x + 1, c) +
                                    hr.at(2 * y + 1, 2 * x, c) + hr.at(2 * y + 1, 2 * x + 1, c));
        const double quant = std::lround(std::clamp(mean, 0.0, 1.0) * 255.0) / 255.0;
        CHECK(lr.at(y, x, c) == quant);
      }
}

TEST_CASE("degrade: without noise the seed has no effect") {
  Image hr;
  Label label;
  std::vector<CharBox> boxes;
  render_sample(8, {}, hr, label, boxes);
  DegradeParams p{1.3, 0.0};
  CHECK(to_u8(degrade(hr, p, 1)) == to_u8(degrade(hr, p, 2)));
}

TEST_CASE("degrade: full pipeline matches a step-by-step oracle") {
  Image hr;
  Label label;
  std::vector<CharBox> boxes;
  render_sample(9, {}, hr, label, boxes);
  DegradeParams p{1.7, 5.0 / 255.0};
  Image got = degrade(hr, p, 77);

  // oracle: blur (explicit separable kernel, clamped borders), block mean,
  // then the identical noise stream
  const int radius = static_cast<int>(std::ceil(2.0 * p.blur_sigma));
  std::vector<double> k(static_cast<size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[static_cast<size_t>(i + radius)] = std::exp(-0.5 * i * i / (p.blur_sigma * p.blur_sigma));
    sum += k[static_cast<size_t>(i + radius)];
  }
  for (double& e : k) e /= sum;
  Image hblur(32, 128, 3), blur(32, 128, 3);
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 128; ++x)
      for (int c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (int i = -radius; i <= radius; ++i)
          acc += k[static_cast<size_t>(i + radius)] * hr.at(y, std::clamp(x + i, 0, 127), c);
        hblur.at(y, x, c) = acc;
      }
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 128; ++x)
      for (int c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (int i = -radius; i <= radius; ++i)
          acc += k[static_cast<size_t>(i + radius)] * hblur.at(std::clamp(y + i, 0, 31), x, c);
        blur.at(y, x, c) = acc;
      }
  Image expect(16, 64, 3);
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 64; ++x)
      for (int c = 0; c < 3; ++c)
        expect.at(y, x, c) = 0.25 * (blur.at(2 * y, 2 * x, c) + blur.at(2 * y, 2 * x + 1, c) +
                                     blur.at(2 * y + 1, 2 * x, c) + blur.at(2 * y + 1, 2 * x + 1, c));
  Rng rng(Rng::mix(77, 1));  // degrade noise stream
  for (double& v : expect.v) v += p.noise_sigma * rng.normal();
  for (double& v : expect.v) v = std::clamp(v, 0.0, 1.0);
  quantize_u8_inplace(expect);
  CHECK(to_u8(got) == to_u8(expect));
}

TEST_CASE("make_sample: deterministic and pure per seed") {
  SamplePair a = make_sample(4242);
  SamplePair b = make_sample(4242);
  CHECK(to_u8(a.hr) == to_u8(b.hr));
  CHECK(to_u8(a.lr) == to_u8(b.lr));
  CHECK(a.label.text == b.label.text);
}
