// Copyright 2026 The mangasfx Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <random>

#include "doctest.h"
#include "mangasfx/error.hpp"
#include "mangasfx/glyphs.hpp"
#include "mangasfx/png_io.hpp"
#include "mangasfx/raster.hpp"
#include "test_util.hpp"

using namespace mangasfx;

namespace {

// Crossing-number test, written independently of the scanline kernel.
bool InsideOracle(const PolygonRegion& poly, double px, double py) {
  bool inside = false;
  const auto& v = poly.vertices;
  for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
    const bool straddles = (v[i].y > py) != (v[j].y > py);
    if (!straddles) continue;
    const double xi =
        v[i].x + (py - v[i].y) * (v[j].x - v[i].x) / (v[j].y - v[i].y);
    if (px < xi) inside = !inside;
  }
  return inside;
}

BinaryMask OracleRaster(const PolygonRegion& poly, int w, int h) {
  BinaryMask m(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) m.at(x, y) = InsideOracle(poly, x + 0.5, y + 0.5);
  }
  return m;
}

template <typename F>
ErrorKind KindOf(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected mangasfx::Error");
  return ErrorKind::kBackend;
}

}  // namespace

TEST_CASE("rasterize_polygon examples") {
  PolygonRegion full{{{0, 0}, {4, 0}, {4, 4}, {0, 4}}};
  CHECK(RasterizePolygon(full, 4, 4).count() == 16);

  PolygonRegion outside{{{10, 10}, {20, 10}, {20, 20}, {10, 20}}};
  CHECK(RasterizePolygon(outside, 4, 4).count() == 0);

  PolygonRegion tri{{{0, 0}, {8, 0}, {0, 8}}};
  CHECK(RasterizePolygon(tri, 8, 8) == OracleRaster(tri, 8, 8));
}

TEST_CASE("rasterize_polygon errors") {
  PolygonRegion two{{{0, 0}, {1, 1}}};
  CHECK(KindOf([&] { RasterizePolygon(two, 4, 4); }) ==
        ErrorKind::kDegeneratePolygon);
  PolygonRegion tri{{{0, 0}, {8, 0}, {0, 8}}};
  CHECK(KindOf([&] { RasterizePolygon(tri, 0, 4); }) == ErrorKind::kDimension);
}

TEST_CASE("rasterize_polygon agrees with point-in-polygon oracle") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> dim(1, 64);
  for (int i = 0; i < 100; ++i) {
    const int w = dim(rng), h = dim(rng);
    const auto poly = testing::RandomSimplePolygon(rng, w, h);
    const auto expected = OracleRaster(poly, w, h);
    CHECK(RasterizePolygon(poly, w, h, Exec::kSerial) == expected);
    CHECK(RasterizePolygon(poly, w, h, Exec::kParallel) == expected);
  }
}

TEST_CASE("binarize") {
  CHECK(Binarize(RasterImage(3, 2, 1, 255)).count() == 6);
  CHECK(Binarize(RasterImage(3, 2, 1, 0)).count() == 0);
  RasterImage img(4, 1, 1, std::vector<std::uint8_t>{0, 100, 128, 200});
  const auto m = Binarize(img, 128);
  CHECK(std::vector<std::uint8_t>(m.values().begin(), m.values().end()) ==
        std::vector<std::uint8_t>{0, 0, 1, 1});
  CHECK(KindOf([] { Binarize(RasterImage(2, 2, 3)); }) ==
        ErrorKind::kChannelMismatch);
}

TEST_CASE("binarize is monotone in threshold") {
  std::mt19937_64 rng(11);
  const auto img = testing::RandomImage(rng, 17, 13, 1);
  BinaryMask prev = Binarize(img, 0);
  for (int t = 1; t <= 255; ++t) {
    const BinaryMask cur = Binarize(img, static_cast<std::uint8_t>(t));
    for (std::size_t i = 0; i < cur.values().size(); ++i) {
      REQUIRE(cur.values()[i] <= prev.values()[i]);
    }
    prev = cur;
  }
}

TEST_CASE("luminance uses fixed coefficients") {
  RasterImage px(1, 1, 3, std::vector<std::uint8_t>{255, 0, 0});
  CHECK(ToLuminance(px).at(0, 0) == 76);  // round(76.245)
  RasterImage gray(1, 1, 3, std::vector<std::uint8_t>{90, 90, 90});
  CHECK(ToLuminance(gray).at(0, 0) == 90);
}

TEST_CASE("crop") {
  std::vector<std::uint8_t> grad(16);
  for (int i = 0; i < 16; ++i) grad[i] = static_cast<std::uint8_t>(i * 10);
  RasterImage img(4, 4, 1, grad);
  CHECK(Crop(img, {0, 0, 4, 4}) == img);
  CHECK(Crop(img, {0, 0, 1, 1}).at(0, 0) == 0);
  const auto c = Crop(img, {1, 2, 2, 2});
  // Index arithmetic: value(x, y) = (y * 4 + x) * 10.
  CHECK(c.at(0, 0) == 90);
  CHECK(c.at(1, 0) == 100);
  CHECK(c.at(0, 1) == 130);
  CHECK(c.at(1, 1) == 140);
  CHECK(KindOf([&] { Crop(img, {3, 3, 2, 2}); }) == ErrorKind::kBounds);
  CHECK(KindOf([&] { Crop(img, {0, 0, 0, 2}); }) == ErrorKind::kBounds);
}

TEST_CASE("resize and pad") {
  std::mt19937_64 rng(3);
  const auto img = testing::RandomImage(rng, 5, 7, 3);
  CHECK(Resize(img, 5, 7) == img);

  RasterImage small(2, 2, 1, std::vector<std::uint8_t>{1, 2, 3, 4});
  const auto padded = PadTo(small, 4, 4, 255);
  CHECK(padded.at(0, 0) == 1);
  CHECK(padded.at(1, 1) == 4);
  CHECK(padded.at(2, 0) == 255);
  CHECK(padded.at(3, 3) == 255);
  CHECK(KindOf([&] { PadTo(padded, 2, 2, 0); }) == ErrorKind::kDimension);

  RasterImage checker(2, 2, 1, std::vector<std::uint8_t>{0, 255, 255, 0});
  CHECK(Resize(checker, 1, 1).at(0, 0) == 128);  // mean 127.5 rounds up
}

TEST_CASE("resize upscale is bilinear and stays in range") {
  RasterImage ramp(2, 1, 1, std::vector<std::uint8_t>{0, 200});
  const auto up = Resize(ramp, 4, 1);
  // Source positions -0.25, 0.25, 0.75, 1.25 clamp to [0, 1].
  CHECK(up.at(0, 0) == 0);
  CHECK(up.at(1, 0) == 50);
  CHECK(up.at(2, 0) == 150);
  CHECK(up.at(3, 0) == 200);
}

TEST_CASE("crop of pad is identity") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> dim(1, 20);
  std::uniform_int_distribution<int> extra(0, 10);
  for (int i = 0; i < 200; ++i) {
    const int w = dim(rng), h = dim(rng);
    const int ch = std::array{1, 3, 4}[i % 3];
    const auto img = testing::RandomImage(rng, w, h, ch);
    const auto padded = PadTo(img, w + extra(rng), h + extra(rng), 17);
    REQUIRE(Crop(padded, {0, 0, w, h}) == img);
  }
}

TEST_CASE("dilation serial and parallel agree") {
  std::mt19937_64 rng(9);
  for (int i = 0; i < 30; ++i) {
    const auto m = testing::RandomMask(rng, 1 + i, 40 - i, 0.05);
    for (int r : {1, 2, 3}) {
      CHECK(Dilate(m, r, Exec::kSerial) == Dilate(m, r, Exec::kParallel));
    }
  }
}

TEST_CASE("polygon outline matches nearest-pixel line oracle") {
  // Edges with slopes 0, 1 and 1/3 have no rounding ties.
  PolygonRegion poly{{{1, 1}, {10, 1}, {10, 4}, {1, 7}}};
  BinaryMask expected(12, 9);
  auto line = [&](int x0, int y0, int x1, int y1) {
    const int steps = std::max(std::abs(x1 - x0), std::abs(y1 - y0));
    for (int s = 0; s <= steps; ++s) {
      const double t = steps ? double(s) / steps : 0.0;
      const int x = static_cast<int>(std::floor(x0 + t * (x1 - x0) + 0.5));
      const int y = static_cast<int>(std::floor(y0 + t * (y1 - y0) + 0.5));
      expected.at(x, y) = 1;
    }
  };
  line(1, 1, 10, 1);
  line(10, 1, 10, 4);
  line(10, 4, 1, 7);
  line(1, 7, 1, 1);
  CHECK(PolygonOutline(poly, 12, 9) == expected);
}

TEST_CASE("png round trip") {
  std::mt19937_64 rng(1);
  const auto dir = testing::ScratchDir("png");
  for (int ch : {1, 3, 4}) {
    const auto img = testing::RandomImage(rng, 9, 5, ch);
    WritePng(dir / "a.png", img);
    CHECK(ReadPng(dir / "a.png") == img);
    CHECK(DecodePng(EncodePng(img)) == img);
  }
  const auto m = testing::RandomMask(rng, 6, 6, 0.5);
  WriteMaskPng(dir / "m.png", m);
  CHECK(ReadMaskPng(dir / "m.png") == m);
  const auto raw = ReadPng(dir / "m.png");
  for (auto v : raw.pixels()) CHECK((v == 0 || v == 255));
}

TEST_CASE("render_plain_text") {
  PolygonRegion empty{{{5, 5}, {5, 5}, {5, 5}}};
  CHECK(KindOf([&] { RenderPlainText("A", empty, 32, 32); }) ==
        ErrorKind::kDegeneratePolygon);

  PolygonRegion square{{{8, 8}, {40, 8}, {40, 40}, {8, 40}}};
  const auto r = RenderPlainText("O", square, 48, 48);
  CHECK(r.warnings.empty());
  BinaryMask ink(48, 48);
  for (int y = 0; y < 48; ++y) {
    for (int x = 0; x < 48; ++x) ink.at(x, y) = r.image.at(x, y, 0) < 255;
  }
  const Box b = MaskBoundingBox(ink);
  CHECK(std::abs((b.x + b.width / 2.0) - 24.0) <= 1.0);
  CHECK(std::abs((b.y + b.height / 2.0) - 24.0) <= 1.0);
  CHECK(RenderPlainText("O", square, 48, 48).image == r.image);

  const auto sub = RenderPlainText("\xE3\x83\x89", square, 48, 48);  // U+30C9
  CHECK(sub.warnings.size() == 1);
}
