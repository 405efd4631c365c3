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
#include "mangasfx/compositor.hpp"
#include "mangasfx/error.hpp"
#include "mangasfx/mask_to_rgba.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace mangasfx;

namespace {

BinaryMask AlphaSupport(const RasterImage& layer) {
  BinaryMask m(layer.width(), layer.height());
  for (int y = 0; y < layer.height(); ++y)
    for (int x = 0; x < layer.width(); ++x) m.at(x, y) = layer.at(x, y, 3) > 0;
  return m;
}

class FixedConverter : public ConverterBackend {
 public:
  explicit FixedConverter(RasterImage out) : out_(std::move(out)) {}
  RasterImage Convert(const BinaryMask&, const std::string&) override {
    return out_;
  }
  std::string Identity() const override { return "fixed"; }

 private:
  RasterImage out_;
};

class LeakyInpainter : public InpainterBackend {
 public:
  RasterImage Inpaint(const RasterImage& image, const BinaryMask&) override {
    RasterImage out = image;
    out.at(0, 0, 0) ^= 1;
    return out;
  }
  std::string Identity() const override { return "leaky"; }
};

}  // namespace

TEST_CASE("convert_reference examples") {
  BinaryMask one(5, 5);
  one.at(2, 2) = 1;
  ConverterStyle style;
  style.fill = {10, 20, 30};
  style.outline_px = 0;
  const auto layer = ConvertReference(one, style);
  CHECK(AlphaSupport(layer).count() == 1);
  CHECK(layer.at(2, 2, 0) == 10);
  CHECK(layer.at(2, 2, 2) == 30);
  CHECK(layer.at(2, 2, 3) == 255);

  CHECK_THROWS_AS(ConvertReference(BinaryMask(4, 4)), Error);

  BinaryMask square(8, 8);
  for (int y = 3; y < 6; ++y)
    for (int x = 3; x < 6; ++x) square.at(x, y) = 1;
  style.outline_px = 1;
  const auto s = AlphaSupport(ConvertReference(square, style));
  CHECK(s.count() == 25);
  CHECK(s.at(2, 2));
  CHECK(s.at(6, 6));
  CHECK_FALSE(s.at(7, 7));

  BinaryMask corner(4, 4);
  corner.at(0, 0) = 1;
  CHECK(AlphaSupport(ConvertReference(corner, style)).count() == 4);
}

TEST_CASE("reference converter support equals dilation") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> dim(1, 64), rad(0, 4);
  for (int i = 0; i < 200; ++i) {
    auto m = testing::RandomMask(rng, dim(rng), dim(rng), 0.05);
    m.at(0, 0) = 1;
    ConverterStyle style;
    style.outline_px = rad(rng);
    const auto layer = ConvertReference(m, style, i % 2 ? Exec::kSerial : Exec::kParallel);
    REQUIRE(AlphaSupport(layer) == oracle::Dilate(m, style.outline_px));
    for (int y = 0; y < m.height(); ++y)
      for (int x = 0; x < m.width(); ++x)
        if (layer.at(x, y, 3)) {
          const Rgb& want = m.at(x, y) ? style.fill : style.outline;
          REQUIRE(layer.at(x, y, 0) == want[0]);
        }
  }
}

TEST_CASE("convert validates backend output") {
  BinaryMask m(16, 16);
  m.at(8, 8) = 1;
  ReferenceConverter ref;
  const auto r = Convert(m, kDefaultConverterPrompt, ref);
  CHECK(r.layer == ConvertReference(m));
  CHECK(r.warnings.empty());

  FixedConverter wrong(RasterImage(8, 8, 4, 0));
  try {
    Convert(m, "", wrong);
    FAIL("expected contract error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kBackendContract);
  }
  FixedConverter rgb(RasterImage(16, 16, 3, 0));
  CHECK_THROWS_AS(Convert(m, "", rgb), Error);

  RasterImage far(16, 16, 4, 0);
  far.at(0, 0, 3) = 255;
  FixedConverter spill(far);
  CHECK(Convert(m, "", spill, 7).warnings.size() == 1);
  CHECK(Convert(m, "", spill, 8).warnings.empty());
}

TEST_CASE("inpaint_reference examples") {
  std::mt19937_64 rng(12);
  const auto img = testing::RandomImage(rng, 9, 7, 3);
  CHECK(InpaintReference(img, BinaryMask(9, 7)) == img);

  const RasterImage gray(20, 20, 3, 77);
  const auto hole = testing::RandomMask(rng, 20, 20, 0.7);
  CHECK(InpaintReference(gray, hole) == gray);

  RasterImage cross(3, 3, 1, 0);
  cross.at(1, 0, 0) = 10;
  cross.at(0, 1, 0) = 20;
  cross.at(2, 1, 0) = 30;
  cross.at(1, 2, 0) = 40;
  BinaryMask center(3, 3);
  center.at(1, 1) = 1;
  CHECK(InpaintReference(cross, center).at(1, 1, 0) == 25);

  BinaryMask all(3, 3);
  for (auto& v : all.values()) v = 1;
  try {
    InpaintReference(cross, all);
    FAIL("expected degenerate hole");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kDegenerateHole);
  }
  CHECK_THROWS_AS(InpaintReference(cross, BinaryMask(4, 3)), Error);
}

TEST_CASE("inpaint preserves pixels outside the hole") {
  std::mt19937_64 rng(13);
  std::uniform_int_distribution<int> dim(2, 40);
  ReferenceInpainter ref;
  for (int i = 0; i < 100; ++i) {
    const int w = dim(rng), h = dim(rng);
    const auto img = testing::RandomImage(rng, w, h, 3);
    auto hole = testing::RandomMask(rng, w, h, 0.5);
    hole.at(0, 0) = 0;
    const auto out = Inpaint(ref, img, hole);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        if (!hole.at(x, y))
          for (int c = 0; c < 3; ++c) REQUIRE(out.at(x, y, c) == img.at(x, y, c));
  }
  LeakyInpainter leaky;
  BinaryMask hole(4, 4);
  hole.at(2, 2) = 1;
  CHECK_THROWS_AS(Inpaint(leaky, RasterImage(4, 4, 3, 0), hole), Error);
}

TEST_CASE("serial and parallel harmonic fill agree") {
  std::mt19937_64 rng(14);
  const auto img = testing::RandomImage(rng, 30, 25, 3);
  const auto hole = testing::RandomMask(rng, 30, 25, 0.6);
  HarmonicFillConfig s, p;
  s.exec = Exec::kSerial;
  CHECK(InpaintReference(img, hole, s) == InpaintReference(img, hole, p));
}

TEST_CASE("alpha_over") {
  std::mt19937_64 rng(15);
  const auto bg = testing::RandomImage(rng, 12, 10, 3);
  RasterImage clear(5, 5, 4, 0);
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 5; ++x)
      for (int c = 0; c < 3; ++c) clear.at(x, y, c) = 200;
  CHECK(AlphaOver(bg, clear, 3, 2) == bg);

  RasterImage opaque = testing::RandomImage(rng, 5, 5, 4);
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 5; ++x) opaque.at(x, y, 3) = 255;
  const auto covered = AlphaOver(bg, opaque, 3, 2);
  for (int y = 0; y < 10; ++y)
    for (int x = 0; x < 12; ++x)
      for (int c = 0; c < 3; ++c) {
        const bool inside = x >= 3 && x < 8 && y >= 2 && y < 7;
        CHECK(covered.at(x, y, c) ==
              (inside ? opaque.at(x - 3, y - 2, c) : bg.at(x, y, c)));
      }

  RasterImage one(1, 1, 3, 100);
  RasterImage px(1, 1, 4, 200);
  px.at(0, 0, 3) = 128;
  CHECK(AlphaOver(one, px, 0, 0).at(0, 0, 0) == 150);

  // Clipped placements.
  CHECK_NOTHROW(AlphaOver(bg, opaque, -3, 8));
  CHECK(AlphaOver(bg, opaque, 20, 20) == bg);
  CHECK(AlphaOver(bg, opaque, -2, -2).at(0, 0, 1) == opaque.at(2, 2, 1));

  CHECK_THROWS_AS(AlphaOver(RasterImage(4, 4, 4), opaque, 0, 0), Error);
  CHECK_THROWS_AS(AlphaOver(bg, RasterImage(4, 4, 3), 0, 0), Error);
}

TEST_CASE("alpha_over is monotone in alpha when fg >= bg") {
  for (int bgv = 0; bgv < 256; bgv += 15) {
    for (int fgv = bgv; fgv < 256; fgv += 17) {
      int prev = -1;
      for (int a = 0; a < 256; ++a) {
        RasterImage bg(1, 1, 3, static_cast<std::uint8_t>(bgv));
        RasterImage fg(1, 1, 4, static_cast<std::uint8_t>(fgv));
        fg.at(0, 0, 3) = static_cast<std::uint8_t>(a);
        const int v = AlphaOver(bg, fg, 0, 0).at(0, 0, 0);
        REQUIRE(v >= prev);
        prev = v;
      }
      REQUIRE(prev == fgv);
    }
  }
}

TEST_CASE("serial and parallel alpha_over agree") {
  std::mt19937_64 rng(16);
  for (int i = 0; i < 20; ++i) {
    const auto bg = testing::RandomImage(rng, 33, 21, 3);
    const auto layer = testing::RandomImage(rng, 17, 19, 4);
    CHECK(AlphaOver(bg, layer, i - 10, 5 - i, Exec::kSerial) ==
          AlphaOver(bg, layer, i - 10, 5 - i, Exec::kParallel));
  }
}

TEST_CASE("compose_final") {
  std::mt19937_64 rng(17);
  const auto y = testing::RandomImage(rng, 24, 24, 3);
  PolygonRegion poly{{{6, 6}, {18, 7}, {16, 17}, {5, 15}}};
  ReferenceInpainter ref;

  const auto clear = ComposeFinal(y, poly, RasterImage(24, 24, 4, 0), ref);
  CHECK(clear.final_image == clear.inpainted);
  for (int yy = 0; yy < 24; ++yy)
    for (int x = 0; x < 24; ++x)
      if (!clear.hole.at(x, yy))
        for (int c = 0; c < 3; ++c) CHECK(clear.final_image.at(x, yy, c) == y.at(x, yy, c));

  // Opaque layer over exactly the hole.
  RasterImage layer(24, 24, 4, 0);
  for (int yy = 0; yy < 24; ++yy)
    for (int x = 0; x < 24; ++x)
      if (clear.hole.at(x, yy)) {
        layer.at(x, yy, 0) = 9;
        layer.at(x, yy, 3) = 255;
      }
  const auto opaque = ComposeFinal(y, poly, layer, ref);
  for (int yy = 0; yy < 24; ++yy)
    for (int x = 0; x < 24; ++x)
      if (opaque.hole.at(x, yy)) {
        CHECK(opaque.final_image.at(x, yy, 0) == 9);
        CHECK(opaque.final_image.at(x, yy, 1) == 0);
      }

  const auto again = ComposeFinal(y, poly, layer, ref);
  CHECK(again.final_image == opaque.final_image);

  RasterImage small(3, 3, 4, 255);
  const auto placed = ComposeFinal(y, poly, small, ref);
  CHECK(placed.offset_x == 5);
  CHECK(placed.offset_y == 6);
  CHECK(placed.final_image.at(5, 6, 0) == 255);

  PolygonRegion line{{{1, 1}, {5, 1}, {9, 1}}};
  CHECK_THROWS_AS(ComposeFinal(y, line, small, ref), Error);
}
