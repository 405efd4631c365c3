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

#include "mangasfx/glyphs.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>

#include "mangasfx/error.hpp"
#include "mangasfx/text.hpp"

namespace mangasfx {

namespace {

struct AtlasGlyph {
  int codepoint;
  int advance;
  const std::uint8_t* coverage;
};

#include "glyph_atlas.inc"

constexpr int kBoxAdvance = 12;

const AtlasGlyph* Find(char32_t cp) {
  for (const AtlasGlyph& g : kAtlasGlyphs) {
    if (static_cast<char32_t>(g.codepoint) == cp) return &g;
  }
  return nullptr;
}

RasterImage BoxGlyph() {
  RasterImage img(kBoxAdvance, kAtlasCellHeight, 1, 0);
  const int x0 = 1, x1 = kBoxAdvance - 2, y0 = 4, y1 = kAtlasCellHeight - 5;
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const bool border = x - x0 < 2 || x1 - x < 2 || y - y0 < 2 || y1 - y < 2;
      if (border) img.at(x, y) = 255;
    }
  }
  return img;
}

}  // namespace

const GlyphAtlas& GlyphAtlas::Default() {
  static const GlyphAtlas atlas;
  return atlas;
}

int GlyphAtlas::cell_height() const { return kAtlasCellHeight; }

bool GlyphAtlas::Covers(char32_t cp) const { return Find(cp) != nullptr; }

RasterImage GlyphAtlas::Coverage(char32_t cp) const {
  const AtlasGlyph* g = Find(cp);
  if (!g) return BoxGlyph();
  const std::size_t n = static_cast<std::size_t>(g->advance) * kAtlasCellHeight;
  return RasterImage(g->advance, kAtlasCellHeight, 1,
                     std::vector<std::uint8_t>(g->coverage, g->coverage + n));
}

std::vector<char32_t> GlyphAtlas::CoveredCodepoints() const {
  std::vector<char32_t> out;
  for (const AtlasGlyph& g : kAtlasGlyphs) {
    out.push_back(static_cast<char32_t>(g.codepoint));
  }
  return out;
}

RenderedLine RenderLine(std::u32string_view text, const GlyphAtlas& atlas) {
  RenderedLine line;
  std::vector<RasterImage> glyphs;
  int width = 0;
  for (const char32_t cp : text) {
    if (!atlas.Covers(cp)) line.missing.push_back(cp);
    glyphs.push_back(atlas.Coverage(cp));
    width += glyphs.back().width();
  }
  line.coverage = RasterImage(std::max(1, width), atlas.cell_height(), 1, 0);
  int x = 0;
  for (const RasterImage& g : glyphs) {
    for (int y = 0; y < g.height(); ++y) {
      for (int gx = 0; gx < g.width(); ++gx) {
        line.coverage.at(x + gx, y) =
            std::max(line.coverage.at(x + gx, y), g.at(gx, y));
      }
    }
    x += g.width();
  }
  return line;
}

PlainTextRender RenderPlainText(std::string_view text_utf8,
                                const PolygonRegion& polygon, int width,
                                int height) {
  PlainTextRender result;
  result.image = RasterImage(width, height, 3, 255);

  const Box raw = polygon.BoundingBox();
  const int bx0 = std::max(0, raw.x);
  const int by0 = std::max(0, raw.y);
  const int bx1 = std::min(width, raw.right());
  const int by1 = std::min(height, raw.bottom());
  if (bx1 <= bx0 || by1 <= by0) {
    throw Error(ErrorKind::kDegeneratePolygon,
                "text region has no area on the canvas");
  }
  const Box region{bx0, by0, bx1 - bx0, by1 - by0};

  const RenderedLine line = RenderLine(DecodeUtf8(text_utf8));
  for (const char32_t cp : line.missing) {
    std::ostringstream os;
    os << "no glyph for U+" << std::hex << std::uppercase
       << static_cast<std::uint32_t>(cp) << ", substituted box";
    result.warnings.push_back(os.str());
  }

  BinaryMask ink(line.coverage.width(), line.coverage.height());
  for (int y = 0; y < ink.height(); ++y) {
    for (int x = 0; x < ink.width(); ++x) {
      ink.at(x, y) = line.coverage.at(x, y) > 0;
    }
  }
  const Box ink_box = MaskBoundingBox(ink);
  if (ink_box.empty()) {
    result.warnings.push_back("text has no visible glyphs");
    return result;
  }

  const RasterImage glyphs = Crop(line.coverage, ink_box);
  const double scale =
      std::min(static_cast<double>(region.width) / glyphs.width(),
               static_cast<double>(region.height) / glyphs.height());
  const int tw = std::clamp(
      static_cast<int>(std::floor(glyphs.width() * scale + 0.5)), 1,
      region.width);
  const int th = std::clamp(
      static_cast<int>(std::floor(glyphs.height() * scale + 0.5)), 1,
      region.height);
  const RasterImage scaled = Resize(glyphs, tw, th);
  const int ox = region.x + (region.width - tw) / 2;
  const int oy = region.y + (region.height - th) / 2;
  for (int y = 0; y < th; ++y) {
    for (int x = 0; x < tw; ++x) {
      const std::uint8_t v = static_cast<std::uint8_t>(255 - scaled.at(x, y));
      for (int c = 0; c < 3; ++c) result.image.at(ox + x, oy + y, c) = v;
    }
  }
  return result;
}

}  // namespace mangasfx
