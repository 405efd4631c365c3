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

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "mangasfx/raster.hpp"

namespace mangasfx {

// Built-in upright glyph source: printable ASCII from an embedded
// anti-aliased bitmap font. Other code points render as a hollow box.
class GlyphAtlas {
 public:
  static const GlyphAtlas& Default();

  int cell_height() const;
  bool Covers(char32_t cp) const;
  // Single-channel coverage bitmap (0 = no ink, 255 = full ink).
  RasterImage Coverage(char32_t cp) const;
  // Printable code points the atlas covers, in ascending order.
  std::vector<char32_t> CoveredCodepoints() const;

 private:
  GlyphAtlas() = default;
};

struct RenderedLine {
  RasterImage coverage;            // 1 channel, ink = 255
  std::vector<char32_t> missing;   // code points replaced by the box glyph
};

// Lays the code points out on one baseline at atlas resolution.
RenderedLine RenderLine(std::u32string_view text,
                        const GlyphAtlas& atlas = GlyphAtlas::Default());

struct PlainTextRender {
  RasterImage image;  // RGB, white background, black glyphs
  std::vector<std::string> warnings;
};

// Renders `text_utf8` upright, ink bounding box scaled to fit and centered in
// the polygon's bounding box on a width x height white canvas.
// Throws kDegeneratePolygon when the clipped bounding box has no area.
PlainTextRender RenderPlainText(std::string_view text_utf8,
                                const PolygonRegion& polygon, int width,
                                int height);

}  // namespace mangasfx
