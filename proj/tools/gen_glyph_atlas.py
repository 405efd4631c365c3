#!/usr/bin/env python3
# Copyright 2026 The mangasfx Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

# Regenerates src/glyph_atlas.inc from a TrueType font.
#
#   python3 tools/gen_glyph_atlas.py /usr/share/fonts/truetype/dejavu/DejaVuSans-Bold.ttf > src/glyph_atlas.inc
import sys

LICENSE_HEADER = """// Copyright 2026 The mangasfx Authors. All Rights Reserved.
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

"""

from PIL import Image, ImageDraw, ImageFont

CELL_HEIGHT = 24
FONT_SIZE = 20


def main():
    font = ImageFont.truetype(sys.argv[1], FONT_SIZE)
    ascent, descent = font.getmetrics()
    top = (CELL_HEIGHT - (ascent + descent)) // 2
    out = sys.stdout
    out.write(LICENSE_HEADER)
    out.write("// Generated by tools/gen_glyph_atlas.py. Do not edit.\n")
    out.write(f"// Source font: {sys.argv[1].rsplit('/', 1)[-1]}, {FONT_SIZE}px.\n\n")
    out.write(f"constexpr int kAtlasCellHeight = {CELL_HEIGHT};\n\n")
    entries = []
    for cp in range(32, 127):
        ch = chr(cp)
        advance = max(1, int(round(font.getlength(ch))))
        img = Image.new("L", (advance, CELL_HEIGHT), 0)
        ImageDraw.Draw(img).text((0, top), ch, font=font, fill=255)
        data = list(img.getdata())
        name = f"kGlyph{cp}"
        out.write(f"constexpr std::uint8_t {name}[] = {{")
        for i, v in enumerate(data):
            if i % 24 == 0:
                out.write("\n    ")
            out.write(f"{v},")
        out.write("\n};\n")
        entries.append((cp, advance, name))
    out.write("\nconstexpr AtlasGlyph kAtlasGlyphs[] = {\n")
    for cp, advance, name in entries:
        out.write(f"    {{{cp}, {advance}, {name}}},\n")
    out.write("};\n")


if __name__ == "__main__":
    main()
