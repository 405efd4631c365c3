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

#include "mangasfx/mask_to_rgba.hpp"

#include "mangasfx/error.hpp"

namespace mangasfx {

nlohmann::json ConverterStyle::ToJson() const {
  return {{"fill", fill}, {"outline", outline}, {"outline_px", outline_px}};
}

ConverterStyle ConverterStyle::FromJson(const nlohmann::json& j) {
  ConverterStyle s;
  s.fill = j.value("fill", s.fill);
  s.outline = j.value("outline", s.outline);
  s.outline_px = j.value("outline_px", s.outline_px);
  if (s.outline_px < 0) {
    throw Error(ErrorKind::kConfig, "outline_px must be non-negative");
  }
  return s;
}

RasterImage ConvertReference(const BinaryMask& mask,
                             const ConverterStyle& style, Exec exec) {
  if (mask.count() == 0) {
    throw Error(ErrorKind::kEmptyMask, "cannot stylize an empty mask");
  }
  const BinaryMask support = Dilate(mask, style.outline_px, exec);
  RasterImage out(mask.width(), mask.height(), 4, 0);
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (!support.at(x, y)) continue;
      const Rgb& color = mask.at(x, y) ? style.fill : style.outline;
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = color[c];
      out.at(x, y, 3) = 255;
    }
  }
  return out;
}

ConvertResult Convert(const BinaryMask& mask, const std::string& prompt,
                      ConverterBackend& backend, int tolerance_px) {
  ConvertResult result{backend.Convert(mask, prompt), {}};
  const RasterImage& layer = result.layer;
  if (layer.channels() != 4 || layer.width() != mask.width() ||
      layer.height() != mask.height()) {
    throw Error(ErrorKind::kBackendContract,
                backend.Identity() + " returned " +
                    std::to_string(layer.width()) + "x" +
                    std::to_string(layer.height()) + "x" +
                    std::to_string(layer.channels()) + " for a " +
                    std::to_string(mask.width()) + "x" +
                    std::to_string(mask.height()) + " mask");
  }
  const BinaryMask allowed = Dilate(mask, tolerance_px);
  long outside = 0;
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (layer.at(x, y, 3) > 0 && !allowed.at(x, y)) ++outside;
    }
  }
  if (outside > 0) {
    result.warnings.push_back(
        std::to_string(outside) + " opaque pixels lie more than " +
        std::to_string(tolerance_px) + "px from the mask");
  }
  return result;
}

}  // namespace mangasfx
