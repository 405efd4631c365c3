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

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "mangasfx/raster.hpp"

namespace mangasfx {

inline constexpr char kDefaultConverterPrompt[] =
    "black manga onomatopoeia lettering with white outline, transparent "
    "background";

using Rgb = std::array<std::uint8_t, 3>;

struct ConverterStyle {
  Rgb fill{0, 0, 0};
  Rgb outline{255, 255, 255};
  int outline_px = 2;

  nlohmann::json ToJson() const;
  static ConverterStyle FromJson(const nlohmann::json& j);
};

// Turns a binary mask into a 4-channel layer of the same size.
class ConverterBackend {
 public:
  virtual ~ConverterBackend() = default;
  virtual RasterImage Convert(const BinaryMask& mask,
                              const std::string& prompt) = 0;
  virtual std::string Identity() const = 0;
};

// Alpha 255 on the mask dilated by `style.outline_px`; fill color on the
// mask, outline color on the band around it. Throws kEmptyMask.
RasterImage ConvertReference(const BinaryMask& mask,
                             const ConverterStyle& style = {},
                             Exec exec = Exec::kParallel);

class ReferenceConverter : public ConverterBackend {
 public:
  explicit ReferenceConverter(ConverterStyle style = {}) : style_(style) {}
  RasterImage Convert(const BinaryMask& mask, const std::string&) override {
    return ConvertReference(mask, style_);
  }
  std::string Identity() const override { return "reference-converter"; }

 private:
  ConverterStyle style_;
};

struct ConvertResult {
  RasterImage layer;
  std::vector<std::string> warnings;
};

// Runs `backend` and validates its output: 4 channels and the mask's size
// (kBackendContract otherwise). Alpha outside the mask dilated by
// `tolerance_px` produces a warning.
ConvertResult Convert(const BinaryMask& mask, const std::string& prompt,
                      ConverterBackend& backend, int tolerance_px = 8);

}  // namespace mangasfx
