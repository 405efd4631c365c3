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
#include <utility>

#include "mangasfx/raster.hpp"
#include "mangasfx/sample.hpp"

namespace mangasfx {

// Two images placed side by side; columns [0, seam) hold the left member.
struct ConcatCanvas {
  RasterImage image;
  int seam = 0;
  int left_width = 0;
  int right_width = 0;
};

// Horizontal concatenation. Heights and channel counts must match.
ConcatCanvas ConcatH(const RasterImage& left, const RasterImage& right);

// Inverse of ConcatH. Throws kSeam unless 0 < seam < width.
std::pair<RasterImage, RasterImage> SplitH(const ConcatCanvas& canvas);

// Wraps a model-produced image whose seam is known from the layout.
ConcatCanvas WrapCanvas(RasterImage image, int seam);

// Which slot holds the mask / plain-text member. Every producer and consumer
// of concatenated canvases goes through this layout.
struct SlotLayout {
  bool mask_left = true;

  ConcatCanvas Compose(const RasterImage& mask_member,
                       const RasterImage& rgb_member) const;
  RasterImage MaskHalf(const ConcatCanvas& canvas) const;
  RasterImage RgbHalf(const ConcatCanvas& canvas) const;
};

struct TrainingPair {
  ConcatCanvas input;   // Concat(y_m, y)
  ConcatCanvas target;  // Concat(lift(x_m), x)
  std::string prompt;
};

// Brings an image to a canvas x canvas RGB square. Masks go through
// `NormalizeMask` so they stay binary.
RasterImage NormalizeHalf(const RasterImage& img, int canvas);
BinaryMask NormalizeMask(const BinaryMask& mask, int canvas);

TrainingPair BuildTrainingPair(const SampleImages& sample, int canvas,
                               const SlotLayout& layout = {});
// Loads the sample's images first; load and shape errors carry the sample id.
TrainingPair BuildTrainingPair(const SampleRecord& record,
                               const std::filesystem::path& root, int canvas,
                               const SlotLayout& layout = {});

}  // namespace mangasfx
