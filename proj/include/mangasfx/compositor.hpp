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

#include "mangasfx/raster.hpp"

namespace mangasfx {

// Fills the hole region of an image. Pixels outside the hole must come back
// unchanged; `Inpaint` enforces this on every call.
class InpainterBackend {
 public:
  virtual ~InpainterBackend() = default;
  virtual RasterImage Inpaint(const RasterImage& image,
                              const BinaryMask& hole) = 0;
  virtual std::string Identity() const = 0;
};

struct HarmonicFillConfig {
  double tolerance = 0.1;
  int max_iterations = 10000;
  Exec exec = Exec::kParallel;
};

// Jacobi relaxation of 4-neighbor averaging inside the hole, per channel.
// Throws kDegenerateHole when every pixel is in the hole.
RasterImage InpaintReference(const RasterImage& image, const BinaryMask& hole,
                             const HarmonicFillConfig& config = {});

class ReferenceInpainter : public InpainterBackend {
 public:
  explicit ReferenceInpainter(HarmonicFillConfig config = {})
      : config_(config) {}
  RasterImage Inpaint(const RasterImage& image,
                      const BinaryMask& hole) override {
    return InpaintReference(image, hole, config_);
  }
  std::string Identity() const override { return "reference-inpainter"; }

 private:
  HarmonicFillConfig config_;
};

// Calls the backend and checks dims and outside-hole preservation
// (kBackendContract on violation).
RasterImage Inpaint(InpainterBackend& backend, const RasterImage& image,
                    const BinaryMask& hole);

// Source-over of a 4-channel layer placed at (offset_x, offset_y) on a
// 3-channel background. Parts of the layer off the canvas are dropped.
RasterImage AlphaOver(const RasterImage& background, const RasterImage& layer,
                      int offset_x, int offset_y, Exec exec = Exec::kParallel);

struct Composition {
  RasterImage final_image;
  RasterImage inpainted;  // y_b
  BinaryMask hole;
  int offset_x = 0;
  int offset_y = 0;
};

// Region removed before pasting: the polygon interior plus its 1px outline.
BinaryMask CompositionHole(const PolygonRegion& polygon, int width,
                           int height);

// Inpaints the polygon hole of `context`, then pastes `layer`. A layer the
// size of the canvas is placed at the origin; a smaller layer at the
// top-left of the polygon's bounding box.
Composition ComposeFinal(const RasterImage& context,
                         const PolygonRegion& polygon, const RasterImage& layer,
                         InpainterBackend& inpainter);

}  // namespace mangasfx
