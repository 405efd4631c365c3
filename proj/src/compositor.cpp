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

#include "mangasfx/compositor.hpp"

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "mangasfx/error.hpp"
#include "mangasfx/kernels.hpp"

namespace mangasfx {

namespace {

std::string Dims(int w, int h) {
  return std::to_string(w) + "x" + std::to_string(h);
}

void CheckHoleShape(const RasterImage& image, const BinaryMask& hole) {
  if (hole.width() != image.width() || hole.height() != image.height()) {
    throw Error(ErrorKind::kDimension,
                "hole " + Dims(hole.width(), hole.height()) + " vs image " +
                    Dims(image.width(), image.height()));
  }
}

}  // namespace

RasterImage InpaintReference(const RasterImage& image, const BinaryMask& hole,
                             const HarmonicFillConfig& config) {
  CheckHoleShape(image, hole);
  const int w = image.width();
  const int h = image.height();
  const std::size_t n = static_cast<std::size_t>(w) * h;
  const std::size_t holes = hole.count();
  if (holes == 0) return image;
  if (holes == n) {
    throw Error(ErrorKind::kDegenerateHole, "hole covers the whole image");
  }

  kernels::JacobiProblem problem{w, h, {}};
  problem.hole_indices.reserve(holes);
  for (std::size_t i = 0; i < n; ++i) {
    if (hole.values()[i]) problem.hole_indices.push_back(static_cast<int>(i));
  }

  RasterImage out = image;
  const int channels = image.channels();
  std::vector<double> current(n), next(n);
  for (int c = 0; c < channels; ++c) {
    // Start the hole at the mean of its known border so flat regions are
    // exact from the first sweep.
    double border_sum = 0.0;
    long border_count = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const int x = static_cast<int>(i % w);
      const int y = static_cast<int>(i / w);
      current[i] = image.at(x, y, c);
      if (hole.values()[i]) continue;
      const bool touches = (x > 0 && hole.at(x - 1, y)) ||
                           (x + 1 < w && hole.at(x + 1, y)) ||
                           (y > 0 && hole.at(x, y - 1)) ||
                           (y + 1 < h && hole.at(x, y + 1));
      if (touches) {
        border_sum += current[i];
        ++border_count;
      }
    }
    const double start = border_sum / std::max(1L, border_count);
    for (const int idx : problem.hole_indices) current[idx] = start;
    next = current;

    for (int it = 0; it < config.max_iterations; ++it) {
      const double change =
          config.exec == Exec::kSerial
              ? kernels::serial::JacobiSweep(problem, current, next)
              : kernels::parallel::JacobiSweep(problem, current, next);
      std::swap(current, next);
      if (change < config.tolerance) break;
    }
    for (const int idx : problem.hole_indices) {
      const double v = std::clamp(std::floor(current[idx] + 0.5), 0.0, 255.0);
      out.at(idx % w, idx / w, c) = static_cast<std::uint8_t>(v);
    }
  }
  return out;
}

RasterImage Inpaint(InpainterBackend& backend, const RasterImage& image,
                    const BinaryMask& hole) {
  CheckHoleShape(image, hole);
  RasterImage out = backend.Inpaint(image, hole);
  if (out.width() != image.width() || out.height() != image.height() ||
      out.channels() != image.channels()) {
    throw Error(ErrorKind::kBackendContract,
                backend.Identity() + " changed the image shape");
  }
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      if (hole.at(x, y)) continue;
      for (int c = 0; c < image.channels(); ++c) {
        if (out.at(x, y, c) != image.at(x, y, c)) {
          throw Error(ErrorKind::kBackendContract,
                      backend.Identity() + " modified pixel (" +
                          std::to_string(x) + ", " + std::to_string(y) +
                          ") outside the hole");
        }
      }
    }
  }
  return out;
}

RasterImage AlphaOver(const RasterImage& background, const RasterImage& layer,
                      int offset_x, int offset_y, Exec exec) {
  if (background.channels() != 3) {
    throw Error(ErrorKind::kChannelMismatch,
                "background must have 3 channels, got " +
                    std::to_string(background.channels()));
  }
  if (layer.channels() != 4) {
    throw Error(ErrorKind::kChannelMismatch,
                "layer must have 4 channels, got " +
                    std::to_string(layer.channels()));
  }
  RasterImage out = background;
  if (exec == Exec::kSerial) {
    kernels::serial::AlphaOver(layer, offset_x, offset_y, out);
  } else {
    kernels::parallel::AlphaOver(layer, offset_x, offset_y, out);
  }
  return out;
}

BinaryMask CompositionHole(const PolygonRegion& polygon, int width,
                           int height) {
  return Union(RasterizePolygon(polygon, width, height),
               PolygonOutline(polygon, width, height));
}

Composition ComposeFinal(const RasterImage& context,
                         const PolygonRegion& polygon, const RasterImage& layer,
                         InpainterBackend& inpainter) {
  const Box box = polygon.BoundingBox();
  if (box.empty()) {
    throw Error(ErrorKind::kDegeneratePolygon, "polygon has no area");
  }
  Composition c;
  c.hole = CompositionHole(polygon, context.width(), context.height());
  c.inpainted = Inpaint(inpainter, context, c.hole);
  const bool canvas_sized =
      layer.width() == context.width() && layer.height() == context.height();
  c.offset_x = canvas_sized ? 0 : box.x;
  c.offset_y = canvas_sized ? 0 : box.y;
  c.final_image = AlphaOver(c.inpainted, layer, c.offset_x, c.offset_y);
  return c;
}

}  // namespace mangasfx
