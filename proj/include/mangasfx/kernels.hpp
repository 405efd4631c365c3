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

// Data-parallel inner loops. Every kernel has a serial reference
// implementation and an OpenMP implementation with identical results; the
// public API in raster.hpp / compositor.hpp dispatches on `Exec`.

#include <cstdint>
#include <span>
#include <vector>

#include "mangasfx/raster.hpp"

namespace mangasfx::kernels {

// Scratch state for Jacobi relaxation over the hole pixels of one plane.
struct JacobiProblem {
  int width = 0;
  int height = 0;
  std::vector<std::int32_t> hole_indices;  // row-major indices of hole pixels
};

namespace serial {

void RasterizeRows(const PolygonRegion& poly, BinaryMask& out);
void DilateSquare(const BinaryMask& in, int radius, BinaryMask& out);
void AlphaOver(const RasterImage& layer, int offset_x, int offset_y,
               RasterImage& background);
// One sweep: `next` = 4-neighbor mean of `current` at hole pixels.
// Returns the largest absolute change.
double JacobiSweep(const JacobiProblem& problem,
                   std::span<const double> current, std::span<double> next);

}  // namespace serial

namespace parallel {

void RasterizeRows(const PolygonRegion& poly, BinaryMask& out);
void DilateSquare(const BinaryMask& in, int radius, BinaryMask& out);
void AlphaOver(const RasterImage& layer, int offset_x, int offset_y,
               RasterImage& background);
double JacobiSweep(const JacobiProblem& problem,
                   std::span<const double> current, std::span<double> next);

}  // namespace parallel

// Shared per-element helpers so both paths compute identical values.

// Sorted x-coordinates where the polygon edges cross the horizontal line y.
// Edges follow the half-open rule (y_i <= y < y_j or y_j <= y < y_i).
void ScanlineCrossings(const PolygonRegion& poly, double y,
                       std::vector<double>& xs);

// Sets pixel x of `row` iff xs[2k] <= x + 0.5 < xs[2k + 1] for some k.
void FillSpans(const std::vector<double>& xs, int row, BinaryMask& out);

// round_half_up((fg * a + bg * (255 - a)) / 255) in exact integer arithmetic.
inline std::uint8_t BlendChannel(std::uint8_t fg, std::uint8_t bg,
                                 std::uint8_t alpha) {
  const std::uint32_t num =
      std::uint32_t{fg} * alpha + std::uint32_t{bg} * (255u - alpha);
  return static_cast<std::uint8_t>((2u * num + 255u) / 510u);
}

}  // namespace mangasfx::kernels
