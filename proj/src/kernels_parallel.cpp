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

#include <algorithm>
#include <cmath>

#include "mangasfx/kernels.hpp"

namespace mangasfx::kernels {

namespace parallel {

void RasterizeRows(const PolygonRegion& poly, BinaryMask& out) {
  const int h = out.height();
#pragma omp parallel
  {
    std::vector<double> xs;
#pragma omp for schedule(static)
    for (int y = 0; y < h; ++y) {
      ScanlineCrossings(poly, y + 0.5, xs);
      FillSpans(xs, y, out);
    }
  }
}

void DilateSquare(const BinaryMask& in, int radius, BinaryMask& out) {
  const int w = in.width();
  const int h = in.height();
  // Separable: horizontal max into `rows`, then vertical max.
  std::vector<std::uint8_t> rows(static_cast<std::size_t>(w) * h, 0);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int lo = std::max(0, x - radius);
      const int hi = std::min(w - 1, x + radius);
      std::uint8_t v = 0;
      for (int xx = lo; xx <= hi && !v; ++xx) v = in.at(xx, y);
      rows[static_cast<std::size_t>(y) * w + x] = v;
    }
  }
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    const int lo = std::max(0, y - radius);
    const int hi = std::min(h - 1, y + radius);
    for (int x = 0; x < w; ++x) {
      std::uint8_t v = 0;
      for (int yy = lo; yy <= hi && !v; ++yy) {
        v = rows[static_cast<std::size_t>(yy) * w + x];
      }
      out.at(x, y) = v;
    }
  }
}

void AlphaOver(const RasterImage& layer, int offset_x, int offset_y,
               RasterImage& background) {
  const int y0 = std::max(0, offset_y);
  const int y1 = std::min(background.height(), offset_y + layer.height());
  const int x0 = std::max(0, offset_x);
  const int x1 = std::min(background.width(), offset_x + layer.width());
#pragma omp parallel for schedule(static)
  for (int y = y0; y < y1; ++y) {
    const int ly = y - offset_y;
    for (int x = x0; x < x1; ++x) {
      const int lx = x - offset_x;
      const std::uint8_t a = layer.at(lx, ly, 3);
      if (a == 0) continue;
      for (int c = 0; c < 3; ++c) {
        background.at(x, y, c) =
            BlendChannel(layer.at(lx, ly, c), background.at(x, y, c), a);
      }
    }
  }
}

double JacobiSweep(const JacobiProblem& problem,
                   std::span<const double> current, std::span<double> next) {
  const int w = problem.width;
  const int h = problem.height;
  const auto n_hole = static_cast<std::int64_t>(problem.hole_indices.size());
  double max_change = 0.0;
#pragma omp parallel for schedule(static) reduction(max : max_change)
  for (std::int64_t k = 0; k < n_hole; ++k) {
    const std::int32_t idx = problem.hole_indices[k];
    const int x = idx % w;
    const int y = idx / w;
    double sum = 0.0;
    int n = 0;
    if (x > 0) { sum += current[idx - 1]; ++n; }
    if (x + 1 < w) { sum += current[idx + 1]; ++n; }
    if (y > 0) { sum += current[idx - w]; ++n; }
    if (y + 1 < h) { sum += current[idx + w]; ++n; }
    const double v = n ? sum / n : current[idx];
    max_change = std::max(max_change, std::abs(v - current[idx]));
    next[idx] = v;
  }
  return max_change;
}

}  // namespace parallel
}  // namespace mangasfx::kernels
