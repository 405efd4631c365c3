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

void ScanlineCrossings(const PolygonRegion& poly, double y,
                       std::vector<double>& xs) {
  xs.clear();
  const auto& v = poly.vertices;
  const std::size_t n = v.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point& a = v[i];
    const Point& b = v[j];
    if ((a.y > y) != (b.y > y)) {
      xs.push_back(a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y));
    }
  }
  std::sort(xs.begin(), xs.end());
}

void FillSpans(const std::vector<double>& xs, int row, BinaryMask& out) {
  const int w = out.width();
  for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
    const double lo = std::ceil(xs[k] - 0.5);
    const double hi = std::ceil(xs[k + 1] - 0.5);
    const int x0 = static_cast<int>(std::clamp(lo, 0.0, double(w)));
    const int x1 = static_cast<int>(std::clamp(hi, 0.0, double(w)));
    for (int x = x0; x < x1; ++x) out.at(x, row) = 1;
  }
}

namespace serial {

void RasterizeRows(const PolygonRegion& poly, BinaryMask& out) {
  std::vector<double> xs;
  for (int y = 0; y < out.height(); ++y) {
    ScanlineCrossings(poly, y + 0.5, xs);
    FillSpans(xs, y, out);
  }
}

void DilateSquare(const BinaryMask& in, int radius, BinaryMask& out) {
  const int w = in.width();
  const int h = in.height();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      std::uint8_t v = 0;
      for (int dy = -radius; dy <= radius && !v; ++dy) {
        const int yy = y + dy;
        if (yy < 0 || yy >= h) continue;
        for (int dx = -radius; dx <= radius; ++dx) {
          const int xx = x + dx;
          if (xx >= 0 && xx < w && in.at(xx, yy)) {
            v = 1;
            break;
          }
        }
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
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) {
      const int lx = x - offset_x;
      const int ly = y - offset_y;
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
  double max_change = 0.0;
  for (const std::int32_t idx : problem.hole_indices) {
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

}  // namespace serial
}  // namespace mangasfx::kernels
