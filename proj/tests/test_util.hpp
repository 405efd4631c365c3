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

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>

#include "mangasfx/raster.hpp"

namespace mangasfx::testing {

inline RasterImage RandomImage(std::mt19937_64& rng, int width, int height,
                               int channels) {
  RasterImage img(width, height, channels);
  std::uniform_int_distribution<int> px(0, 255);
  for (auto& v : img.pixels()) v = static_cast<std::uint8_t>(px(rng));
  return img;
}

inline BinaryMask RandomMask(std::mt19937_64& rng, int width, int height,
                             double density) {
  BinaryMask m(width, height);
  std::bernoulli_distribution on(density);
  for (auto& v : m.values()) v = on(rng);
  return m;
}

// Star-shaped (hence simple) polygon with vertices at sorted angles.
inline PolygonRegion RandomSimplePolygon(std::mt19937_64& rng, int width,
                                         int height) {
  std::uniform_int_distribution<int> nverts(3, 9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int n = nverts(rng);
  const double cx = u(rng) * width;
  const double cy = u(rng) * height;
  const double rmax = 0.6 * std::max(width, height);
  std::vector<double> angles(n);
  for (auto& a : angles) a = u(rng) * 2.0 * std::numbers::pi;
  std::sort(angles.begin(), angles.end());
  PolygonRegion poly;
  for (double a : angles) {
    const double r = (0.1 + 0.9 * u(rng)) * rmax;
    poly.vertices.push_back({cx + r * std::cos(a), cy + r * std::sin(a)});
  }
  return poly;
}

// Fresh scratch directory under the system temp dir.
inline std::filesystem::path ScratchDir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("mangasfx_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace mangasfx::testing
