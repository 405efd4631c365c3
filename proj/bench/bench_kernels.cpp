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

// Serial versus OpenMP timings for the raster and compositing kernels.

#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "mangasfx/kernels.hpp"
#include "mangasfx/raster.hpp"

namespace {

using namespace mangasfx;

PolygonRegion Star(int side) {
  PolygonRegion p;
  const double c = side / 2.0;
  for (int i = 0; i < 24; ++i) {
    const double a = i * std::numbers::pi / 12.0;
    const double r = (i % 2 ? 0.45 : 0.2) * side;
    p.vertices.push_back({c + r * std::cos(a), c + r * std::sin(a)});
  }
  return p;
}

BinaryMask Speckle(int side) {
  BinaryMask m(side, side);
  std::mt19937_64 rng(1);
  std::bernoulli_distribution on(0.02);
  for (auto& v : m.values()) v = on(rng);
  return m;
}

template <auto Kernel>
void BM_Rasterize(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const PolygonRegion poly = Star(side);
  BinaryMask out(side, side);
  for (auto _ : state) {
    Kernel(poly, out);
    benchmark::DoNotOptimize(out.values().data());
  }
  state.SetItemsProcessed(state.iterations() * side * side);
}

template <auto Kernel>
void BM_Dilate(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const BinaryMask in = Speckle(side);
  BinaryMask out(side, side);
  for (auto _ : state) {
    Kernel(in, 4, out);
    benchmark::DoNotOptimize(out.values().data());
  }
  state.SetItemsProcessed(state.iterations() * side * side);
}

template <auto Kernel>
void BM_AlphaOver(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  RasterImage layer(side, side, 4);
  for (std::size_t i = 0; i < layer.pixels().size(); ++i) {
    layer.pixels()[i] = static_cast<std::uint8_t>(i * 31);
  }
  RasterImage bg(side, side, 3, 200);
  for (auto _ : state) {
    Kernel(layer, 0, 0, bg);
    benchmark::DoNotOptimize(bg.pixels().data());
  }
  state.SetItemsProcessed(state.iterations() * side * side);
}

template <auto Kernel>
void BM_Jacobi(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  kernels::JacobiProblem problem{side, side, {}};
  for (int y = side / 4; y < 3 * side / 4; ++y) {
    for (int x = side / 4; x < 3 * side / 4; ++x) {
      problem.hole_indices.push_back(y * side + x);
    }
  }
  std::vector<double> a(static_cast<std::size_t>(side) * side, 128.0);
  std::vector<double> b = a;
  for (auto _ : state) {
    benchmark::DoNotOptimize(Kernel(problem, a, b));
    std::swap(a, b);
  }
  state.SetItemsProcessed(state.iterations() * problem.hole_indices.size());
}

#define MANGASFX_PAIR(name, fn)                                             \
  BENCHMARK(name<&kernels::serial::fn>)->Name(#fn "/serial")->Arg(256)->Arg(1024); \
  BENCHMARK(name<&kernels::parallel::fn>)->Name(#fn "/parallel")->Arg(256)->Arg(1024)

MANGASFX_PAIR(BM_Rasterize, RasterizeRows);
MANGASFX_PAIR(BM_Dilate, DilateSquare);
MANGASFX_PAIR(BM_AlphaOver, AlphaOver);
MANGASFX_PAIR(BM_Jacobi, JacobiSweep);

}  // namespace

BENCHMARK_MAIN();
