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

#include "mangasfx/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "mangasfx/dataset.hpp"
#include "mangasfx/error.hpp"
#include "mangasfx/glyphs.hpp"
#include "mangasfx/png_io.hpp"
#include "mangasfx/text.hpp"

namespace mangasfx {

nlohmann::json SyntheticConfig::ToJson() const {
  return {{"train_samples", train_samples},
          {"test_samples", test_samples},
          {"pages_per_title", pages_per_title},
          {"min_page_side", min_page_side},
          {"max_page_side", max_page_side},
          {"seed", seed}};
}

SyntheticConfig SyntheticConfig::FromJson(const nlohmann::json& j) {
  SyntheticConfig c;
  c.train_samples = j.value("train_samples", c.train_samples);
  c.test_samples = j.value("test_samples", c.test_samples);
  c.pages_per_title = j.value("pages_per_title", c.pages_per_title);
  c.min_page_side = j.value("min_page_side", c.min_page_side);
  c.max_page_side = j.value("max_page_side", c.max_page_side);
  c.seed = j.value("seed", c.seed);
  if (c.train_samples < 0 || c.test_samples < 0 || c.pages_per_title <= 0 ||
      c.min_page_side < 64 || c.max_page_side < c.min_page_side) {
    throw Error(ErrorKind::kConfig, "invalid synthetic corpus settings");
  }
  return c;
}

namespace {

constexpr std::array<const char*, 24> kWords = {
    "BOOM", "BAM",  "DON",   "ZAP",  "DOKAN", "BANG", "WHAM",  "KRAK",
    "POW",  "SLAM", "THUD",  "ZOOM", "CRASH", "DOON", "BAAN",  "ZAZA",
    "GOGO", "PAN",  "SHAA",  "ZUN",  "GARA",  "PIKA", "DODODO", "BURN"};

std::string Name(const char* prefix, int i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%05d", prefix, i);
  return buf;
}

struct PageArt {
  RasterImage page;
  RasterImage ids;
  TextAnnotation text;
};

void Background(RasterImage& page, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int w = page.width();
  const int h = page.height();
  const double base = 200 + 50 * u(rng);
  const double gx = (u(rng) - 0.5) * 60.0 / w;
  const double gy = (u(rng) - 0.5) * 60.0 / h;
  const int pattern = static_cast<int>(u(rng) * 4);
  const int period = 4 + static_cast<int>(u(rng) * 5);
  const double cx = u(rng) * w;
  const double cy = u(rng) * h;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double v = base + gx * x + gy * y;
      switch (pattern) {
        case 1: {  // screentone dots
          const double dx = x % period - period / 2.0;
          const double dy = y % period - period / 2.0;
          if (dx * dx + dy * dy < period * period / 10.0) v -= 90;
          break;
        }
        case 2:  // hatching
          if ((x + y) % period == 0) v -= 110;
          break;
        case 3: {  // speed lines around a focus
          const double a = std::atan2(y - cy, x - cx);
          if (std::fmod(a * 40.0 + 100.0, 2.0) < 0.25) v -= 120;
          break;
        }
        default:
          break;
      }
      const auto g = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
      for (int c = 0; c < 3; ++c) page.at(x, y, c) = g;
    }
  }
  // A few panel borders and filled shapes.
  const int shapes = 1 + static_cast<int>(u(rng) * 3);
  for (int s = 0; s < shapes; ++s) {
    const int x0 = static_cast<int>(u(rng) * w * 0.7);
    const int y0 = static_cast<int>(u(rng) * h * 0.7);
    const int x1 = std::min(w - 1, x0 + 30 + static_cast<int>(u(rng) * w * 0.5));
    const int y1 = std::min(h - 1, y0 + 30 + static_cast<int>(u(rng) * h * 0.5));
    const bool filled = u(rng) < 0.4;
    const auto tone = static_cast<std::uint8_t>(60 + u(rng) * 120);
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        const bool edge = x - x0 < 2 || x1 - x < 2 || y - y0 < 2 || y1 - y < 2;
        if (!edge && !filled) continue;
        for (int c = 0; c < 3; ++c) page.at(x, y, c) = edge ? 20 : tone;
      }
    }
  }
}

double SampleBilinear(const RasterImage& img, double u, double v) {
  const double x = u - 0.5;
  const double y = v - 0.5;
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const double fx = x - x0;
  const double fy = y - y0;
  auto at = [&](int xx, int yy) -> double {
    if (xx < 0 || yy < 0 || xx >= img.width() || yy >= img.height()) return 0;
    return img.at(xx, yy, 0);
  };
  return (1 - fy) * ((1 - fx) * at(x0, y0) + fx * at(x0 + 1, y0)) +
         fy * ((1 - fx) * at(x0, y0 + 1) + fx * at(x0 + 1, y0 + 1));
}

PageArt DrawPage(const SyntheticConfig& cfg, int index) {
  std::mt19937_64 rng(cfg.seed * 0x9e3779b97f4a7c15ull + index);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> side(cfg.min_page_side, cfg.max_page_side);
  const int w = side(rng);
  const int h = side(rng);
  PageArt art{RasterImage(w, h, 3, 255), RasterImage(w, h, 1, 0), {}};
  Background(art.page, rng);

  const char* word = kWords[static_cast<std::size_t>(u(rng) * kWords.size())];
  const RenderedLine line = RenderLine(DecodeUtf8(word));
  const double lw = line.coverage.width();
  const double lh = line.coverage.height();

  const double angle = (u(rng) - 0.5) * 50.0 * std::numbers::pi / 180.0;
  const double shear = (u(rng) - 0.5) * 0.6;
  double scale = (40.0 + 40.0 * u(rng)) / lh;
  scale = std::min(scale, 0.8 * std::min(w, h) / std::hypot(lw, lh));
  // Forward map: page = A * (line - line_center) + center.
  const double ca = std::cos(angle), sa = std::sin(angle);
  const double a00 = scale * ca, a01 = scale * (ca * shear - sa);
  const double a10 = scale * sa, a11 = scale * (sa * shear + ca);
  const double det = a00 * a11 - a01 * a10;

  std::array<Point, 4> corners;
  const std::array<Point, 4> local = {
      Point{-lw / 2, -lh / 2}, Point{lw / 2, -lh / 2}, Point{lw / 2, lh / 2},
      Point{-lw / 2, lh / 2}};
  double ext_x = 0, ext_y = 0;
  for (int k = 0; k < 4; ++k) {
    corners[k] = {a00 * local[k].x + a01 * local[k].y,
                  a10 * local[k].x + a11 * local[k].y};
    ext_x = std::max(ext_x, std::abs(corners[k].x));
    ext_y = std::max(ext_y, std::abs(corners[k].y));
  }
  const int thickness = static_cast<int>(u(rng) * 3);
  const int margin = thickness + 4;
  const double cx = ext_x + margin + u(rng) * std::max(0.0, w - 2 * (ext_x + margin));
  const double cy = ext_y + margin + u(rng) * std::max(0.0, h - 2 * (ext_y + margin));

  BinaryMask fill(w, h);
  const int bx0 = std::max(0, static_cast<int>(cx - ext_x) - 1);
  const int bx1 = std::min(w, static_cast<int>(cx + ext_x) + 2);
  const int by0 = std::max(0, static_cast<int>(cy - ext_y) - 1);
  const int by1 = std::min(h, static_cast<int>(cy + ext_y) + 2);
  for (int y = by0; y < by1; ++y) {
    for (int x = bx0; x < bx1; ++x) {
      const double px = x + 0.5 - cx;
      const double py = y + 0.5 - cy;
      const double lx = (a11 * px - a01 * py) / det + lw / 2;
      const double ly = (-a10 * px + a00 * py) / det + lh / 2;
      fill.at(x, y) = SampleBilinear(line.coverage, lx, ly) >= 128.0;
    }
  }
  fill = Dilate(fill, thickness);
  const BinaryMask outline = Dilate(fill, 2);
  const auto ink = static_cast<std::uint8_t>(u(rng) * 40);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!outline.at(x, y)) continue;
      const std::uint8_t v = fill.at(x, y) ? ink : 255;
      for (int c = 0; c < 3; ++c) art.page.at(x, y, c) = v;
      if (fill.at(x, y)) art.ids.at(x, y, 0) = 1;
    }
  }

  // Placement polygon: the word's rectangle grown by the stroke margin.
  const double grow = 1.0 + (thickness + 2.0) / (scale * std::min(lw, lh) / 2);
  for (const Point& c : corners) {
    art.text.polygon.vertices.push_back({cx + c.x * grow, cy + c.y * grow});
  }
  art.text.text = word;
  return art;
}

}  // namespace

void GenerateSyntheticCorpus(const SyntheticConfig& config,
                             const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  const CorpusLayout layout{root};
  fs::create_directories(layout.pages_dir());
  fs::create_directories(layout.masks_dir());

  const int ppt = config.pages_per_title;
  const int train_titles = (config.train_samples + ppt - 1) / ppt;
  const int test_titles = (config.test_samples + ppt - 1) / ppt;
  const int total = config.train_samples + config.test_samples;

  SplitTable table;
  for (int t = 0; t < train_titles + test_titles; ++t) {
    table.by_title[Name("title", t)] = t < train_titles ? Split::kTrain : Split::kTest;
  }

  std::vector<TextAnnotation> annotations(total);
  std::vector<std::string> errors(total);
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < total; ++i) {
    try {
      const bool train = i < config.train_samples;
      const int title = train ? i / ppt
                              : train_titles + (i - config.train_samples) / ppt;
      PageArt art = DrawPage(config, i);
      art.text.page_id = Name("page", i);
      art.text.title = Name("title", title);
      WritePng(layout.pages_dir() / (art.text.page_id + ".png"), art.page);
      WritePng(layout.masks_dir() / (art.text.page_id + ".png"), art.ids);
      annotations[i] = std::move(art.text);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }
  for (const auto& e : errors) {
    if (!e.empty()) throw Error(ErrorKind::kIo, e);
  }
  WriteTextAnnotations(layout.text_file(), annotations);
  std::ofstream split(layout.split_file(), std::ios::binary);
  split << table.ToJson().dump(2) << '\n';
  if (!split) throw Error(ErrorKind::kIo, "cannot write split table");
}

}  // namespace mangasfx
