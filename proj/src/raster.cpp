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

#include "mangasfx/raster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <utility>

#include "mangasfx/error.hpp"
#include "mangasfx/kernels.hpp"

namespace mangasfx {

namespace {

void CheckDims(int width, int height) {
  if (width <= 0 || height <= 0) {
    std::ostringstream os;
    os << "nonpositive dimensions " << width << "x" << height;
    throw Error(ErrorKind::kDimension, os.str());
  }
}

std::string BoxString(const Box& b) {
  std::ostringstream os;
  os << "[" << b.x << "," << b.y << " " << b.width << "x" << b.height << "]";
  return os.str();
}

void CheckCropBox(int width, int height, const Box& box) {
  if (box.empty() || box.x < 0 || box.y < 0 || box.right() > width ||
      box.bottom() > height) {
    std::ostringstream os;
    os << "crop box " << BoxString(box) << " outside " << width << "x"
       << height;
    throw Error(ErrorKind::kBounds, os.str());
  }
}

struct Tap {
  int index;
  double weight;
};

// Per-output-sample source taps along one axis.
std::vector<std::vector<Tap>> AxisTaps(int n_src, int n_dst) {
  std::vector<std::vector<Tap>> taps(n_dst);
  const double s = static_cast<double>(n_src) / n_dst;
  if (n_dst < n_src) {
    for (int i = 0; i < n_dst; ++i) {
      const double a = i * s;
      const double b = (i + 1) * s;
      const int j0 = static_cast<int>(std::floor(a));
      const int j1 = std::min(n_src, static_cast<int>(std::ceil(b)));
      for (int j = j0; j < j1; ++j) {
        const double overlap = std::min(b, j + 1.0) - std::max(a, double(j));
        if (overlap > 0) taps[i].push_back({j, overlap / s});
      }
    }
  } else {
    for (int i = 0; i < n_dst; ++i) {
      double pos = (i + 0.5) * s - 0.5;
      pos = std::clamp(pos, 0.0, double(n_src - 1));
      const int j0 = static_cast<int>(std::floor(pos));
      const double f = pos - j0;
      taps[i].push_back({j0, 1.0 - f});
      if (f > 0 && j0 + 1 < n_src) taps[i].push_back({j0 + 1, f});
    }
  }
  return taps;
}

}  // namespace

RasterImage::RasterImage(int width, int height, int channels,
                         std::uint8_t fill)
    : width_(width), height_(height), channels_(channels) {
  CheckDims(width, height);
  if (channels != 1 && channels != 3 && channels != 4) {
    throw Error(ErrorKind::kChannelMismatch,
                "unsupported channel count " + std::to_string(channels));
  }
  pixels_.assign(static_cast<std::size_t>(width) * height * channels, fill);
}

RasterImage::RasterImage(int width, int height, int channels,
                         std::vector<std::uint8_t> pixels)
    : RasterImage(width, height, channels) {
  if (pixels.size() != pixels_.size()) {
    throw Error(ErrorKind::kDimension,
                "pixel buffer length " + std::to_string(pixels.size()) +
                    " != " + std::to_string(pixels_.size()));
  }
  pixels_ = std::move(pixels);
}

BinaryMask::BinaryMask(int width, int height, std::uint8_t fill)
    : width_(width), height_(height) {
  CheckDims(width, height);
  values_.assign(static_cast<std::size_t>(width) * height, fill ? 1 : 0);
}

BinaryMask::BinaryMask(int width, int height, std::vector<std::uint8_t> values)
    : BinaryMask(width, height) {
  if (values.size() != values_.size()) {
    throw Error(ErrorKind::kDimension, "mask buffer length mismatch");
  }
  for (auto& v : values) v = v ? 1 : 0;
  values_ = std::move(values);
}

std::size_t BinaryMask::count() const {
  return static_cast<std::size_t>(
      std::count(values_.begin(), values_.end(), std::uint8_t{1}));
}

void PolygonRegion::Validate() const {
  if (vertices.size() < 3) {
    throw Error(ErrorKind::kDegeneratePolygon,
                "polygon has " + std::to_string(vertices.size()) +
                    " vertices, need at least 3");
  }
}

Box PolygonRegion::BoundingBox() const {
  Validate();
  double min_x = std::numeric_limits<double>::infinity();
  double min_y = min_x;
  double max_x = -min_x;
  double max_y = -min_x;
  for (const Point& p : vertices) {
    min_x = std::min(min_x, p.x);
    min_y = std::min(min_y, p.y);
    max_x = std::max(max_x, p.x);
    max_y = std::max(max_y, p.y);
  }
  const int x0 = static_cast<int>(std::floor(min_x));
  const int y0 = static_cast<int>(std::floor(min_y));
  const int x1 = static_cast<int>(std::ceil(max_x));
  const int y1 = static_cast<int>(std::ceil(max_y));
  return {x0, y0, x1 - x0, y1 - y0};
}

PolygonRegion PolygonRegion::ClampedTo(int width, int height) const {
  PolygonRegion out = *this;
  for (Point& p : out.vertices) {
    p.x = std::clamp(p.x, 0.0, double(width));
    p.y = std::clamp(p.y, 0.0, double(height));
  }
  return out;
}

PolygonRegion PolygonRegion::Transformed(double scale, double offset_x,
                                         double offset_y) const {
  PolygonRegion out = *this;
  for (Point& p : out.vertices) {
    p.x = p.x * scale + offset_x;
    p.y = p.y * scale + offset_y;
  }
  return out;
}

BinaryMask RasterizePolygon(const PolygonRegion& poly, int width, int height,
                            Exec exec) {
  poly.Validate();
  BinaryMask out(width, height);
  if (exec == Exec::kSerial) {
    kernels::serial::RasterizeRows(poly, out);
  } else {
    kernels::parallel::RasterizeRows(poly, out);
  }
  return out;
}

BinaryMask Binarize(const RasterImage& img, std::uint8_t threshold) {
  if (img.channels() != 1) {
    throw Error(ErrorKind::kChannelMismatch,
                "binarize needs 1 channel, got " +
                    std::to_string(img.channels()));
  }
  BinaryMask out(img.width(), img.height());
  auto src = img.pixels();
  auto dst = out.values();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] >= threshold;
  return out;
}

RasterImage ToLuminance(const RasterImage& img) {
  if (img.channels() == 1) return img;
  RasterImage out(img.width(), img.height(), 1);
  const int c = img.channels();
  auto src = img.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    const std::uint32_t r = src[i * c];
    const std::uint32_t g = src[i * c + 1];
    const std::uint32_t b = src[i * c + 2];
    dst[i] = static_cast<std::uint8_t>((299 * r + 587 * g + 114 * b + 500) /
                                       1000);
  }
  return out;
}

RasterImage Crop(const RasterImage& img, const Box& box) {
  CheckCropBox(img.width(), img.height(), box);
  RasterImage out(box.width, box.height, img.channels());
  const std::size_t row_bytes =
      static_cast<std::size_t>(box.width) * img.channels();
  for (int y = 0; y < box.height; ++y) {
    const auto src = img.row(box.y + y).subspan(
        static_cast<std::size_t>(box.x) * img.channels(), row_bytes);
    std::copy(src.begin(), src.end(), &out.at(0, y, 0));
  }
  return out;
}

BinaryMask Crop(const BinaryMask& mask, const Box& box) {
  CheckCropBox(mask.width(), mask.height(), box);
  BinaryMask out(box.width, box.height);
  for (int y = 0; y < box.height; ++y) {
    for (int x = 0; x < box.width; ++x) {
      out.at(x, y) = mask.at(box.x + x, box.y + y);
    }
  }
  return out;
}

RasterImage Resize(const RasterImage& img, int width, int height) {
  CheckDims(width, height);
  if (width == img.width() && height == img.height()) return img;
  const int c = img.channels();
  const int sw = img.width();
  const int sh = img.height();
  const auto taps_x = AxisTaps(sw, width);
  const auto taps_y = AxisTaps(sh, height);

  // Horizontal pass into doubles, then vertical pass with final rounding.
  std::vector<double> tmp(static_cast<std::size_t>(width) * sh * c, 0.0);
  for (int y = 0; y < sh; ++y) {
    for (int x = 0; x < width; ++x) {
      for (int ch = 0; ch < c; ++ch) {
        double acc = 0.0;
        for (const Tap& t : taps_x[x]) acc += t.weight * img.at(t.index, y, ch);
        tmp[(static_cast<std::size_t>(y) * width + x) * c + ch] = acc;
      }
    }
  }
  RasterImage out(width, height, c);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      for (int ch = 0; ch < c; ++ch) {
        double acc = 0.0;
        for (const Tap& t : taps_y[y]) {
          acc += t.weight *
                 tmp[(static_cast<std::size_t>(t.index) * width + x) * c + ch];
        }
        // The epsilon absorbs accumulation error at exact .5 ties.
        const double r = std::floor(acc + 0.5 + 1e-9);
        out.at(x, y, ch) = static_cast<std::uint8_t>(std::clamp(r, 0.0, 255.0));
      }
    }
  }
  return out;
}

RasterImage PadTo(const RasterImage& img, int width, int height,
                  std::uint8_t fill) {
  if (width < img.width() || height < img.height()) {
    std::ostringstream os;
    os << "pad target " << width << "x" << height << " smaller than source "
       << img.width() << "x" << img.height();
    throw Error(ErrorKind::kDimension, os.str());
  }
  RasterImage out(width, height, img.channels(), fill);
  for (int y = 0; y < img.height(); ++y) {
    const auto src = img.row(y);
    std::copy(src.begin(), src.end(), &out.at(0, y, 0));
  }
  return out;
}

BinaryMask PadTo(const BinaryMask& mask, int width, int height) {
  if (width < mask.width() || height < mask.height()) {
    throw Error(ErrorKind::kDimension, "pad target smaller than source");
  }
  BinaryMask out(width, height);
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) out.at(x, y) = mask.at(x, y);
  }
  return out;
}

RasterImage LiftMask(const BinaryMask& mask, int channels) {
  RasterImage out(mask.width(), mask.height(), channels);
  auto src = mask.values();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) {
    const std::uint8_t v = src[i] ? 255 : 0;
    for (int c = 0; c < channels; ++c) dst[i * channels + c] = v;
  }
  return out;
}

RasterImage ToRgb(const RasterImage& img) {
  if (img.channels() == 3) return img;
  RasterImage out(img.width(), img.height(), 3);
  const int c = img.channels();
  auto src = img.pixels();
  auto dst = out.pixels();
  const std::size_t n = static_cast<std::size_t>(img.width()) * img.height();
  for (std::size_t i = 0; i < n; ++i) {
    for (int ch = 0; ch < 3; ++ch) {
      dst[i * 3 + ch] = c == 1 ? src[i] : src[i * c + ch];
    }
  }
  return out;
}

BinaryMask Dilate(const BinaryMask& mask, int radius, Exec exec) {
  if (radius < 0) {
    throw Error(ErrorKind::kRange, "negative dilation radius");
  }
  if (radius == 0) return mask;
  BinaryMask out(mask.width(), mask.height());
  if (exec == Exec::kSerial) {
    kernels::serial::DilateSquare(mask, radius, out);
  } else {
    kernels::parallel::DilateSquare(mask, radius, out);
  }
  return out;
}

BinaryMask Union(const BinaryMask& a, const BinaryMask& b) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw Error(ErrorKind::kDimension, "mask union of unequal shapes");
  }
  BinaryMask out = a;
  auto dst = out.values();
  auto src = b.values();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] |= src[i];
  return out;
}

BinaryMask PolygonOutline(const PolygonRegion& poly, int width, int height) {
  poly.Validate();
  BinaryMask out(width, height);
  auto plot = [&](int x, int y) {
    if (x >= 0 && y >= 0 && x < width && y < height) out.at(x, y) = 1;
  };
  const auto& v = poly.vertices;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Point& a = v[i];
    const Point& b = v[(i + 1) % v.size()];
    int x0 = static_cast<int>(std::floor(a.x + 0.5));
    int y0 = static_cast<int>(std::floor(a.y + 0.5));
    const int x1 = static_cast<int>(std::floor(b.x + 0.5));
    const int y1 = static_cast<int>(std::floor(b.y + 0.5));
    const int dx = std::abs(x1 - x0);
    const int dy = -std::abs(y1 - y0);
    const int sx = x0 < x1 ? 1 : -1;
    const int sy = y0 < y1 ? 1 : -1;
    int err = dx + dy;
    while (true) {
      plot(x0, y0);
      if (x0 == x1 && y0 == y1) break;
      const int e2 = 2 * err;
      if (e2 >= dy) { err += dy; x0 += sx; }
      if (e2 <= dx) { err += dx; y0 += sy; }
    }
  }
  return out;
}

Box MaskBoundingBox(const BinaryMask& mask) {
  int x0 = mask.width(), y0 = mask.height(), x1 = -1, y1 = -1;
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (!mask.at(x, y)) continue;
      x0 = std::min(x0, x);
      y0 = std::min(y0, y);
      x1 = std::max(x1, x);
      y1 = std::max(y1, y);
    }
  }
  if (x1 < 0) return {};
  return {x0, y0, x1 - x0 + 1, y1 - y0 + 1};
}

}  // namespace mangasfx
