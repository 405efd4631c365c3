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

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace mangasfx {

// Selects the serial reference path or the OpenMP path of a data-parallel
// kernel. Both paths produce bit-identical results.
enum class Exec { kSerial, kParallel };

struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

// Axis-aligned pixel rectangle [x, x + width) x [y, y + height).
struct Box {
  int x = 0;
  int y = 0;
  int width = 0;
  int height = 0;

  bool empty() const { return width <= 0 || height <= 0; }
  int right() const { return x + width; }
  int bottom() const { return y + height; }
  friend bool operator==(const Box&, const Box&) = default;
};

// Interleaved 8-bit image, row-major, 1 (gray), 3 (RGB) or 4 (RGBA) channels.
class RasterImage {
 public:
  RasterImage() = default;
  RasterImage(int width, int height, int channels, std::uint8_t fill = 0);
  RasterImage(int width, int height, int channels,
              std::vector<std::uint8_t> pixels);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  bool empty() const { return pixels_.empty(); }

  std::uint8_t& at(int x, int y, int c = 0) {
    return pixels_[Index(x, y, c)];
  }
  std::uint8_t at(int x, int y, int c = 0) const {
    return pixels_[Index(x, y, c)];
  }

  std::span<std::uint8_t> pixels() { return pixels_; }
  std::span<const std::uint8_t> pixels() const { return pixels_; }
  std::span<const std::uint8_t> row(int y) const {
    const std::size_t stride = static_cast<std::size_t>(width_) * channels_;
    return pixels().subspan(stride * y, stride);
  }

  friend bool operator==(const RasterImage&, const RasterImage&) = default;

 private:
  std::size_t Index(int x, int y, int c) const {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<std::uint8_t> pixels_;
};

// Row-major {0, 1} mask.
class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(int width, int height, std::uint8_t fill = 0);
  BinaryMask(int width, int height, std::vector<std::uint8_t> values);

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return values_.empty(); }

  std::uint8_t& at(int x, int y) {
    return values_[static_cast<std::size_t>(y) * width_ + x];
  }
  std::uint8_t at(int x, int y) const {
    return values_[static_cast<std::size_t>(y) * width_ + x];
  }

  std::span<std::uint8_t> values() { return values_; }
  std::span<const std::uint8_t> values() const { return values_; }

  std::size_t count() const;

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> values_;
};

// Closed polygon in pixel coordinates; the last vertex connects to the first.
struct PolygonRegion {
  std::vector<Point> vertices;

  // Throws kDegeneratePolygon when fewer than three vertices are present.
  void Validate() const;
  // Smallest integer box containing every vertex (floor of min, ceil of max).
  Box BoundingBox() const;
  PolygonRegion ClampedTo(int width, int height) const;
  PolygonRegion Transformed(double scale, double offset_x,
                            double offset_y) const;

  friend bool operator==(const PolygonRegion&, const PolygonRegion&) = default;
};

// Pixel (x, y) is set iff its center (x + 0.5, y + 0.5) lies inside the
// polygon under the even-odd rule.
BinaryMask RasterizePolygon(const PolygonRegion& poly, int width, int height,
                            Exec exec = Exec::kParallel);

// value = 1 iff intensity >= threshold. Requires a single-channel image.
BinaryMask Binarize(const RasterImage& img, std::uint8_t threshold = 128);

// round(0.299 R + 0.587 G + 0.114 B); alpha is ignored; gray passes through.
RasterImage ToLuminance(const RasterImage& img);

RasterImage Crop(const RasterImage& img, const Box& box);
BinaryMask Crop(const BinaryMask& mask, const Box& box);

// Area-average along axes that shrink, bilinear along axes that grow,
// rounded half-up. Same-size resize returns the input unchanged.
RasterImage Resize(const RasterImage& img, int width, int height);

// Places `img` at the top-left of a width x height canvas filled with `fill`.
RasterImage PadTo(const RasterImage& img, int width, int height,
                  std::uint8_t fill);
BinaryMask PadTo(const BinaryMask& mask, int width, int height);

// {0 -> 0, 1 -> 255} replicated over `channels`.
RasterImage LiftMask(const BinaryMask& mask, int channels = 3);

// Converts any image to 3-channel RGB (gray replicated, alpha dropped).
RasterImage ToRgb(const RasterImage& img);

// Square (Chebyshev) dilation by `radius` pixels.
BinaryMask Dilate(const BinaryMask& mask, int radius,
                  Exec exec = Exec::kParallel);

BinaryMask Union(const BinaryMask& a, const BinaryMask& b);

// Set of pixels on the 1px Bresenham stroke through the polygon's vertices
// rounded to the nearest pixel.
BinaryMask PolygonOutline(const PolygonRegion& poly, int width, int height);

// Bounding box of set pixels; empty box when the mask is all zero.
Box MaskBoundingBox(const BinaryMask& mask);

}  // namespace mangasfx
