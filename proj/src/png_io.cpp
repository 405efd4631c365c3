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

#include "mangasfx/png_io.hpp"

#include <png.h>

#include <cstring>
#include <fstream>
#include <iterator>

#include "mangasfx/error.hpp"

namespace mangasfx {

namespace {

png_uint_32 FormatFor(int channels) {
  switch (channels) {
    case 1: return PNG_FORMAT_GRAY;
    case 3: return PNG_FORMAT_RGB;
    default: return PNG_FORMAT_RGBA;
  }
}

RasterImage FinishRead(png_image& image, const std::string& what) {
  int channels = 4;
  if (image.format == PNG_FORMAT_GRAY) {
    channels = 1;
  } else if (!(image.format & PNG_FORMAT_FLAG_ALPHA) &&
             (image.format & PNG_FORMAT_FLAG_COLOR)) {
    channels = 3;
  }
  image.format = FormatFor(channels);
  std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw Error(ErrorKind::kIo, what + ": " + msg);
  }
  return RasterImage(static_cast<int>(image.width),
                     static_cast<int>(image.height), channels, std::move(buf));
}

}  // namespace

RasterImage ReadPng(const std::filesystem::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw Error(ErrorKind::kIo, path.string() + ": " + image.message);
  }
  return FinishRead(image, path.string());
}

std::pair<int, int> ReadPngSize(const std::filesystem::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw Error(ErrorKind::kIo, path.string() + ": " + image.message);
  }
  const std::pair<int, int> size{static_cast<int>(image.width),
                                 static_cast<int>(image.height)};
  png_image_free(&image);
  return size;
}

RasterImage DecodePng(const std::vector<std::uint8_t>& bytes) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    throw Error(ErrorKind::kIo, std::string("png decode: ") + image.message);
  }
  return FinishRead(image, "png decode");
}

std::vector<std::uint8_t> EncodePng(const RasterImage& img) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width());
  image.height = static_cast<png_uint_32>(img.height());
  image.format = FormatFor(img.channels());
  png_alloc_size_t size = 0;
  if (!png_image_write_get_memory_size(image, size, 0, img.pixels().data(), 0,
                                       nullptr)) {
    throw Error(ErrorKind::kIo, std::string("png encode: ") + image.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&image, out.data(), &size, 0,
                                 img.pixels().data(), 0, nullptr)) {
    throw Error(ErrorKind::kIo, std::string("png encode: ") + image.message);
  }
  out.resize(size);
  return out;
}

void WritePng(const std::filesystem::path& path, const RasterImage& img) {
  const auto bytes = EncodePng(img);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  os.write(reinterpret_cast<const char*>(bytes.data()),
           static_cast<std::streamsize>(bytes.size()));
  if (!os) throw Error(ErrorKind::kIo, "write failed: " + path.string());
}

BinaryMask ReadMaskPng(const std::filesystem::path& path) {
  return Binarize(ToLuminance(ReadPng(path)), 128);
}

void WriteMaskPng(const std::filesystem::path& path, const BinaryMask& mask) {
  WritePng(path, LiftMask(mask, 1));
}

}  // namespace mangasfx
