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

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "mangasfx/raster.hpp"

namespace mangasfx {

// 8-bit PNG. Gray, RGB and RGBA files keep their channel count; gray+alpha
// and palette files are expanded to RGBA.
RasterImage ReadPng(const std::filesystem::path& path);
void WritePng(const std::filesystem::path& path, const RasterImage& img);
// (width, height) from the header only.
std::pair<int, int> ReadPngSize(const std::filesystem::path& path);

std::vector<std::uint8_t> EncodePng(const RasterImage& img);
RasterImage DecodePng(const std::vector<std::uint8_t>& bytes);

// Masks are stored as single-channel PNG with values {0, 255}.
BinaryMask ReadMaskPng(const std::filesystem::path& path);
void WriteMaskPng(const std::filesystem::path& path, const BinaryMask& mask);

}  // namespace mangasfx
