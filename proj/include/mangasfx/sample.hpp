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

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "mangasfx/raster.hpp"

namespace mangasfx {

enum class Split { kTrain, kTest };

std::string ToString(Split split);
Split ParseSplit(const std::string& s);

// One manifest line. Image paths are relative to the manifest's directory.
struct SampleRecord {
  std::string sample_id;
  Split split = Split::kTrain;
  std::string y_m;  // plain-text render
  std::string y;    // marked context image
  std::string x_m;  // ground-truth shape mask
  std::string x;    // ground-truth onomatopoeia RGB crop
  std::string prompt;
  PolygonRegion polygon;  // canvas coordinates
  std::string text;

  friend bool operator==(const SampleRecord&, const SampleRecord&) = default;
};

nlohmann::json ToJson(const PolygonRegion& poly);
PolygonRegion PolygonFromJson(const nlohmann::json& j);

nlohmann::json ToJson(const SampleRecord& r);
SampleRecord SampleFromJson(const nlohmann::json& j);

// JSON-lines manifest, one record per line, sorted by sample_id on write.
void WriteManifest(const std::filesystem::path& path,
                   std::vector<SampleRecord> records);
std::vector<SampleRecord> ReadManifest(const std::filesystem::path& path);

// Decoded images of one sample.
struct SampleImages {
  std::string sample_id;
  RasterImage y_m;
  RasterImage y;
  BinaryMask x_m;
  RasterImage x;
  std::string prompt;
  PolygonRegion polygon;
  std::string text;
};

// Loads and checks that all four images share one canvas size.
SampleImages LoadSample(const SampleRecord& record,
                        const std::filesystem::path& root);

}  // namespace mangasfx
