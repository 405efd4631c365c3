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

#include "mangasfx/sample.hpp"

#include <algorithm>
#include <fstream>

#include "mangasfx/error.hpp"
#include "mangasfx/png_io.hpp"

namespace mangasfx {

using nlohmann::json;

std::string ToString(Split split) {
  return split == Split::kTrain ? "train" : "test";
}

Split ParseSplit(const std::string& s) {
  if (s == "train") return Split::kTrain;
  if (s == "test") return Split::kTest;
  throw Error(ErrorKind::kConfig, "unknown split '" + s + "'");
}

json ToJson(const PolygonRegion& poly) {
  json arr = json::array();
  for (const Point& p : poly.vertices) arr.push_back({p.x, p.y});
  return arr;
}

PolygonRegion PolygonFromJson(const json& j) {
  PolygonRegion poly;
  for (const auto& v : j) {
    poly.vertices.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
  }
  return poly;
}

json ToJson(const SampleRecord& r) {
  return json{{"sample_id", r.sample_id}, {"split", ToString(r.split)},
              {"y_m", r.y_m},             {"y", r.y},
              {"x_m", r.x_m},             {"x", r.x},
              {"prompt", r.prompt},       {"polygon", ToJson(r.polygon)},
              {"text", r.text}};
}

SampleRecord SampleFromJson(const json& j) {
  SampleRecord r;
  r.sample_id = j.at("sample_id").get<std::string>();
  r.split = ParseSplit(j.at("split").get<std::string>());
  r.y_m = j.at("y_m").get<std::string>();
  r.y = j.at("y").get<std::string>();
  r.x_m = j.at("x_m").get<std::string>();
  r.x = j.at("x").get<std::string>();
  r.prompt = j.at("prompt").get<std::string>();
  r.polygon = PolygonFromJson(j.at("polygon"));
  r.text = j.at("text").get<std::string>();
  return r;
}

void WriteManifest(const std::filesystem::path& path,
                   std::vector<SampleRecord> records) {
  std::sort(records.begin(), records.end(),
            [](const SampleRecord& a, const SampleRecord& b) {
              return a.sample_id < b.sample_id;
            });
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  for (const auto& r : records) os << ToJson(r).dump() << '\n';
}

std::vector<SampleRecord> ReadManifest(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorKind::kIo, "cannot read " + path.string());
  std::vector<SampleRecord> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    out.push_back(SampleFromJson(json::parse(line)));
  }
  return out;
}

SampleImages LoadSample(const SampleRecord& record,
                        const std::filesystem::path& root) {
  SampleImages s;
  s.sample_id = record.sample_id;
  s.y_m = ReadPng(root / record.y_m);
  s.y = ReadPng(root / record.y);
  s.x_m = ReadMaskPng(root / record.x_m);
  s.x = ReadPng(root / record.x);
  s.prompt = record.prompt;
  s.polygon = record.polygon;
  s.text = record.text;
  const int w = s.y.width();
  const int h = s.y.height();
  const bool same = s.y_m.width() == w && s.y_m.height() == h &&
                    s.x_m.width() == w && s.x_m.height() == h &&
                    s.x.width() == w && s.x.height() == h;
  if (!same) {
    throw Error(ErrorKind::kShape,
                "sample " + record.sample_id + ": images differ in size");
  }
  return s;
}

}  // namespace mangasfx
