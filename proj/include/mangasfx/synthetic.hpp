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

#include "json.hpp"

namespace mangasfx {

// Procedural corpus in the on-disk annotation layout: one distorted,
// outlined sound-effect word per page over a textured background.
struct SyntheticConfig {
  int train_samples = 500;
  int test_samples = 50;
  int pages_per_title = 10;
  int min_page_side = 320;
  int max_page_side = 420;
  std::uint64_t seed = 7;

  nlohmann::json ToJson() const;
  static SyntheticConfig FromJson(const nlohmann::json& j);
};

// Writes pages/, masks/, text.jsonl and split_table.json under `root`.
// Output is a pure function of the config.
void GenerateSyntheticCorpus(const SyntheticConfig& config,
                             const std::filesystem::path& root);

}  // namespace mangasfx
