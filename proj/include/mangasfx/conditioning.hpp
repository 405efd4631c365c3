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

#include <string>

#include "mangasfx/flow.hpp"
#include "mangasfx/incontext.hpp"
#include "mangasfx/sample.hpp"
#include "mangasfx/toy_backend.hpp"

namespace mangasfx {

// kInContext: condition = Concat(y_m, y), target = Concat(lift(x_m), x).
// kPlain: condition = y_m with y as a second channel group, target =
// lift(x_m) alone, no adapters.
enum class ConditioningMode { kInContext, kPlain };

std::string ToString(ConditioningMode mode);
ConditioningMode ParseConditioningMode(const std::string& s);

struct FlowTask {
  ConditioningMode mode = ConditioningMode::kInContext;
  int canvas = 64;
  PackingCodec codec;
  SlotLayout layout;

  LatentShape TargetShape() const;
  int ConditionChannels() const;

  Condition MakeCondition(const SampleImages& sample) const;
  LatentTensor MakeTarget(const SampleImages& sample) const;
  // Decoded RGB image of a generated latent (canvas-wide in plain mode,
  // double width in in-context mode).
  RasterImage DecodeOutput(const LatentTensor& latent) const;

  // Network shape for this task; adapters only in in-context mode.
  ToyNetConfig NetConfig(int hidden, int adapter_rank,
                         double adapter_scale) const;
};

}  // namespace mangasfx
