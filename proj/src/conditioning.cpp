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

#include "mangasfx/conditioning.hpp"

#include <algorithm>

#include "mangasfx/error.hpp"

namespace mangasfx {

std::string ToString(ConditioningMode mode) {
  return mode == ConditioningMode::kInContext ? "in_context" : "plain";
}

ConditioningMode ParseConditioningMode(const std::string& s) {
  if (s == "in_context") return ConditioningMode::kInContext;
  if (s == "plain") return ConditioningMode::kPlain;
  throw Error(ErrorKind::kConfig, "unknown conditioning mode '" + s + "'");
}

LatentShape FlowTask::TargetShape() const {
  const int width = mode == ConditioningMode::kInContext ? 2 * canvas : canvas;
  return codec.LatentShapeFor(width, canvas, 3);
}

int FlowTask::ConditionChannels() const {
  const int per_image = 3 * codec.factor * codec.factor;
  return mode == ConditioningMode::kInContext ? per_image : 2 * per_image;
}

Condition FlowTask::MakeCondition(const SampleImages& sample) const {
  Condition c;
  c.prompt = sample.prompt;
  if (mode == ConditioningMode::kInContext) {
    c.canvas = layout
                   .Compose(NormalizeHalf(sample.y_m, canvas),
                            NormalizeHalf(sample.y, canvas))
                   .image;
    c.latent = codec.Encode(c.canvas);
  } else {
    c.canvas = NormalizeHalf(sample.y_m, canvas);
    c.aux = NormalizeHalf(sample.y, canvas);
    const LatentTensor a = codec.Encode(c.canvas);
    const LatentTensor b = codec.Encode(c.aux);
    c.latent = LatentTensor({a.shape.channels + b.shape.channels,
                             a.shape.height, a.shape.width});
    std::copy(a.values.begin(), a.values.end(), c.latent.values.begin());
    std::copy(b.values.begin(), b.values.end(),
              c.latent.values.begin() + static_cast<std::ptrdiff_t>(a.values.size()));
  }
  return c;
}

LatentTensor FlowTask::MakeTarget(const SampleImages& sample) const {
  const RasterImage mask = LiftMask(NormalizeMask(sample.x_m, canvas), 3);
  if (mode == ConditioningMode::kPlain) return codec.Encode(mask);
  return codec.Encode(
      layout.Compose(mask, NormalizeHalf(sample.x, canvas)).image);
}

RasterImage FlowTask::DecodeOutput(const LatentTensor& latent) const {
  return codec.Decode(latent, 3);
}

ToyNetConfig FlowTask::NetConfig(int hidden, int adapter_rank,
                                 double adapter_scale) const {
  ToyNetConfig c;
  c.latent_channels = TargetShape().channels;
  c.cond_channels = ConditionChannels();
  c.hidden = hidden;
  c.adapters = mode == ConditioningMode::kInContext;
  c.adapter_rank = adapter_rank;
  c.adapter_scale = adapter_scale;
  return c;
}

}  // namespace mangasfx
