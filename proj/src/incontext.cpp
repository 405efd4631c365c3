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

#include "mangasfx/incontext.hpp"

#include <algorithm>
#include <sstream>

#include "mangasfx/error.hpp"

namespace mangasfx {

namespace {

std::string ShapeString(const RasterImage& img) {
  std::ostringstream os;
  os << img.width() << "x" << img.height() << "x" << img.channels();
  return os.str();
}

}  // namespace

ConcatCanvas ConcatH(const RasterImage& left, const RasterImage& right) {
  if (left.height() != right.height() || left.channels() != right.channels()) {
    throw Error(ErrorKind::kShape, "cannot concatenate " + ShapeString(left) +
                                       " with " + ShapeString(right));
  }
  ConcatCanvas out;
  out.left_width = left.width();
  out.right_width = right.width();
  out.seam = left.width();
  out.image = RasterImage(left.width() + right.width(), left.height(),
                          left.channels());
  for (int y = 0; y < left.height(); ++y) {
    const auto l = left.row(y);
    const auto r = right.row(y);
    auto* dst = &out.image.at(0, y, 0);
    std::copy(l.begin(), l.end(), dst);
    std::copy(r.begin(), r.end(), dst + l.size());
  }
  return out;
}

std::pair<RasterImage, RasterImage> SplitH(const ConcatCanvas& canvas) {
  const int w = canvas.image.width();
  if (canvas.seam <= 0 || canvas.seam >= w) {
    throw Error(ErrorKind::kSeam, "seam " + std::to_string(canvas.seam) +
                                      " outside (0, " + std::to_string(w) +
                                      ")");
  }
  const int h = canvas.image.height();
  return {Crop(canvas.image, {0, 0, canvas.seam, h}),
          Crop(canvas.image, {canvas.seam, 0, w - canvas.seam, h})};
}

ConcatCanvas WrapCanvas(RasterImage image, int seam) {
  ConcatCanvas c;
  c.seam = seam;
  c.left_width = seam;
  c.right_width = image.width() - seam;
  c.image = std::move(image);
  return c;
}

ConcatCanvas SlotLayout::Compose(const RasterImage& mask_member,
                                 const RasterImage& rgb_member) const {
  return mask_left ? ConcatH(mask_member, rgb_member)
                   : ConcatH(rgb_member, mask_member);
}

RasterImage SlotLayout::MaskHalf(const ConcatCanvas& canvas) const {
  auto halves = SplitH(canvas);
  return mask_left ? std::move(halves.first) : std::move(halves.second);
}

RasterImage SlotLayout::RgbHalf(const ConcatCanvas& canvas) const {
  auto halves = SplitH(canvas);
  return mask_left ? std::move(halves.second) : std::move(halves.first);
}

RasterImage NormalizeHalf(const RasterImage& img, int canvas) {
  return Resize(ToRgb(img), canvas, canvas);
}

BinaryMask NormalizeMask(const BinaryMask& mask, int canvas) {
  if (mask.width() == canvas && mask.height() == canvas) return mask;
  return Binarize(Resize(LiftMask(mask, 1), canvas, canvas), 128);
}

TrainingPair BuildTrainingPair(const SampleImages& sample, int canvas,
                               const SlotLayout& layout) {
  TrainingPair pair;
  pair.input = layout.Compose(NormalizeHalf(sample.y_m, canvas),
                              NormalizeHalf(sample.y, canvas));
  pair.target = layout.Compose(LiftMask(NormalizeMask(sample.x_m, canvas), 3),
                               NormalizeHalf(sample.x, canvas));
  pair.prompt = sample.prompt;
  return pair;
}

TrainingPair BuildTrainingPair(const SampleRecord& record,
                               const std::filesystem::path& root, int canvas,
                               const SlotLayout& layout) {
  try {
    return BuildTrainingPair(LoadSample(record, root), canvas, layout);
  } catch (const Error& e) {
    throw Error(e.kind(), "sample " + record.sample_id + ": " + e.what());
  }
}

}  // namespace mangasfx
