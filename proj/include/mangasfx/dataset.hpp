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
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "mangasfx/raster.hpp"
#include "mangasfx/sample.hpp"

namespace mangasfx {

// Text label with its placement polygon, in page coordinates.
struct TextAnnotation {
  std::string page_id;
  std::string title;
  std::string text;
  PolygonRegion polygon;
};

// One connected onomatopoeia region of a page's instance-id mask.
struct MaskInstance {
  std::string page_id;
  int instance_id = 0;
  Box box;
};

struct AnnotationRecord {
  std::string page_id;
  std::string title;
  std::string text;
  PolygonRegion polygon;
  std::filesystem::path page_image;
  std::filesystem::path mask_image;
  int instance_id = 0;
  int page_width = 0;
  int page_height = 0;
};

// Intersection over union of two boxes; 0 when either is empty.
double BoxIou(const Box& a, const Box& b);

// Maximum-total-weight assignment of rows to columns (Hungarian method).
// result[i] is the column of row i or -1. Pairs of weight <= 0 are left
// unassigned.
std::vector<int> MaxWeightAssignment(const std::vector<std::vector<double>>& weight);

struct MergeResult {
  std::vector<AnnotationRecord> records;
  long dropped_text = 0;
  long dropped_masks = 0;
};

// Pairs text boxes with mask instances per page by maximal total bbox IoU,
// ignoring pairs below `min_iou`. Unpaired annotations are dropped and
// counted. `pages` maps page_id to its image path; page ids without an
// existing image raise kIngest.
MergeResult MergeSources(const std::vector<MaskInstance>& masks,
                         const std::vector<TextAnnotation>& texts,
                         const std::map<std::string, std::filesystem::path>& pages,
                         const std::map<std::string, std::filesystem::path>& mask_images,
                         double min_iou = 0.3);

// Keeps records whose page is larger than `min_side` on both axes, strictly
// unless `inclusive`.
std::vector<AnnotationRecord> FilterMinSize(std::vector<AnnotationRecord> records,
                                            int min_side = 300,
                                            bool inclusive = false);

struct SplitTable {
  std::map<std::string, Split> by_title;

  static SplitTable FromJson(const nlohmann::json& j);  // {"train": [...], "test": [...]}
  nlohmann::json ToJson() const;
};

struct SplitRecord {
  AnnotationRecord record;
  Split split = Split::kTrain;
};

// Throws kConfig naming the first title missing from the table.
std::vector<SplitRecord> SplitByTitle(const std::vector<AnnotationRecord>& records,
                                      const SplitTable& table);

// Page-to-canvas mapping of one sample: the polygon box expanded by
// `expand` of its size per side, clamped to the page, scaled so the long
// side equals `canvas` and padded at the bottom/right to a square.
struct CanvasWindow {
  Box window;
  int canvas = 0;
  int scaled_width = 0;
  int scaled_height = 0;

  static CanvasWindow Around(const PolygonRegion& polygon, int page_width,
                             int page_height, int canvas, double expand = 0.5);
  PolygonRegion ToCanvas(const PolygonRegion& page_polygon) const;
  RasterImage Apply(const RasterImage& page, std::uint8_t fill = 255) const;
  BinaryMask Apply(const BinaryMask& page_mask) const;
};

// Whitens the polygon interior and strokes its 1px black outline.
RasterImage MarkRegion(const RasterImage& image, const PolygonRegion& polygon);

// y: the windowed page with the polygon marked (canvas coordinates).
RasterImage BuildContextImage(const RasterImage& page,
                              const PolygonRegion& page_polygon,
                              const CanvasWindow& window);

struct GroundTruth {
  BinaryMask mask;    // x_m
  RasterImage image;  // x
};

// x_m from the instance mask inside the window, x the windowed page.
// Throws kEmptyGroundTruth when the window holds no mask pixel.
GroundTruth ExtractGt(const RasterImage& page, const BinaryMask& instance_mask,
                      const CanvasWindow& window);

class CaptionerBackend {
 public:
  virtual ~CaptionerBackend() = default;
  virtual std::string Caption(const RasterImage& context) = 0;
  virtual std::string Identity() const = 0;
};

class ReferenceCaptioner : public CaptionerBackend {
 public:
  std::string Caption(const RasterImage&) override { return "a manga panel"; }
  std::string Identity() const override { return "reference-captioner"; }
};

inline constexpr char kDefaultPromptTemplate[] =
    "Draw a stylized manga onomatopoeia for the marked region. Scene: "
    "{caption}";

struct PromptBundle {
  std::string prompt_template;
  std::string caption;
  std::string rendered;
  std::vector<std::string> warnings;
};

std::string RenderTemplate(const std::string& prompt_template,
                           const std::string& caption);

// Captioner failures fall back to an empty caption with a warning.
PromptBundle BuildPrompt(const RasterImage& context, CaptionerBackend& captioner,
                         const std::string& prompt_template = kDefaultPromptTemplate);

// On-disk annotation corpus:
//   pages/<page_id>.png        page images
//   masks/<page_id>.png        8-bit instance ids, 0 = background
//   text.jsonl                 {"page_id", "title", "text", "polygon"}
//   split_table.json           {"train": [titles], "test": [titles]}
struct CorpusLayout {
  std::filesystem::path root;

  std::filesystem::path pages_dir() const { return root / "pages"; }
  std::filesystem::path masks_dir() const { return root / "masks"; }
  std::filesystem::path text_file() const { return root / "text.jsonl"; }
  std::filesystem::path split_file() const { return root / "split_table.json"; }
};

std::vector<TextAnnotation> ReadTextAnnotations(const std::filesystem::path& path);
void WriteTextAnnotations(const std::filesystem::path& path,
                          const std::vector<TextAnnotation>& annotations);
// Bounding boxes of each nonzero id in an instance mask image.
std::vector<MaskInstance> ReadMaskInstances(const std::string& page_id,
                                            const RasterImage& id_mask);
SplitTable ReadSplitTable(const std::filesystem::path& path);

struct DatasetConfig {
  int canvas = 64;
  double context_expand = 0.5;
  int min_side = 300;
  bool min_side_inclusive = false;
  double min_iou = 0.3;
  std::string prompt_template = kDefaultPromptTemplate;

  nlohmann::json ToJson() const;
  static DatasetConfig FromJson(const nlohmann::json& j);
};

struct BuildSummary {
  long pages = 0;
  long text_annotations = 0;
  long mask_instances = 0;
  long merged = 0;
  long dropped_unmatched = 0;
  long filtered_small = 0;
  long skipped_samples = 0;
  long train = 0;
  long test = 0;
  long train_pages = 0;
  long test_pages = 0;
  std::vector<std::string> warnings;
  std::filesystem::path manifest;

  nlohmann::json ToJson() const;
};

// Reads the corpus, builds every sample into `out_dir/images` and writes
// `out_dir/manifest.jsonl`. Samples are built in parallel; the manifest is
// sorted by sample_id.
BuildSummary BuildDataset(const CorpusLayout& corpus,
                          const std::filesystem::path& out_dir,
                          const DatasetConfig& config,
                          CaptionerBackend& captioner);

}  // namespace mangasfx
