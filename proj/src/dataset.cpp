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

#include "mangasfx/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <set>

#include "mangasfx/error.hpp"
#include "mangasfx/glyphs.hpp"
#include "mangasfx/png_io.hpp"

namespace mangasfx {

double BoxIou(const Box& a, const Box& b) {
  if (a.empty() || b.empty()) return 0.0;
  const int ix = std::max(0, std::min(a.right(), b.right()) - std::max(a.x, b.x));
  const int iy =
      std::max(0, std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y));
  const double inter = static_cast<double>(ix) * iy;
  const double uni = static_cast<double>(a.width) * a.height +
                     static_cast<double>(b.width) * b.height - inter;
  return inter / uni;
}

std::vector<int> MaxWeightAssignment(
    const std::vector<std::vector<double>>& weight) {
  const int rows = static_cast<int>(weight.size());
  int cols = 0;
  for (const auto& r : weight) cols = std::max(cols, static_cast<int>(r.size()));
  const int n = std::max(rows, cols);
  std::vector<int> result(rows, -1);
  if (n == 0) return result;
  auto cost = [&](int i, int j) {
    if (i >= rows || j >= static_cast<int>(weight[i].size())) return 0.0;
    return -std::max(0.0, weight[i][j]);
  };
  // Potentials-based Hungarian method on the padded square matrix,
  // 1-indexed with row 0 / column 0 as sentinels.
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> match(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = match[j0];
      double delta = kInf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const int j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0);
  }
  for (int j = 1; j <= n; ++j) {
    const int i = match[j] - 1;
    if (i < rows && j - 1 < static_cast<int>(weight[i].size()) &&
        weight[i][j - 1] > 0.0) {
      result[i] = j - 1;
    }
  }
  return result;
}

MergeResult MergeSources(
    const std::vector<MaskInstance>& masks,
    const std::vector<TextAnnotation>& texts,
    const std::map<std::string, std::filesystem::path>& pages,
    const std::map<std::string, std::filesystem::path>& mask_images,
    double min_iou) {
  std::map<std::string, std::vector<const TextAnnotation*>> text_by_page;
  std::map<std::string, std::vector<const MaskInstance*>> mask_by_page;
  for (const auto& t : texts) text_by_page[t.page_id].push_back(&t);
  for (const auto& m : masks) mask_by_page[m.page_id].push_back(&m);

  std::vector<std::string> missing;
  for (const auto& [page, _] : text_by_page) {
    const auto it = pages.find(page);
    if (it == pages.end() || !std::filesystem::exists(it->second)) {
      missing.push_back(page);
    }
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& p : missing) list += (list.empty() ? "" : ", ") + p;
    throw Error(ErrorKind::kIngest, "missing page images: " + list);
  }

  MergeResult out;
  for (const auto& [page, page_masks] : mask_by_page) {
    if (!text_by_page.count(page)) out.dropped_masks += page_masks.size();
  }
  for (const auto& [page, page_texts] : text_by_page) {
    const auto mit = mask_by_page.find(page);
    if (mit == mask_by_page.end()) {
      out.dropped_text += page_texts.size();
      continue;
    }
    const auto& page_masks = mit->second;
    std::vector<std::vector<double>> w(page_texts.size(),
                                       std::vector<double>(page_masks.size()));
    for (std::size_t i = 0; i < page_texts.size(); ++i) {
      const Box tb = page_texts[i]->polygon.BoundingBox();
      for (std::size_t j = 0; j < page_masks.size(); ++j) {
        const double iou = BoxIou(tb, page_masks[j]->box);
        w[i][j] = iou >= min_iou ? iou : 0.0;
      }
    }
    const std::vector<int> assign = MaxWeightAssignment(w);
    std::vector<char> mask_used(page_masks.size(), 0);
    for (std::size_t i = 0; i < page_texts.size(); ++i) {
      if (assign[i] < 0) {
        ++out.dropped_text;
        continue;
      }
      mask_used[assign[i]] = 1;
      const TextAnnotation& t = *page_texts[i];
      AnnotationRecord r;
      r.page_id = page;
      r.title = t.title;
      r.text = t.text;
      r.polygon = t.polygon;
      r.page_image = pages.at(page);
      const auto mi = mask_images.find(page);
      if (mi != mask_images.end()) r.mask_image = mi->second;
      r.instance_id = page_masks[assign[i]]->instance_id;
      out.records.push_back(std::move(r));
    }
    out.dropped_masks += std::count(mask_used.begin(), mask_used.end(), 0);
  }
  return out;
}

std::vector<AnnotationRecord> FilterMinSize(
    std::vector<AnnotationRecord> records, int min_side, bool inclusive) {
  std::erase_if(records, [&](const AnnotationRecord& r) {
    return inclusive
               ? (r.page_width < min_side || r.page_height < min_side)
               : (r.page_width <= min_side || r.page_height <= min_side);
  });
  return records;
}

SplitTable SplitTable::FromJson(const nlohmann::json& j) {
  SplitTable t;
  for (const auto& [key, split] :
       {std::pair{"train", Split::kTrain}, std::pair{"test", Split::kTest}}) {
    if (!j.contains(key)) continue;
    for (const auto& title : j.at(key)) {
      const auto name = title.get<std::string>();
      const auto [it, inserted] = t.by_title.emplace(name, split);
      if (!inserted && it->second != split) {
        throw Error(ErrorKind::kConfig,
                    "title '" + name + "' listed in both splits");
      }
    }
  }
  return t;
}

nlohmann::json SplitTable::ToJson() const {
  nlohmann::json j = {{"train", nlohmann::json::array()},
                      {"test", nlohmann::json::array()}};
  for (const auto& [title, split] : by_title) j[ToString(split)].push_back(title);
  return j;
}

std::vector<SplitRecord> SplitByTitle(
    const std::vector<AnnotationRecord>& records, const SplitTable& table) {
  std::vector<SplitRecord> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    const auto it = table.by_title.find(r.title);
    if (it == table.by_title.end()) {
      throw Error(ErrorKind::kConfig,
                  "title '" + r.title + "' is not in the split table");
    }
    out.push_back({r, it->second});
  }
  return out;
}

CanvasWindow CanvasWindow::Around(const PolygonRegion& polygon, int page_width,
                                  int page_height, int canvas, double expand) {
  if (canvas <= 0) throw Error(ErrorKind::kConfig, "canvas must be positive");
  const Box b = polygon.BoundingBox();
  if (b.empty()) {
    throw Error(ErrorKind::kDegeneratePolygon, "polygon box has zero area");
  }
  const int ex = static_cast<int>(std::ceil(b.width * expand));
  const int ey = static_cast<int>(std::ceil(b.height * expand));
  const int x0 = std::clamp(b.x - ex, 0, page_width);
  const int y0 = std::clamp(b.y - ey, 0, page_height);
  const int x1 = std::clamp(b.right() + ex, 0, page_width);
  const int y1 = std::clamp(b.bottom() + ey, 0, page_height);
  if (x1 <= x0 || y1 <= y0) {
    throw Error(ErrorKind::kDegeneratePolygon, "polygon lies off the page");
  }
  CanvasWindow w;
  w.window = {x0, y0, x1 - x0, y1 - y0};
  w.canvas = canvas;
  const double longest = std::max(w.window.width, w.window.height);
  w.scaled_width = std::max(
      1, static_cast<int>(std::floor(w.window.width * canvas / longest + 0.5)));
  w.scaled_height = std::max(
      1, static_cast<int>(std::floor(w.window.height * canvas / longest + 0.5)));
  return w;
}

PolygonRegion CanvasWindow::ToCanvas(const PolygonRegion& page_polygon) const {
  const double sx = static_cast<double>(scaled_width) / window.width;
  const double sy = static_cast<double>(scaled_height) / window.height;
  PolygonRegion out;
  for (const Point& p : page_polygon.vertices) {
    out.vertices.push_back({(p.x - window.x) * sx, (p.y - window.y) * sy});
  }
  return out;
}

RasterImage CanvasWindow::Apply(const RasterImage& page,
                                std::uint8_t fill) const {
  const RasterImage scaled =
      Resize(ToRgb(Crop(page, window)), scaled_width, scaled_height);
  return PadTo(scaled, canvas, canvas, fill);
}

BinaryMask CanvasWindow::Apply(const BinaryMask& page_mask) const {
  BinaryMask crop = Crop(page_mask, window);
  if (scaled_width != crop.width() || scaled_height != crop.height()) {
    crop = Binarize(Resize(LiftMask(crop, 1), scaled_width, scaled_height));
  }
  return PadTo(crop, canvas, canvas);
}

RasterImage MarkRegion(const RasterImage& image, const PolygonRegion& polygon) {
  const BinaryMask inside =
      RasterizePolygon(polygon, image.width(), image.height());
  const BinaryMask outline =
      PolygonOutline(polygon, image.width(), image.height());
  RasterImage out = image;
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      if (!inside.at(x, y) && !outline.at(x, y)) continue;
      const std::uint8_t v = outline.at(x, y) ? 0 : 255;
      for (int c = 0; c < image.channels(); ++c) out.at(x, y, c) = v;
    }
  }
  return out;
}

RasterImage BuildContextImage(const RasterImage& page,
                              const PolygonRegion& page_polygon,
                              const CanvasWindow& window) {
  return MarkRegion(window.Apply(page), window.ToCanvas(page_polygon));
}

GroundTruth ExtractGt(const RasterImage& page, const BinaryMask& instance_mask,
                      const CanvasWindow& window) {
  if (instance_mask.width() != page.width() ||
      instance_mask.height() != page.height()) {
    throw Error(ErrorKind::kDimension, "instance mask and page differ in size");
  }
  GroundTruth gt{window.Apply(instance_mask), window.Apply(page)};
  if (gt.mask.count() == 0) {
    throw Error(ErrorKind::kEmptyGroundTruth,
                "no onomatopoeia pixels inside the context window");
  }
  return gt;
}

std::string RenderTemplate(const std::string& prompt_template,
                           const std::string& caption) {
  static const std::string kPlaceholder = "{caption}";
  std::string out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t hit = prompt_template.find(kPlaceholder, pos);
    if (hit == std::string::npos) break;
    out.append(prompt_template, pos, hit - pos);
    out += caption;
    pos = hit + kPlaceholder.size();
  }
  out.append(prompt_template, pos);
  return out;
}

PromptBundle BuildPrompt(const RasterImage& context, CaptionerBackend& captioner,
                         const std::string& prompt_template) {
  PromptBundle b;
  b.prompt_template = prompt_template;
  try {
    b.caption = captioner.Caption(context);
  } catch (const std::exception& e) {
    b.caption.clear();
    b.warnings.push_back(captioner.Identity() + " failed: " + e.what());
  }
  b.rendered = RenderTemplate(prompt_template, b.caption);
  return b;
}

std::vector<TextAnnotation> ReadTextAnnotations(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIngest, "cannot open " + path.string());
  std::vector<TextAnnotation> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    try {
      const auto j = nlohmann::json::parse(line);
      TextAnnotation t;
      t.page_id = j.at("page_id").get<std::string>();
      t.title = j.at("title").get<std::string>();
      t.text = j.at("text").get<std::string>();
      t.polygon = PolygonFromJson(j.at("polygon"));
      if (t.text.empty()) {
        throw Error(ErrorKind::kIngest, "empty text for page " + t.page_id);
      }
      out.push_back(std::move(t));
    } catch (const Error& e) {
      throw Error(ErrorKind::kIngest, where + ": " + e.what());
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::kIngest, where + ": " + e.what());
    }
  }
  return out;
}

void WriteTextAnnotations(const std::filesystem::path& path,
                          const std::vector<TextAnnotation>& annotations) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  for (const auto& t : annotations) {
    const nlohmann::json j = {{"page_id", t.page_id},
                              {"title", t.title},
                              {"text", t.text},
                              {"polygon", ToJson(t.polygon)}};
    out << j.dump() << '\n';
  }
}

std::vector<MaskInstance> ReadMaskInstances(const std::string& page_id,
                                            const RasterImage& id_mask) {
  std::map<int, std::array<int, 4>> extent;  // x0, y0, x1, y1
  for (int y = 0; y < id_mask.height(); ++y) {
    for (int x = 0; x < id_mask.width(); ++x) {
      const int id = id_mask.at(x, y, 0);
      if (id == 0) continue;
      auto [it, fresh] = extent.try_emplace(id, std::array{x, y, x, y});
      if (fresh) continue;
      auto& e = it->second;
      e = {std::min(e[0], x), std::min(e[1], y), std::max(e[2], x),
           std::max(e[3], y)};
    }
  }
  std::vector<MaskInstance> out;
  for (const auto& [id, e] : extent) {
    out.push_back({page_id, id, {e[0], e[1], e[2] - e[0] + 1, e[3] - e[1] + 1}});
  }
  return out;
}

SplitTable ReadSplitTable(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kConfig, "cannot open " + path.string());
  try {
    return SplitTable::FromJson(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kConfig, path.string() + ": " + e.what());
  }
}

nlohmann::json DatasetConfig::ToJson() const {
  return {{"canvas", canvas},
          {"context_expand", context_expand},
          {"min_side", min_side},
          {"min_side_inclusive", min_side_inclusive},
          {"min_iou", min_iou},
          {"prompt_template", prompt_template}};
}

DatasetConfig DatasetConfig::FromJson(const nlohmann::json& j) {
  DatasetConfig c;
  c.canvas = j.value("canvas", c.canvas);
  c.context_expand = j.value("context_expand", c.context_expand);
  c.min_side = j.value("min_side", c.min_side);
  c.min_side_inclusive = j.value("min_side_inclusive", c.min_side_inclusive);
  c.min_iou = j.value("min_iou", c.min_iou);
  c.prompt_template = j.value("prompt_template", c.prompt_template);
  if (c.canvas <= 0 || c.canvas % 8 != 0) {
    throw Error(ErrorKind::kConfig, "canvas must be a positive multiple of 8");
  }
  return c;
}

nlohmann::json BuildSummary::ToJson() const {
  return {{"pages", pages},
          {"text_annotations", text_annotations},
          {"mask_instances", mask_instances},
          {"merged", merged},
          {"dropped_unmatched", dropped_unmatched},
          {"filtered_small", filtered_small},
          {"skipped_samples", skipped_samples},
          {"train", train},
          {"test", test},
          {"train_pages", train_pages},
          {"test_pages", test_pages},
          {"warnings", warnings},
          {"manifest", manifest.string()}};
}

namespace {

BinaryMask InstanceMask(const RasterImage& ids, int instance_id) {
  BinaryMask m(ids.width(), ids.height());
  for (int y = 0; y < ids.height(); ++y)
    for (int x = 0; x < ids.width(); ++x)
      m.at(x, y) = ids.at(x, y, 0) == instance_id;
  return m;
}

std::string PaddedIndex(int i) {
  std::string s = std::to_string(i);
  return std::string(s.size() < 3 ? 3 - s.size() : 0, '0') + s;
}

}  // namespace

BuildSummary BuildDataset(const CorpusLayout& corpus,
                          const std::filesystem::path& out_dir,
                          const DatasetConfig& config,
                          CaptionerBackend& captioner) {
  namespace fs = std::filesystem;
  BuildSummary summary;
  const auto texts = ReadTextAnnotations(corpus.text_file());
  const SplitTable table = ReadSplitTable(corpus.split_file());
  summary.text_annotations = static_cast<long>(texts.size());

  std::map<std::string, fs::path> pages, mask_images;
  std::set<std::string> page_ids;
  for (const auto& t : texts) page_ids.insert(t.page_id);
  for (const auto& id : page_ids) {
    pages[id] = corpus.pages_dir() / (id + ".png");
    const fs::path m = corpus.masks_dir() / (id + ".png");
    if (fs::exists(m)) mask_images[id] = m;
  }
  summary.pages = static_cast<long>(page_ids.size());

  std::vector<std::pair<std::string, fs::path>> mask_list(mask_images.begin(),
                                                          mask_images.end());
  std::vector<std::vector<MaskInstance>> per_page(mask_list.size());
  std::vector<std::string> read_errors(mask_list.size());
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < mask_list.size(); ++i) {
    try {
      per_page[i] = ReadMaskInstances(mask_list[i].first,
                                      ReadPng(mask_list[i].second));
    } catch (const std::exception& e) {
      read_errors[i] = mask_list[i].first + ": " + e.what();
    }
  }
  std::vector<MaskInstance> masks;
  for (std::size_t i = 0; i < per_page.size(); ++i) {
    if (!read_errors[i].empty()) throw Error(ErrorKind::kIngest, read_errors[i]);
    masks.insert(masks.end(), per_page[i].begin(), per_page[i].end());
  }
  summary.mask_instances = static_cast<long>(masks.size());

  MergeResult merged =
      MergeSources(masks, texts, pages, mask_images, config.min_iou);
  summary.merged = static_cast<long>(merged.records.size());
  summary.dropped_unmatched = merged.dropped_text;
  if (merged.dropped_text > 0) {
    summary.warnings.push_back("dropped " + std::to_string(merged.dropped_text) +
                               " text annotations without a matching mask");
  }
  std::map<std::string, std::pair<int, int>> sizes;
  for (auto& r : merged.records) {
    auto it = sizes.find(r.page_id);
    if (it == sizes.end()) {
      it = sizes.emplace(r.page_id, ReadPngSize(r.page_image)).first;
    }
    std::tie(r.page_width, r.page_height) = it->second;
  }
  const auto kept = FilterMinSize(std::move(merged.records), config.min_side,
                                  config.min_side_inclusive);
  summary.filtered_small = summary.merged - static_cast<long>(kept.size());
  const auto split = SplitByTitle(kept, table);

  std::vector<std::string> ids(split.size());
  std::map<std::string, int> per_page_count;
  for (std::size_t i = 0; i < split.size(); ++i) {
    const auto& page = split[i].record.page_id;
    ids[i] = page + "_" + PaddedIndex(per_page_count[page]++);
  }

  const fs::path images = out_dir / "images";
  fs::create_directories(images);
  std::vector<std::optional<SampleRecord>> built(split.size());
  std::vector<std::string> notes(split.size());
  std::vector<std::string> failures(split.size());
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < split.size(); ++i) {
    const AnnotationRecord& a = split[i].record;
    try {
      const RasterImage page = ReadPng(a.page_image);
      const CanvasWindow window =
          CanvasWindow::Around(a.polygon, page.width(), page.height(),
                               config.canvas, config.context_expand);
      const GroundTruth gt =
          ExtractGt(page, InstanceMask(ReadPng(a.mask_image), a.instance_id),
                    window);
      const PolygonRegion polygon = window.ToCanvas(a.polygon);
      const RasterImage y = MarkRegion(gt.image, polygon);
      const PlainTextRender ym =
          RenderPlainText(a.text, polygon, config.canvas, config.canvas);
      PromptBundle prompt;
#pragma omp critical(mangasfx_captioner)
      prompt = BuildPrompt(y, captioner, config.prompt_template);

      SampleRecord r;
      r.sample_id = ids[i];
      r.split = split[i].split;
      r.y_m = "images/" + ids[i] + "_ym.png";
      r.y = "images/" + ids[i] + "_y.png";
      r.x_m = "images/" + ids[i] + "_xm.png";
      r.x = "images/" + ids[i] + "_x.png";
      r.prompt = prompt.rendered;
      r.polygon = polygon;
      r.text = a.text;
      WritePng(out_dir / r.y_m, ym.image);
      WritePng(out_dir / r.y, y);
      WriteMaskPng(out_dir / r.x_m, gt.mask);
      WritePng(out_dir / r.x, gt.image);
      for (const auto& w : ym.warnings) notes[i] += ids[i] + ": " + w + "\n";
      for (const auto& w : prompt.warnings) notes[i] += ids[i] + ": " + w + "\n";
      built[i] = std::move(r);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::kEmptyGroundTruth ||
          e.kind() == ErrorKind::kDegeneratePolygon) {
        notes[i] = ids[i] + " skipped: " + e.what() + "\n";
      } else {
        failures[i] = ids[i] + " (page " + a.page_id + "): " + e.what();
      }
    } catch (const std::exception& e) {
      failures[i] = ids[i] + " (page " + a.page_id + "): " + e.what();
    }
  }
  for (const auto& f : failures) {
    if (!f.empty()) throw Error(ErrorKind::kIngest, f);
  }

  std::vector<SampleRecord> records;
  std::set<std::string> train_pages, test_pages;
  for (std::size_t i = 0; i < split.size(); ++i) {
    std::size_t pos = 0;
    while (pos < notes[i].size()) {
      const std::size_t nl = notes[i].find('\n', pos);
      summary.warnings.push_back(notes[i].substr(pos, nl - pos));
      pos = nl + 1;
    }
    if (!built[i]) {
      ++summary.skipped_samples;
      continue;
    }
    const bool train = built[i]->split == Split::kTrain;
    (train ? summary.train : summary.test)++;
    (train ? train_pages : test_pages).insert(split[i].record.page_id);
    records.push_back(std::move(*built[i]));
  }
  summary.train_pages = static_cast<long>(train_pages.size());
  summary.test_pages = static_cast<long>(test_pages.size());
  summary.manifest = out_dir / "manifest.jsonl";
  WriteManifest(summary.manifest, std::move(records));
  return summary;
}

}  // namespace mangasfx
