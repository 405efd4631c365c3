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

#include "mangasfx/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "mangasfx/digest.hpp"
#include "mangasfx/error.hpp"
#include "mangasfx/glyphs.hpp"
#include "mangasfx/png_io.hpp"
#include "mangasfx/text.hpp"

namespace mangasfx {

GaussianStats FitGaussian(const std::vector<Eigen::VectorXd>& features) {
  if (features.size() < 2) {
    throw Error(ErrorKind::kDimension,
                "need at least 2 feature vectors, got " +
                    std::to_string(features.size()));
  }
  const Eigen::Index d = features.front().size();
  Eigen::MatrixXd data(d, static_cast<Eigen::Index>(features.size()));
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (features[i].size() != d) {
      throw Error(ErrorKind::kDimension,
                  "feature " + std::to_string(i) + " has dimension " +
                      std::to_string(features[i].size()) + ", expected " +
                      std::to_string(d));
    }
    data.col(static_cast<Eigen::Index>(i)) = features[i];
  }
  GaussianStats s;
  s.count = static_cast<long>(features.size());
  s.mean = data.rowwise().mean();
  const Eigen::MatrixXd centered = data.colwise() - s.mean;
  const Eigen::MatrixXd cov =
      centered * centered.transpose() / static_cast<double>(s.count - 1);
  s.cov = 0.5 * (cov + cov.transpose());
  return s;
}

namespace {

// Eigenvalues of a symmetric matrix with negatives clamped to zero.
Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ClampedEigen(
    const Eigen::MatrixXd& m, const char* what,
    std::vector<std::string>* warnings, Eigen::VectorXd& values) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
      0.5 * (m + m.transpose()));
  values = solver.eigenvalues();
  const double lowest = values.size() ? values.minCoeff() : 0.0;
  if (lowest < -1e-6 && warnings) {
    std::ostringstream msg;
    msg << what << " has eigenvalue " << lowest << ", clamped to 0";
    warnings->push_back(msg.str());
  }
  values = values.cwiseMax(0.0);
  return solver;
}

}  // namespace

double FrechetDistance(const GaussianStats& a, const GaussianStats& b,
                       std::vector<std::string>* warnings) {
  if (a.mean.size() != b.mean.size() || a.cov.rows() != a.mean.size() ||
      b.cov.rows() != b.mean.size()) {
    throw Error(ErrorKind::kDimension,
                "Gaussian dimensions " + std::to_string(a.mean.size()) +
                    " and " + std::to_string(b.mean.size()) + " differ");
  }
  // Tr((S_a S_b)^(1/2)) is the sum of singular values of R_a R_b with
  // R = S^(1/2); the SVD avoids squaring the condition number.
  auto root = [&](const Eigen::MatrixXd& cov, const char* what, double& trace) {
    Eigen::VectorXd values;
    const auto es = ClampedEigen(cov, what, warnings, values);
    trace = values.sum();
    return Eigen::MatrixXd(es.eigenvectors() * values.cwiseSqrt().asDiagonal() *
                           es.eigenvectors().transpose());
  };
  double trace_a = 0.0, trace_b = 0.0;
  const Eigen::MatrixXd ra = root(a.cov, "first covariance", trace_a);
  const Eigen::MatrixXd rb = root(b.cov, "second covariance", trace_b);
  const double cross = Eigen::JacobiSVD<Eigen::MatrixXd>(ra * rb).singularValues().sum();
  const double d = (a.mean - b.mean).squaredNorm() + trace_a + trace_b - 2.0 * cross;
  if (!std::isfinite(d)) {
    throw Error(ErrorKind::kNonFinite, "Frechet distance is not finite");
  }
  return std::max(0.0, d);
}

std::size_t EditDistance(std::u32string_view a, std::u32string_view b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double NedPair(std::string_view pred, std::string_view gt) {
  const std::u32string p = DecodeUtf8(NormalizeNfc(pred));
  const std::u32string g = DecodeUtf8(NormalizeNfc(gt));
  const std::size_t longest = std::max(p.size(), g.size());
  if (longest == 0) return 1.0;
  return 1.0 - static_cast<double>(EditDistance(p, g)) / longest;
}

Eigen::VectorXd HistogramFeatures::Extract(const RasterImage& image) const {
  const RasterImage gray = ToLuminance(image);
  const int w = gray.width();
  const int h = gray.height();
  Eigen::VectorXd f = Eigen::VectorXd::Zero(68);
  std::array<double, 4> dark{}, total{};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int v = gray.at(x, y, 0);
      f[v / 4] += 1.0;
      const int block = (y * 2 / h) * 2 + (x * 2 / w);
      total[block] += 1.0;
      if (v < 128) dark[block] += 1.0;
    }
  }
  f.head(64) /= static_cast<double>(w) * h;
  for (int k = 0; k < 4; ++k) {
    f[64 + k] = total[k] > 0 ? dark[k] / total[k] : 0.0;
  }
  return f;
}

std::uint64_t ImageDigest(const RasterImage& image) {
  const int dims[3] = {image.width(), image.height(), image.channels()};
  const auto px = image.pixels();
  return Fnv1a64(px.data(), px.size(), Fnv1a64(dims, sizeof dims));
}

void OracleRecognizer::Register(const RasterImage& image, std::string text) {
  texts_[ImageDigest(image)] = std::move(text);
}

std::string OracleRecognizer::Recognize(const RasterImage& image) {
  const auto it = texts_.find(ImageDigest(image));
  return it == texts_.end() ? std::string() : it->second;
}

namespace {

constexpr int kCellW = 8;
constexpr int kCellH = 12;

// Ink-bbox crop of a coverage image, resampled to the comparison grid.
// Element kCellW * kCellH holds the log aspect ratio.
std::vector<double> Signature(const RasterImage& coverage) {
  BinaryMask ink(coverage.width(), coverage.height());
  for (int y = 0; y < coverage.height(); ++y)
    for (int x = 0; x < coverage.width(); ++x)
      ink.at(x, y) = coverage.at(x, y, 0) >= 128;
  const Box box = MaskBoundingBox(ink);
  if (box.empty()) return {};
  const RasterImage cell = Resize(Crop(coverage, box), kCellW, kCellH);
  std::vector<double> out(kCellW * kCellH + 1);
  for (int i = 0; i < kCellW * kCellH; ++i) out[i] = cell.pixels()[i] / 255.0;
  out.back() = std::log(static_cast<double>(box.width) / box.height);
  return out;
}

}  // namespace

TemplateRecognizer::TemplateRecognizer() {
  const GlyphAtlas& atlas = GlyphAtlas::Default();
  for (char32_t cp : atlas.CoveredCodepoints()) {
    auto sig = Signature(atlas.Coverage(cp));
    if (!sig.empty()) templates_.push_back({cp, std::move(sig)});
  }
}

std::pair<char32_t, double> TemplateRecognizer::Match(
    const std::vector<double>& sig) const {
  const Template* best = nullptr;
  double best_score = 0.0;
  for (const Template& t : templates_) {
    double score = 2.0 * std::abs(t.cells.back() - sig.back());
    for (int i = 0; i < kCellW * kCellH; ++i) {
      score += std::abs(t.cells[i] - sig[i]) / (kCellW * kCellH);
    }
    if (!best || score < best_score) {
      best = &t;
      best_score = score;
    }
  }
  return {best->cp, best_score};
}

std::string TemplateRecognizer::Recognize(const RasterImage& image) {
  constexpr double kSegmentPenalty = 0.15;
  const RasterImage gray = ToLuminance(image);
  const int w = gray.width();
  const int h = gray.height();
  RasterImage coverage(w, h, 1, 0);
  std::vector<int> column_ink(w, 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (gray.at(x, y, 0) < 128) {
        coverage.at(x, y, 0) = 255;
        ++column_ink[x];
      }
    }
  }
  std::u32string text;
  int x = 0;
  while (x < w) {
    if (column_ink[x] == 0) {
      ++x;
      continue;
    }
    const int start = x;
    int ink = 0;
    while (x < w && column_ink[x] > 0) ink += column_ink[x++];
    if (ink < 3) continue;
    const RasterImage run = Crop(coverage, {start, 0, x - start, h});
    BinaryMask run_ink = Binarize(run);
    const int ink_height = MaskBoundingBox(run_ink).height;
    const int n = run.width();
    const int max_width = std::max(2, ink_height * 3 / 2 + 2);

    // Splits touching glyphs: best[j] is the cheapest reading of [0, j).
    std::vector<double> best(n + 1, std::numeric_limits<double>::infinity());
    std::vector<int> prev(n + 1, -1);
    std::vector<char32_t> chosen(n + 1, 0);
    best[0] = 0.0;
    for (int j = 1; j <= n; ++j) {
      for (int i = std::max(0, j - max_width); i < j; ++i) {
        if (!std::isfinite(best[i])) continue;
        const auto sig = Signature(Crop(run, {i, 0, j - i, h}));
        if (sig.empty()) continue;
        const auto [cp, score] = Match(sig);
        const double total = best[i] + score + kSegmentPenalty;
        if (total < best[j]) {
          best[j] = total;
          prev[j] = i;
          chosen[j] = cp;
        }
      }
    }
    if (!std::isfinite(best[n])) continue;
    std::u32string word;
    for (int j = n; j > 0; j = prev[j]) word.push_back(chosen[j]);
    text.append(word.rbegin(), word.rend());
  }
  return EncodeUtf8(text);
}

nlohmann::json MetricReport::ToJson() const {
  return {{"variant", variant},
          {"fid", fid},
          {"ned", ned},
          {"sample_count", sample_count},
          {"skipped", skipped},
          {"config_digest", config_digest},
          {"extractor", extractor},
          {"recognizer", recognizer},
          {"warnings", warnings}};
}

MetricReport MetricReport::FromJson(const nlohmann::json& j) {
  MetricReport r;
  r.variant = j.at("variant").get<std::string>();
  r.fid = j.at("fid").get<double>();
  r.ned = j.at("ned").get<double>();
  r.sample_count = j.at("sample_count").get<long>();
  r.skipped = j.value("skipped", 0L);
  r.config_digest = j.value("config_digest", "");
  r.extractor = j.value("extractor", "");
  r.recognizer = j.value("recognizer", "");
  r.warnings = j.value("warnings", std::vector<std::string>{});
  return r;
}

RasterImage EvalView(const RasterImage& image, const PolygonRegion& polygon,
                     EvalRegion region) {
  if (region == EvalRegion::kFullCanvas) return image;
  const Box b = polygon.BoundingBox();
  const int x0 = std::clamp(b.x, 0, image.width());
  const int y0 = std::clamp(b.y, 0, image.height());
  const int x1 = std::clamp(b.right(), 0, image.width());
  const int y1 = std::clamp(b.bottom(), 0, image.height());
  if (x1 <= x0 || y1 <= y0) {
    throw Error(ErrorKind::kDegeneratePolygon,
                "polygon box lies outside the image");
  }
  return Crop(image, {x0, y0, x1 - x0, y1 - y0});
}

MetricReport EvaluateRun(const std::filesystem::path& generated_dir,
                         std::vector<SampleRecord> records,
                         const std::filesystem::path& data_root,
                         const FeatureExtractor& extractor,
                         RecognizerBackend& recognizer,
                         const EvalOptions& options) {
  std::erase_if(records,
                [](const SampleRecord& r) { return r.split != Split::kTest; });
  std::sort(records.begin(), records.end(),
            [](const auto& a, const auto& b) { return a.sample_id < b.sample_id; });

  MetricReport report;
  report.variant = options.variant;
  report.config_digest = options.config_digest;
  report.extractor = extractor.Identity();
  report.recognizer = recognizer.Identity();

  std::vector<const SampleRecord*> present;
  std::vector<std::string> missing;
  for (const auto& r : records) {
    if (std::filesystem::exists(generated_dir / (r.sample_id + ".png"))) {
      present.push_back(&r);
    } else {
      missing.push_back(r.sample_id);
    }
  }
  if (!missing.empty()) {
    if (!options.lenient) {
      std::string list;
      for (const auto& id : missing) list += (list.empty() ? "" : ", ") + id;
      throw Error(ErrorKind::kMissingOutput,
                  std::to_string(missing.size()) +
                      " generated outputs missing: " + list);
    }
    report.skipped = static_cast<long>(missing.size());
    report.warnings.push_back("skipped " + std::to_string(missing.size()) +
                              " samples without generated output");
  }

  const std::size_t n = present.size();
  std::vector<RasterImage> views(n, RasterImage(1, 1, 1));
  std::vector<Eigen::VectorXd> gen_features(n), gt_features(n);
  std::vector<std::string> errors(n);
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < n; ++i) {
    try {
      const SampleRecord& r = *present[i];
      const RasterImage gen = ReadPng(generated_dir / (r.sample_id + ".png"));
      const RasterImage gt = ReadPng(data_root / r.x);
      views[i] = EvalView(gen, r.polygon, options.region);
      gen_features[i] = extractor.Extract(views[i]);
      gt_features[i] = extractor.Extract(EvalView(gt, r.polygon, options.region));
    } catch (const std::exception& e) {
      errors[i] = present[i]->sample_id + ": " + e.what();
    }
  }
  for (const auto& e : errors) {
    if (!e.empty()) throw Error(ErrorKind::kIo, e);
  }

  double ned_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ned_sum += NedPair(recognizer.Recognize(views[i]), present[i]->text);
  }
  report.sample_count = static_cast<long>(n);
  report.ned = n ? ned_sum / n : 0.0;
  report.fid = FrechetDistance(FitGaussian(gen_features),
                               FitGaussian(gt_features), &report.warnings);
  return report;
}

std::string RenderCsv(const std::vector<MetricReport>& rows) {
  std::ostringstream out;
  out << "variant,fid,ned,sample_count\n";
  out << std::setprecision(10);
  for (const auto& r : rows) {
    out << r.variant << ',' << r.fid << ',' << r.ned << ',' << r.sample_count
        << '\n';
  }
  return out.str();
}

std::string RenderTextTable(const std::vector<MetricReport>& rows) {
  std::size_t width = std::string("variant").size();
  for (const auto& r : rows) width = std::max(width, r.variant.size());
  std::ostringstream out;
  out << std::left << std::setw(static_cast<int>(width)) << "variant"
      << "  " << std::right << std::setw(10) << "FID" << "  " << std::setw(8)
      << "NED" << "  " << std::setw(7) << "n" << '\n';
  out << std::string(width + 33, '-') << '\n';
  out << std::fixed;
  for (const auto& r : rows) {
    out << std::left << std::setw(static_cast<int>(width)) << r.variant
        << "  " << std::right << std::setw(10) << std::setprecision(4) << r.fid
        << "  " << std::setw(8) << std::setprecision(4) << r.ned << "  "
        << std::setw(7) << r.sample_count << '\n';
  }
  return out.str();
}

}  // namespace mangasfx
