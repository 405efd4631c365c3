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
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "mangasfx/raster.hpp"
#include "mangasfx/sample.hpp"

namespace mangasfx {

struct GaussianStats {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  long count = 0;
};

// Sample mean and unbiased covariance, symmetrized. Needs >= 2 vectors of
// one dimension.
GaussianStats FitGaussian(const std::vector<Eigen::VectorXd>& features);

// |mu_a - mu_b|^2 + Tr(S_a + S_b - 2 (S_a S_b)^(1/2)). Negative eigenvalues
// are clamped to zero; those below -1e-6 add a message to `warnings`.
double FrechetDistance(const GaussianStats& a, const GaussianStats& b,
                       std::vector<std::string>* warnings = nullptr);

// Levenshtein distance over code points.
std::size_t EditDistance(std::u32string_view a, std::u32string_view b);

// 1 - EditDistance / max length after NFC normalization; 1 when both are
// empty.
double NedPair(std::string_view pred, std::string_view gt);

class FeatureExtractor {
 public:
  virtual ~FeatureExtractor() = default;
  virtual int dimension() const = 0;
  virtual Eigen::VectorXd Extract(const RasterImage& image) const = 0;
  virtual std::string Identity() const = 0;
};

// 64-bin luminance histogram (fractions) followed by the dark-pixel
// fraction of each 2x2 block, row-major. d = 68.
class HistogramFeatures : public FeatureExtractor {
 public:
  int dimension() const override { return 68; }
  Eigen::VectorXd Extract(const RasterImage& image) const override;
  std::string Identity() const override { return "histogram68"; }
};

class RecognizerBackend {
 public:
  virtual ~RecognizerBackend() = default;
  virtual std::string Recognize(const RasterImage& image) = 0;
  virtual std::string Identity() const = 0;
};

// Looks images up by content digest. Unknown images read as "".
class OracleRecognizer : public RecognizerBackend {
 public:
  void Register(const RasterImage& image, std::string text);
  std::string Recognize(const RasterImage& image) override;
  std::string Identity() const override { return "oracle-recognizer"; }

 private:
  std::map<std::uint64_t, std::string> texts_;
};

// Segments dark ink into column runs and matches each run against the
// built-in glyph atlas.
class TemplateRecognizer : public RecognizerBackend {
 public:
  TemplateRecognizer();
  std::string Recognize(const RasterImage& image) override;
  std::string Identity() const override { return "template-recognizer"; }

 private:
  struct Template {
    char32_t cp;
    std::vector<double> cells;
  };
  std::pair<char32_t, double> Match(const std::vector<double>& sig) const;
  std::vector<Template> templates_;
};

std::uint64_t ImageDigest(const RasterImage& image);

struct MetricReport {
  std::string variant;
  double fid = 0.0;
  double ned = 0.0;
  long sample_count = 0;
  long skipped = 0;
  std::string config_digest;
  std::string extractor;
  std::string recognizer;
  std::vector<std::string> warnings;

  nlohmann::json ToJson() const;
  static MetricReport FromJson(const nlohmann::json& j);
};

enum class EvalRegion { kPolygonCrop, kFullCanvas };

// The region of a canvas-sized image that metrics look at: the polygon's
// bounding box clipped to the image, or the whole image.
RasterImage EvalView(const RasterImage& image, const PolygonRegion& polygon,
                     EvalRegion region);

struct EvalOptions {
  std::string variant;
  std::string config_digest;
  bool lenient = false;
  EvalRegion region = EvalRegion::kPolygonCrop;
};

// Compares `<generated_dir>/<sample_id>.png` against each test record's x.
// Missing outputs throw kMissingOutput unless `lenient`, in which case they
// are counted in `skipped`. Records are processed in sample_id order.
MetricReport EvaluateRun(const std::filesystem::path& generated_dir,
                         std::vector<SampleRecord> records,
                         const std::filesystem::path& data_root,
                         const FeatureExtractor& extractor,
                         RecognizerBackend& recognizer,
                         const EvalOptions& options = {});

// Variant x {FID, NED} comparison.
std::string RenderCsv(const std::vector<MetricReport>& rows);
std::string RenderTextTable(const std::vector<MetricReport>& rows);

}  // namespace mangasfx
