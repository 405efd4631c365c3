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
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"
#include "mangasfx/raster.hpp"

namespace mangasfx {

struct LatentShape {
  int channels = 0;
  int height = 0;
  int width = 0;

  std::size_t size() const {
    return static_cast<std::size_t>(channels) * height * width;
  }
  friend bool operator==(const LatentShape&, const LatentShape&) = default;
};

// Channel-major (c, y, x) real tensor.
struct LatentTensor {
  LatentShape shape;
  std::vector<double> values;

  LatentTensor() = default;
  explicit LatentTensor(LatentShape s, double fill = 0.0)
      : shape(s), values(s.size(), fill) {}

  double& at(int c, int y, int x) {
    return values[(static_cast<std::size_t>(c) * shape.height + y) *
                      shape.width + x];
  }
  double at(int c, int y, int x) const {
    return values[(static_cast<std::size_t>(c) * shape.height + y) *
                      shape.width + x];
  }
};

// Throws kNonFinite naming `where` if any value is NaN or infinite.
void CheckFinite(const LatentTensor& t, const std::string& where);

// (1 - sigma) * x0 + sigma * z.
LatentTensor Interpolate(const LatentTensor& x0, const LatentTensor& z,
                         double sigma);
// z - x0, the velocity of the linear interpolant.
LatentTensor VelocityTarget(const LatentTensor& x0, const LatentTensor& z);
// weight * mean((pred - target)^2).
double FmLoss(const LatentTensor& pred, const LatentTensor& target,
              double weight);

// Standard normal noise, fully determined by (shape, seed).
LatentTensor DrawNoise(LatentShape shape, std::uint64_t seed);

// sigma(t) and weight(t) with sampler step count. The "shifted" sigma is
// s t / (1 + (s - 1) t), which reduces to sigma = t for s = 1.
struct NoiseSchedule {
  std::string sigma_kind = "linear";  // linear | shifted
  double shift = 1.0;
  std::string weight_kind = "uniform";  // uniform
  int sampler_steps = 28;

  double Sigma(double t) const;
  double Weight(double t) const;
  // Checks sigma(0) = 0, sigma(1) = 1, monotonicity and positive weights.
  void Validate() const;

  nlohmann::json ToJson() const;
  static NoiseSchedule FromJson(const nlohmann::json& j);
};

// Reference pixel <-> latent codec: space-to-channel packing by `factor`
// of pixels normalized to [0, 1]. Channel index = (c * f + dy) * f + dx,
// giving shape (channels * f^2, H / f, W / f).
struct PackingCodec {
  int factor = 8;

  LatentShape LatentShapeFor(int width, int height, int channels) const;
  LatentTensor Encode(const RasterImage& image) const;
  // Inverse of Encode with rounding half-up and clamping to [0, 255].
  RasterImage Decode(const LatentTensor& latent, int channels = 3) const;
};

// delta = scale * up * down; up is (out x rank), down is (rank x in).
struct LowRankAdapter {
  Eigen::MatrixXd down;
  Eigen::MatrixXd up;
  double scale = 1.0;

  int rank() const { return static_cast<int>(down.rows()); }
  Eigen::MatrixXd Delta() const;
};

// base + scale * up * down. Throws kDimension on disagreement.
Eigen::MatrixXd ApplyAdapter(const Eigen::MatrixXd& base,
                             const LowRankAdapter& adapter);

// Everything a denoiser may condition on. `latent` is the channel stack the
// reference backend consumes; the images travel to external backends.
struct Condition {
  RasterImage canvas;
  RasterImage aux;  // second image group in plain mode, else empty
  LatentTensor latent;
  std::string prompt;
};

class DenoiserBackend {
 public:
  virtual ~DenoiserBackend() = default;
  // Predicted velocity with the shape of `x_t`.
  virtual LatentTensor Predict(const LatentTensor& x_t, double t,
                               const Condition& condition) const = 0;
  virtual std::string Identity() const = 0;
};

// Explicit Euler from t = 1 (noise) to t = 0 over schedule.sampler_steps
// uniform steps in t. Initial noise comes from DrawNoise(shape, seed).
LatentTensor Sample(const DenoiserBackend& backend, const Condition& condition,
                    LatentShape shape, const NoiseSchedule& schedule,
                    std::uint64_t seed);

}  // namespace mangasfx
