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

#include "mangasfx/flow.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "mangasfx/error.hpp"

namespace mangasfx {

namespace {

std::string ShapeString(const LatentShape& s) {
  std::ostringstream os;
  os << "(" << s.channels << "," << s.height << "," << s.width << ")";
  return os.str();
}

void CheckSameShape(const LatentTensor& a, const LatentTensor& b,
                    const char* op) {
  if (a.shape != b.shape) {
    throw Error(ErrorKind::kShape, std::string(op) + ": " +
                                       ShapeString(a.shape) + " vs " +
                                       ShapeString(b.shape));
  }
}

}  // namespace

void CheckFinite(const LatentTensor& t, const std::string& where) {
  for (const double v : t.values) {
    if (!std::isfinite(v)) {
      throw Error(ErrorKind::kNonFinite, where);
    }
  }
}

LatentTensor Interpolate(const LatentTensor& x0, const LatentTensor& z,
                         double sigma) {
  CheckSameShape(x0, z, "interpolate");
  if (!(sigma >= 0.0 && sigma <= 1.0)) {
    throw Error(ErrorKind::kRange,
                "sigma " + std::to_string(sigma) + " outside [0, 1]");
  }
  LatentTensor out(x0.shape);
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    out.values[i] = (1.0 - sigma) * x0.values[i] + sigma * z.values[i];
  }
  return out;
}

LatentTensor VelocityTarget(const LatentTensor& x0, const LatentTensor& z) {
  CheckSameShape(x0, z, "velocity_target");
  LatentTensor out(x0.shape);
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    out.values[i] = z.values[i] - x0.values[i];
  }
  return out;
}

double FmLoss(const LatentTensor& pred, const LatentTensor& target,
              double weight) {
  CheckSameShape(pred, target, "fm_loss");
  if (!(weight > 0.0)) {
    throw Error(ErrorKind::kRange, "loss weight must be positive");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.values.size(); ++i) {
    const double d = pred.values[i] - target.values[i];
    acc += d * d;
  }
  return weight * acc / static_cast<double>(pred.values.size());
}

LatentTensor DrawNoise(LatentShape shape, std::uint64_t seed) {
  LatentTensor out(shape);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (double& v : out.values) v = normal(rng);
  return out;
}

double NoiseSchedule::Sigma(double t) const {
  if (sigma_kind == "linear") return t;
  if (sigma_kind == "shifted") return shift * t / (1.0 + (shift - 1.0) * t);
  throw Error(ErrorKind::kConfig, "unknown sigma schedule '" + sigma_kind + "'");
}

double NoiseSchedule::Weight(double /*t*/) const {
  if (weight_kind == "uniform") return 1.0;
  throw Error(ErrorKind::kConfig,
              "unknown loss weighting '" + weight_kind + "'");
}

void NoiseSchedule::Validate() const {
  if (sampler_steps < 1) {
    throw Error(ErrorKind::kConfig, "sampler_steps must be >= 1");
  }
  if (sigma_kind == "shifted" && !(shift > 0.0)) {
    throw Error(ErrorKind::kConfig, "schedule shift must be positive");
  }
  if (std::abs(Sigma(0.0)) > 1e-12 || std::abs(Sigma(1.0) - 1.0) > 1e-12) {
    throw Error(ErrorKind::kConfig, "sigma must map 0 -> 0 and 1 -> 1");
  }
  double prev = Sigma(0.0);
  for (int i = 1; i <= 64; ++i) {
    const double t = i / 64.0;
    const double s = Sigma(t);
    const double w = Weight(t);
    if (s < prev) throw Error(ErrorKind::kConfig, "sigma not monotone");
    if (!(w > 0.0) || !std::isfinite(w)) {
      throw Error(ErrorKind::kConfig, "loss weight must be finite and > 0");
    }
    prev = s;
  }
}

nlohmann::json NoiseSchedule::ToJson() const {
  return {{"sigma", sigma_kind},
          {"shift", shift},
          {"weight", weight_kind},
          {"sampler_steps", sampler_steps}};
}

NoiseSchedule NoiseSchedule::FromJson(const nlohmann::json& j) {
  NoiseSchedule s;
  s.sigma_kind = j.value("sigma", s.sigma_kind);
  s.shift = j.value("shift", s.shift);
  s.weight_kind = j.value("weight", s.weight_kind);
  s.sampler_steps = j.value("sampler_steps", s.sampler_steps);
  s.Validate();
  return s;
}

LatentShape PackingCodec::LatentShapeFor(int width, int height,
                                         int channels) const {
  if (width % factor != 0 || height % factor != 0) {
    throw Error(ErrorKind::kShape,
                "image " + std::to_string(width) + "x" +
                    std::to_string(height) + " not divisible by " +
                    std::to_string(factor));
  }
  return {channels * factor * factor, height / factor, width / factor};
}

LatentTensor PackingCodec::Encode(const RasterImage& image) const {
  const LatentShape shape =
      LatentShapeFor(image.width(), image.height(), image.channels());
  LatentTensor out(shape);
  const int f = factor;
  for (int c = 0; c < image.channels(); ++c) {
    for (int dy = 0; dy < f; ++dy) {
      for (int dx = 0; dx < f; ++dx) {
        const int lc = (c * f + dy) * f + dx;
        for (int y = 0; y < shape.height; ++y) {
          for (int x = 0; x < shape.width; ++x) {
            out.at(lc, y, x) = image.at(x * f + dx, y * f + dy, c) / 255.0;
          }
        }
      }
    }
  }
  return out;
}

RasterImage PackingCodec::Decode(const LatentTensor& latent,
                                 int channels) const {
  const int f = factor;
  if (latent.shape.channels != channels * f * f) {
    throw Error(ErrorKind::kShape, "latent channels " +
                                       std::to_string(latent.shape.channels) +
                                       " do not unpack to " +
                                       std::to_string(channels) + " channels");
  }
  RasterImage out(latent.shape.width * f, latent.shape.height * f, channels);
  for (int c = 0; c < channels; ++c) {
    for (int dy = 0; dy < f; ++dy) {
      for (int dx = 0; dx < f; ++dx) {
        const int lc = (c * f + dy) * f + dx;
        for (int y = 0; y < latent.shape.height; ++y) {
          for (int x = 0; x < latent.shape.width; ++x) {
            const double v =
                std::floor(latent.at(lc, y, x) * 255.0 + 0.5);
            out.at(x * f + dx, y * f + dy, c) =
                static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
          }
        }
      }
    }
  }
  return out;
}

Eigen::MatrixXd LowRankAdapter::Delta() const { return scale * (up * down); }

Eigen::MatrixXd ApplyAdapter(const Eigen::MatrixXd& base,
                             const LowRankAdapter& adapter) {
  if (adapter.up.cols() != adapter.down.rows() ||
      adapter.up.rows() != base.rows() || adapter.down.cols() != base.cols()) {
    std::ostringstream os;
    os << "adapter up " << adapter.up.rows() << "x" << adapter.up.cols()
       << ", down " << adapter.down.rows() << "x" << adapter.down.cols()
       << " vs base " << base.rows() << "x" << base.cols();
    throw Error(ErrorKind::kDimension, os.str());
  }
  return base + adapter.Delta();
}

LatentTensor Sample(const DenoiserBackend& backend, const Condition& condition,
                    LatentShape shape, const NoiseSchedule& schedule,
                    std::uint64_t seed) {
  schedule.Validate();
  LatentTensor x = DrawNoise(shape, seed);
  const int n = schedule.sampler_steps;
  for (int i = 0; i < n; ++i) {
    const double t_cur = 1.0 - static_cast<double>(i) / n;
    const double t_next = 1.0 - static_cast<double>(i + 1) / n;
    const double dsigma = schedule.Sigma(t_next) - schedule.Sigma(t_cur);
    LatentTensor v;
    try {
      v = backend.Predict(x, t_cur, condition);
    } catch (const Error& e) {
      throw Error(e.kind(), "sampler step " + std::to_string(i) + ": " +
                                e.what());
    }
    if (v.shape != x.shape) {
      throw Error(ErrorKind::kBackendContract,
                  "sampler step " + std::to_string(i) +
                      ": velocity shape differs from input");
    }
    for (std::size_t k = 0; k < x.values.size(); ++k) {
      x.values[k] += dsigma * v.values[k];
    }
  }
  CheckFinite(x, "sample output");
  return x;
}

}  // namespace mangasfx
