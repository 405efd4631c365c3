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

// Independent reference computations used as test oracles. Nothing here
// calls the implementation paths it is compared against.

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mangasfx/flow.hpp"
#include "mangasfx/raster.hpp"
#include "mangasfx/toy_backend.hpp"

namespace mangasfx::oracle {

// Crossing-number point-in-polygon test at pixel centers.
inline bool Inside(const PolygonRegion& poly, double px, double py) {
  bool inside = false;
  const auto& v = poly.vertices;
  for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
    if ((v[i].y > py) == (v[j].y > py)) continue;
    const double xi =
        v[i].x + (py - v[i].y) * (v[j].x - v[i].x) / (v[j].y - v[i].y);
    if (px < xi) inside = !inside;
  }
  return inside;
}

inline BinaryMask Rasterize(const PolygonRegion& poly, int w, int h) {
  BinaryMask m(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) m.at(x, y) = Inside(poly, x + 0.5, y + 0.5);
  }
  return m;
}

// Scatter each set pixel over its (2r+1)^2 neighborhood.
inline BinaryMask Dilate(const BinaryMask& m, int r) {
  BinaryMask out(m.width(), m.height());
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) {
      if (!m.at(x, y)) continue;
      for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
          const int xx = x + dx, yy = y + dy;
          if (xx >= 0 && yy >= 0 && xx < m.width() && yy < m.height()) {
            out.at(xx, yy) = 1;
          }
        }
      }
    }
  }
  return out;
}

// Top-down recursive Levenshtein distance over suffixes, memoized.
inline int EditDistance(const std::u32string& a, const std::u32string& b) {
  std::vector<int> memo((a.size() + 1) * (b.size() + 1), -1);
  auto rec = [&](auto&& self, std::size_t i, std::size_t j) -> int {
    if (i == a.size()) return static_cast<int>(b.size() - j);
    if (j == b.size()) return static_cast<int>(a.size() - i);
    int& slot = memo[i * (b.size() + 1) + j];
    if (slot >= 0) return slot;
    const int sub = self(self, i + 1, j + 1) + (a[i] == b[j] ? 0 : 1);
    const int del = self(self, i + 1, j) + 1;
    const int ins = self(self, i, j + 1) + 1;
    return slot = std::min({sub, del, ins});
  };
  return rec(rec, 0, 0);
}

// Frechet distance between diagonal Gaussians:
//   sum_i (mu_a - mu_b)^2 + (sigma_a - sigma_b)^2.
inline double DiagonalFrechet(const std::vector<double>& mu_a,
                              const std::vector<double>& var_a,
                              const std::vector<double>& mu_b,
                              const std::vector<double>& var_b) {
  double d = 0.0;
  for (std::size_t i = 0; i < mu_a.size(); ++i) {
    const double dm = mu_a[i] - mu_b[i];
    const double ds = std::sqrt(var_a[i]) - std::sqrt(var_b[i]);
    d += dm * dm + ds * ds;
  }
  return d;
}

// Velocity field of a known pair (x0, z): constant z - x0.
class ExactVelocityBackend final : public DenoiserBackend {
 public:
  ExactVelocityBackend(LatentTensor x0, LatentTensor z)
      : x0_(std::move(x0)), z_(std::move(z)) {}
  LatentTensor Predict(const LatentTensor& x_t, double,
                       const Condition&) const override {
    LatentTensor v(x_t.shape);
    for (std::size_t i = 0; i < v.values.size(); ++i) {
      v.values[i] = z_.values[i] - x0_.values[i];
    }
    return v;
  }
  std::string Identity() const override { return "exact-velocity"; }

 private:
  LatentTensor x0_;
  LatentTensor z_;
};

struct GradientCheckResult {
  double max_relative_error = 0.0;
  std::string worst_parameter;
};

// Central differences with step h on every parameter element. The error per
// parameter tensor is ||analytic - numeric|| / max(||analytic||, ||numeric||).
inline GradientCheckResult CheckGradients(ToyVelocityNet& net,
                                          std::span<const FlowTrainItem> batch,
                                          double h = 1e-4) {
  std::vector<Eigen::MatrixXd> analytic;
  net.LossAndGradient(batch, &analytic);
  GradientCheckResult result;
  auto& params = net.parameters();
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params[i].trainable) continue;
    Eigen::MatrixXd numeric(params[i].value.rows(), params[i].value.cols());
    for (Eigen::Index k = 0; k < params[i].value.size(); ++k) {
      double& w = params[i].value.data()[k];
      const double saved = w;
      w = saved + h;
      const double up = net.LossAndGradient(batch, nullptr);
      w = saved - h;
      const double down = net.LossAndGradient(batch, nullptr);
      w = saved;
      numeric.data()[k] = (up - down) / (2.0 * h);
    }
    const double denom =
        std::max({analytic[i].norm(), numeric.norm(), 1e-300});
    const double err = (analytic[i] - numeric).norm() / denom;
    if (err > result.max_relative_error) {
      result.max_relative_error = err;
      result.worst_parameter = params[i].name;
    }
  }
  return result;
}

// A small random network and batch for gradient checks. Adapter up-matrices
// are randomized so every backward path carries signal.
struct GradientInstance {
  ToyVelocityNet net;
  std::vector<Condition> conditions;
  std::vector<FlowTrainItem> items;
};

inline GradientInstance MakeGradientInstance(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  ToyNetConfig cfg;
  cfg.latent_channels = 3;
  cfg.cond_channels = 2;
  cfg.hidden = 5;
  cfg.first_kernel = 3;
  cfg.mid_kernel = 3;
  cfg.adapters = true;
  cfg.adapter_rank = 2;
  cfg.adapter_scale = 0.7;
  cfg.data_scale = 0.25 * static_cast<double>(seed % 3);
  GradientInstance inst{ToyVelocityNet(cfg, seed), {}, {}};
  for (auto& p : inst.net.parameters()) {
    for (Eigen::Index k = 0; k < p.value.size(); ++k) {
      p.value.data()[k] += 0.3 * normal(rng);
    }
  }
  const LatentShape shape{3, 3, 4};
  const int batch = 2;
  inst.conditions.resize(batch);
  for (int b = 0; b < batch; ++b) {
    inst.conditions[b].latent = LatentTensor({2, 3, 4});
    for (double& v : inst.conditions[b].latent.values) v = normal(rng);
  }
  for (int b = 0; b < batch; ++b) {
    FlowTrainItem item;
    item.condition = &inst.conditions[b];
    item.x_t = LatentTensor(shape);
    item.target = LatentTensor(shape);
    for (double& v : item.x_t.values) v = normal(rng);
    for (double& v : item.target.values) v = normal(rng);
    item.t = uniform(rng);
    item.weight = 0.5 + uniform(rng);
    inst.items.push_back(std::move(item));
  }
  return inst;
}

}  // namespace mangasfx::oracle
