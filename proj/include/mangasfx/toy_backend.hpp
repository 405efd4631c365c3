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
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"
#include "mangasfx/flow.hpp"

namespace mangasfx {

// Small convolutional velocity predictor:
//   [x_t | condition latent | t]  -> conv(k1) -> SiLU
//                                  -> conv(k2) -> SiLU -> conv(1x1)
// Each conv is a linear map (out x in*k*k) that can carry a low-rank adapter.
// With data_scale > 0 the prediction is skip(t) * x_t + out(t) * net, where
// skip and out come from the linear estimate of the velocity for data of
// that scale. The prompt is not consumed.
struct ToyNetConfig {
  int latent_channels = 0;
  int cond_channels = 0;
  int hidden = 32;
  int first_kernel = 1;
  int mid_kernel = 3;
  bool adapters = false;
  int adapter_rank = 16;
  double adapter_scale = 1.0;
  bool freeze_base = false;
  double data_scale = 0.5;  // 0: plain network output

  nlohmann::json ToJson() const;
  static ToyNetConfig FromJson(const nlohmann::json& j);
};

struct NamedParameter {
  std::string name;
  Eigen::MatrixXd value;
  bool trainable = true;
};

// One element of a training batch with time and noise already drawn.
struct FlowTrainItem {
  const Condition* condition = nullptr;
  LatentTensor x_t;
  double t = 0.0;
  LatentTensor target;  // z - x0
  double weight = 1.0;
};

class ToyVelocityNet final : public DenoiserBackend {
 public:
  ToyVelocityNet(const ToyNetConfig& config, std::uint64_t init_seed);

  LatentTensor Predict(const LatentTensor& x_t, double t,
                       const Condition& condition) const override;
  std::string Identity() const override;

  // Batch mean of weight * MSE(v(x_t, t, c), target). When `grads` is not
  // null it receives d loss / d parameter for every entry of parameters(),
  // zero for frozen ones.
  double LossAndGradient(std::span<const FlowTrainItem> batch,
                         std::vector<Eigen::MatrixXd>* grads) const;

  const ToyNetConfig& config() const { return config_; }
  std::vector<NamedParameter>& parameters() { return params_; }
  const std::vector<NamedParameter>& parameters() const { return params_; }

 private:
  struct Layer {
    int in = 0;
    int out = 0;
    int kernel = 1;
    int weight = -1;  // indices into params_
    int bias = -1;
    int down = -1;
    int up = -1;
  };

  Eigen::MatrixXd EffectiveWeight(const Layer& layer) const;
  Eigen::MatrixXd AssembleInput(std::span<const FlowTrainItem> batch,
                                int height, int width) const;

  ToyNetConfig config_;
  std::vector<NamedParameter> params_;
  std::vector<Layer> layers_;
};

}  // namespace mangasfx
