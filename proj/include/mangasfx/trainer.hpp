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
#include <filesystem>
#include <memory>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"
#include "mangasfx/flow.hpp"
#include "mangasfx/toy_backend.hpp"

namespace mangasfx {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  nlohmann::json ToJson() const;
  static AdamConfig FromJson(const nlohmann::json& j);
};

// Everything needed to continue training bit-identically after a restart.
struct TrainerState {
  std::int64_t step = 0;
  std::mt19937_64 rng;
  std::vector<Eigen::MatrixXd> first_moment;
  std::vector<Eigen::MatrixXd> second_moment;

  explicit TrainerState(std::uint64_t seed = 0) : rng(seed) {}
};

struct TrainExample {
  Condition condition;
  LatentTensor x0;
};

struct StepReport {
  double loss = 0.0;
  std::vector<double> t_values;
};

// Draws t ~ U(0, 1) and z ~ N(0, I) per example from state.rng, forms
// x_t = (1 - sigma_t) x0 + sigma_t z, and applies one Adam update on the
// weighted flow-matching loss against z - x0. Throws kNonFinite with the
// step index and t values when the loss is not finite.
StepReport TrainStep(ToyVelocityNet& net, TrainerState& state,
                     const AdamConfig& adam,
                     std::span<const TrainExample* const> batch,
                     const NoiseSchedule& schedule);

inline constexpr const char* kCheckpointFormat = "mangasfx-checkpoint/1";

struct LoadedCheckpoint {
  std::unique_ptr<ToyVelocityNet> net;
  TrainerState trainer;
  NoiseSchedule schedule;
  nlohmann::json metadata;
};

// Single-file archive: magic, JSON header (format version, network config,
// schedule, trainer step and RNG state, array table), then raw float64
// arrays for parameters, adapters and optimizer moments.
void SaveCheckpoint(const std::filesystem::path& path,
                    const ToyVelocityNet& net, const TrainerState& trainer,
                    const NoiseSchedule& schedule,
                    const nlohmann::json& metadata = nlohmann::json::object());
LoadedCheckpoint LoadCheckpoint(const std::filesystem::path& path);

}  // namespace mangasfx
