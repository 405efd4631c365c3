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

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mangasfx/compositor.hpp"
#include "mangasfx/conditioning.hpp"
#include "mangasfx/dataset.hpp"
#include "mangasfx/evaluation.hpp"
#include "mangasfx/flow.hpp"
#include "mangasfx/mask_to_rgba.hpp"
#include "mangasfx/synthetic.hpp"
#include "mangasfx/trainer.hpp"

namespace mangasfx {

inline constexpr char kConfigSchema[] = "mangasfx-config/1";
inline constexpr char kDataRootEnv[] = "MANGASFX_DATA_ROOT";

enum class Variant { kFull, kNoInContext, kMaskKontextCrop };

inline constexpr std::array<Variant, 3> kAllVariants = {
    Variant::kFull, Variant::kNoInContext, Variant::kMaskKontextCrop};

std::string ToString(Variant v);
Variant ParseVariant(const std::string& s);
// Model each variant samples from.
ConditioningMode ModeFor(Variant v);

struct ModelSettings {
  int hidden = 32;
  int first_kernel = 1;
  int mid_kernel = 3;
  int adapter_rank = 16;
  double adapter_scale = 1.0;
  bool freeze_base = false;
  double data_scale = 0.5;
};

struct TrainSettings {
  long steps = 25000;
  int batch_size = 4;
  AdamConfig adam;
  int log_every = 50;
  long checkpoint_every = 0;  // 0: only at the end
  long validation_every = 0;  // 0: never
  int validation_samples = 4;
};

struct GenerateSettings {
  Variant variant = Variant::kFull;
  Split split = Split::kTest;
  bool strict = true;
  std::string converter_prompt = kDefaultConverterPrompt;
  ConverterStyle converter_style;
  int containment_tolerance = 8;
  HarmonicFillConfig inpaint;
};

struct EvaluateSettings {
  bool lenient = false;
  EvalRegion region = EvalRegion::kPolygonCrop;
};

// Each entry is "reference" (or a named built-in) or an http:// service URI.
struct BackendSettings {
  std::string denoiser = "reference";
  std::string converter = "reference";
  std::string inpainter = "reference";
  std::string captioner = "reference";
  std::string recognizer = "template";  // template | oracle | URI
  std::string extractor = "histogram68";
};

struct PathSettings {
  std::filesystem::path data_root = ".";
  std::filesystem::path corpus = "corpus";  // used when source = corpus
  std::filesystem::path runs = "runs";
};

struct PipelineConfig {
  PathSettings paths;
  std::string source = "synthetic";  // synthetic | corpus
  SyntheticConfig synthetic;
  DatasetConfig dataset;
  ModelSettings model;
  NoiseSchedule schedule;
  TrainSettings train;
  GenerateSettings generate;
  EvaluateSettings evaluate;
  BackendSettings backends;
  std::uint64_t seed = 0;
  int workers = 0;  // 0: OpenMP default

  nlohmann::json ToJson() const;
  // Missing keys keep their defaults; unknown top-level keys are rejected.
  static PipelineConfig FromJson(const nlohmann::json& j);
  void Validate() const;

  // Hash of everything that shapes artifacts. Paths, seed, worker count, the
  // training step target, logging cadences and the per-invocation selectors
  // (variant, split, strictness) are excluded, so a run can be resumed to a
  // higher step count in place.
  std::string Digest() const;
  FlowTask Task(ConditioningMode mode) const;
};

// Reads a JSON config file, applies `overrides` ("dotted.key=value", value
// parsed as JSON when possible, else taken as a string) and then the data
// root environment variable.
PipelineConfig LoadConfig(const std::optional<std::filesystem::path>& file,
                          const std::vector<std::string>& overrides = {});
void ApplyOverride(nlohmann::json& config, const std::string& assignment);

// Artifact locations of one run: <data_root>/<runs>/<digest>-seed<seed>.
struct RunLayout {
  std::filesystem::path root;

  static RunLayout For(const PipelineConfig& config);
  std::filesystem::path corpus() const { return root / "corpus"; }
  std::filesystem::path dataset() const { return root / "dataset"; }
  std::filesystem::path manifest() const { return dataset() / "manifest.jsonl"; }
  std::filesystem::path checkpoint(ConditioningMode mode) const;
  std::filesystem::path loss_csv(ConditioningMode mode) const;
  std::filesystem::path validation() const { return root / "validation"; }
  std::filesystem::path outputs(Variant v) const;
  std::filesystem::path metrics(Variant v) const;
  std::filesystem::path logs() const { return root / "logs"; }
};

// Append-only JSON-lines log, one file per stage.
class EventLog {
 public:
  EventLog(const std::filesystem::path& dir, std::string stage);
  void Emit(const std::string& event,
            nlohmann::json fields = nlohmann::json::object());

 private:
  std::string stage_;
  std::ofstream out_;
  std::mutex mu_;
};

struct TrainSummary {
  long steps_run = 0;
  long final_step = 0;
  double initial_smoothed_loss = 0.0;
  double final_smoothed_loss = 0.0;
  std::filesystem::path checkpoint;
  std::filesystem::path loss_csv;
};

struct GenerateSummary {
  Variant variant = Variant::kFull;
  long generated = 0;
  long failed = 0;
  std::vector<std::string> warnings;
  std::filesystem::path output_dir;
};

BuildSummary CmdBuildDataset(const PipelineConfig& config);
TrainSummary CmdTrain(const PipelineConfig& config, ConditioningMode mode,
                      bool resume = false);
GenerateSummary CmdGenerate(
    const PipelineConfig& config, Variant variant,
    const std::optional<std::filesystem::path>& checkpoint = std::nullopt);
MetricReport CmdEvaluate(const PipelineConfig& config, Variant variant);
// Generates and evaluates every variant, then writes ablation.csv and
// ablation.txt in the run directory.
std::vector<MetricReport> CmdAblate(const PipelineConfig& config);

// Per-sample sampling seed, independent of processing order.
std::uint64_t SampleSeed(std::uint64_t run_seed, const std::string& sample_id);

}  // namespace mangasfx
