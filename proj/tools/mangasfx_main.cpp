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

// Command-line entry point: build-dataset, train, generate, evaluate, ablate.

#include <omp.h>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mangasfx/error.hpp"
#include "mangasfx/pipeline.hpp"

namespace {

using namespace mangasfx;
using nlohmann::json;

struct CommonOptions {
  std::string config_file;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> data_root;
  std::optional<int> workers;
};

void AddCommon(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("-c,--config", o.config_file, "JSON config file")
      ->check(CLI::ExistingFile);
  cmd->add_option("-s,--set", o.overrides, "Override, e.g. train.steps=100")
      ->take_all();
  cmd->add_option("--seed", o.seed, "Run seed");
  cmd->add_option("--data-root", o.data_root,
                  std::string("Data root (") + kDataRootEnv + " wins over the file)");
  cmd->add_option("--workers", o.workers, "OpenMP threads (0: default)");
}

PipelineConfig Resolve(const CommonOptions& o, std::vector<std::string> extra = {}) {
  std::vector<std::string> overrides = o.overrides;
  if (o.seed) overrides.push_back("seed=" + std::to_string(*o.seed));
  if (o.workers) overrides.push_back("workers=" + std::to_string(*o.workers));
  if (o.data_root) overrides.push_back("paths.data_root=" + json(*o.data_root).dump());
  overrides.insert(overrides.end(), extra.begin(), extra.end());
  std::optional<std::filesystem::path> file;
  if (!o.config_file.empty()) file = o.config_file;
  PipelineConfig c = LoadConfig(file, overrides);
  if (o.data_root) c.paths.data_root = *o.data_root;
  if (c.workers > 0) omp_set_num_threads(c.workers);
  return c;
}

void Print(const json& j) { std::cout << j.dump(2) << '\n'; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Manga sound-effect generation pipeline"};
  app.require_subcommand(1);

  CommonOptions build_opts, train_opts, gen_opts, eval_opts, ablate_opts;

  auto* build = app.add_subcommand("build-dataset", "Build the sample manifest");
  AddCommon(build, build_opts);

  auto* train = app.add_subcommand("train", "Train a denoiser");
  AddCommon(train, train_opts);
  std::string train_mode = "in_context";
  std::optional<std::string> train_variant;
  std::optional<long> train_steps;
  bool resume = false;
  train->add_option("--mode", train_mode, "in_context | plain")
      ->check(CLI::IsMember({"in_context", "plain"}));
  train->add_option("--variant", train_variant, "Train the model a variant uses");
  train->add_option("--steps", train_steps, "Target step count");
  train->add_flag("--resume", resume, "Continue from the run checkpoint");

  auto* gen = app.add_subcommand("generate", "Generate outputs for a split");
  AddCommon(gen, gen_opts);
  std::optional<std::string> gen_variant;
  std::optional<std::string> checkpoint;
  gen->add_option("--variant", gen_variant, "full | no_incontext | mask_kontext_crop");
  gen->add_option("--checkpoint", checkpoint, "Checkpoint to load")
      ->check(CLI::ExistingFile);

  auto* eval = app.add_subcommand("evaluate", "Score generated outputs");
  AddCommon(eval, eval_opts);
  std::optional<std::string> eval_variant;
  bool csv = false;
  eval->add_option("--variant", eval_variant, "Variant to score");
  eval->add_flag("--csv", csv, "Print a CSV row instead of JSON");

  auto* ablate = app.add_subcommand("ablate", "Generate and score all variants");
  AddCommon(ablate, ablate_opts);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*build) {
      Print(CmdBuildDataset(Resolve(build_opts)).ToJson());
    } else if (*train) {
      std::vector<std::string> extra;
      if (train_steps) extra.push_back("train.steps=" + std::to_string(*train_steps));
      const PipelineConfig c = Resolve(train_opts, extra);
      const ConditioningMode mode = train_variant
                                        ? ModeFor(ParseVariant(*train_variant))
                                        : ParseConditioningMode(train_mode);
      const TrainSummary s = CmdTrain(c, mode, resume);
      Print({{"mode", ToString(mode)},
             {"steps_run", s.steps_run},
             {"final_step", s.final_step},
             {"initial_smoothed_loss", s.initial_smoothed_loss},
             {"final_smoothed_loss", s.final_smoothed_loss},
             {"checkpoint", s.checkpoint.string()},
             {"loss_csv", s.loss_csv.string()}});
    } else if (*gen) {
      const PipelineConfig c = Resolve(gen_opts);
      const Variant v = gen_variant ? ParseVariant(*gen_variant) : c.generate.variant;
      std::optional<std::filesystem::path> ck;
      if (checkpoint) ck = *checkpoint;
      const GenerateSummary s = CmdGenerate(c, v, ck);
      Print({{"variant", ToString(s.variant)},
             {"generated", s.generated},
             {"failed", s.failed},
             {"warnings", s.warnings},
             {"output_dir", s.output_dir.string()}});
    } else if (*eval) {
      const PipelineConfig c = Resolve(eval_opts);
      const Variant v = eval_variant ? ParseVariant(*eval_variant) : c.generate.variant;
      const MetricReport r = CmdEvaluate(c, v);
      if (csv) {
        std::cout << RenderCsv({r});
      } else {
        Print(r.ToJson());
      }
    } else if (*ablate) {
      const auto rows = CmdAblate(Resolve(ablate_opts));
      std::cout << RenderTextTable(rows);
    }
  } catch (const Error& e) {
    std::cerr << "mangasfx: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "mangasfx: unexpected failure: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
