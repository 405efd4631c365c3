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

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "mangasfx/error.hpp"
#include "mangasfx/pipeline.hpp"
#include "mangasfx/png_io.hpp"
#include "test_util.hpp"

using namespace mangasfx;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

PipelineConfig SmallConfig(const fs::path& root) {
  PipelineConfig c;
  c.paths.data_root = root;
  c.synthetic.train_samples = 12;
  c.synthetic.test_samples = 4;
  c.synthetic.pages_per_title = 2;
  c.dataset.canvas = 32;
  c.model.hidden = 8;
  c.model.adapter_rank = 4;
  c.schedule.sampler_steps = 4;
  c.train.steps = 12;
  c.train.batch_size = 2;
  c.train.log_every = 4;
  c.seed = 3;
  return c;
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("config round trip and defaults") {
  const PipelineConfig d;
  CHECK(d.train.steps == 25000);
  const PipelineConfig back = PipelineConfig::FromJson(d.ToJson());
  CHECK(back.ToJson() == d.ToJson());
  CHECK(back.Digest() == d.Digest());

  const PipelineConfig partial =
      PipelineConfig::FromJson(json{{"train", {{"steps", 10}}}});
  CHECK(partial.train.steps == 10);
  CHECK(partial.train.batch_size == d.train.batch_size);
}

TEST_CASE("config rejects bad input") {
  CHECK_THROWS_AS(PipelineConfig::FromJson(json{{"bogus", 1}}), Error);
  CHECK_THROWS_AS(PipelineConfig::FromJson(json{{"schema", "other/9"}}), Error);
  CHECK_THROWS_AS(PipelineConfig::FromJson(json{{"dataset", {{"canvas", 30}}}}), Error);
  CHECK_THROWS_AS(PipelineConfig::FromJson(json{{"source", "web"}}), Error);
  CHECK_THROWS_AS(PipelineConfig::FromJson(json{{"backends", {{"converter", "ftp://x"}}}}), Error);
  CHECK_THROWS_AS(PipelineConfig::FromJson(json{{"generate", {{"variant", "half"}}}}), Error);
  try {
    PipelineConfig::FromJson(json{{"train", {{"steps", "many"}}}});
    FAIL("expected a config error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kConfig);
  }
}

TEST_CASE("overrides parse values and create nesting") {
  json j = json::object();
  ApplyOverride(j, "train.steps=7");
  ApplyOverride(j, "backends.recognizer=oracle");
  ApplyOverride(j, "model.freeze_base=true");
  CHECK(j["train"]["steps"] == 7);
  CHECK(j["backends"]["recognizer"] == "oracle");
  CHECK(j["model"]["freeze_base"] == true);
  CHECK_THROWS_AS(ApplyOverride(j, "novalue"), Error);
  CHECK_THROWS_AS(ApplyOverride(j, "=3"), Error);
}

TEST_CASE("digest tracks artifact-shaping settings only") {
  PipelineConfig a;
  PipelineConfig b = a;
  b.seed = 99;
  b.workers = 3;
  b.paths.data_root = "/elsewhere";
  b.generate.variant = Variant::kNoInContext;
  b.evaluate.lenient = true;
  CHECK(a.Digest() == b.Digest());
  b.train.steps = 1;
  b.train.log_every = 3;
  CHECK(a.Digest() == b.Digest());
  b.train.batch_size = 9;
  CHECK(a.Digest() != b.Digest());
  PipelineConfig c = a;
  c.dataset.canvas = 128;
  CHECK(a.Digest() != c.Digest());
}

TEST_CASE("run directory is digest plus seed") {
  PipelineConfig c;
  c.paths.data_root = "/data";
  c.seed = 11;
  const RunLayout l = RunLayout::For(c);
  CHECK(l.root == fs::path("/data/runs") / (c.Digest() + "-seed11"));
  CHECK(l.checkpoint(ConditioningMode::kInContext).filename() == "in_context.ckpt");
  CHECK(l.outputs(Variant::kMaskKontextCrop).filename() == "mask_kontext_crop");
}

TEST_CASE("environment overrides the data root") {
  const fs::path dir = testing::ScratchDir("pipeline_env");
  std::ofstream(dir / "c.json") << R"({"paths": {"data_root": "/from/file"}, "seed": 5})";
  unsetenv(kDataRootEnv);
  CHECK(LoadConfig(dir / "c.json").paths.data_root == "/from/file");
  setenv(kDataRootEnv, "/from/env", 1);
  const PipelineConfig c = LoadConfig(dir / "c.json", {"seed=6"});
  unsetenv(kDataRootEnv);
  CHECK(c.paths.data_root == "/from/env");
  CHECK(c.seed == 6);
  CHECK_THROWS_AS(LoadConfig(dir / "missing.json"), Error);
}

TEST_CASE("variant names") {
  for (Variant v : kAllVariants) CHECK(ParseVariant(ToString(v)) == v);
  CHECK(ModeFor(Variant::kNoInContext) == ConditioningMode::kPlain);
  CHECK(ModeFor(Variant::kMaskKontextCrop) == ConditioningMode::kInContext);
  CHECK(SampleSeed(1, "a") != SampleSeed(1, "b"));
  CHECK(SampleSeed(1, "a") != SampleSeed(2, "a"));
}

TEST_CASE("stages fail clearly without prerequisites") {
  const PipelineConfig c = SmallConfig(testing::ScratchDir("pipeline_missing"));
  CHECK_THROWS_AS(CmdTrain(c, ConditioningMode::kInContext), Error);
  CHECK_THROWS_AS(CmdAblate(c), Error);
}

TEST_CASE("small end to end run") {
  const fs::path root = testing::ScratchDir("pipeline_e2e");
  PipelineConfig c = SmallConfig(root);
  const RunLayout layout = RunLayout::For(c);

  const BuildSummary built = CmdBuildDataset(c);
  CHECK(built.train + built.test == built.merged - built.filtered_small - built.skipped_samples);
  CHECK(built.test > 0);
  CHECK(fs::exists(layout.manifest()));
  CHECK(fs::exists(layout.root / "config.json"));
  CHECK(fs::exists(layout.logs() / "build-dataset.jsonl"));

  SUBCASE("zero steps saves the initial network") {
    PipelineConfig z = c;
    z.train.steps = 0;
    const TrainSummary s = CmdTrain(z, ConditioningMode::kPlain);
    CHECK(s.steps_run == 0);
    const LoadedCheckpoint ck = LoadCheckpoint(s.checkpoint);
    const ToyVelocityNet fresh(ck.net->config(), z.seed);
    const auto& a = ck.net->parameters();
    const auto& b = fresh.parameters();
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].name == b[i].name);
      CHECK(a[i].value == b[i].value);
    }
  }

  SUBCASE("training, resume, generation and evaluation") {
    const TrainSummary full = CmdTrain(c, ConditioningMode::kInContext);
    CHECK(full.final_step == 12);
    const std::string ckpt_full = Slurp(full.checkpoint);

    PipelineConfig half = c;
    half.train.steps = 5;
    CmdTrain(half, ConditioningMode::kInContext);
    const TrainSummary resumed = CmdTrain(c, ConditioningMode::kInContext, true);
    CHECK(resumed.steps_run == 7);
    CHECK(Slurp(resumed.checkpoint) == ckpt_full);

    CmdTrain(c, ConditioningMode::kPlain);
    for (Variant v : kAllVariants) {
      const GenerateSummary g = CmdGenerate(c, v);
      CHECK(g.failed == 0);
      CHECK(g.generated == built.test);
    }
    const std::string first_id = ReadManifest(layout.manifest()).back().sample_id;
    const fs::path out = layout.outputs(Variant::kFull) / (first_id + ".png");
    const std::string before = Slurp(out);
    CmdGenerate(c, Variant::kFull);
    CHECK(Slurp(out) == before);

    const MetricReport m = CmdEvaluate(c, Variant::kFull);
    CHECK(m.sample_count == built.test);
    CHECK(m.fid >= 0.0);
    CHECK(m.ned >= 0.0);
    CHECK(m.ned <= 1.0);
    CHECK(fs::exists(layout.metrics(Variant::kFull)));

    const auto rows = CmdAblate(c);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].variant == "full");
    CHECK(rows[1].variant == "no_incontext");
    CHECK(rows[2].variant == "mask_kontext_crop");
    CHECK(fs::exists(layout.root / "ablation.csv"));
    CHECK(fs::exists(layout.root / "ablation.txt"));
  }
}

TEST_CASE("ground truth scored as output gives perfect metrics") {
  const fs::path root = testing::ScratchDir("pipeline_gt");
  PipelineConfig c = SmallConfig(root);
  c.backends.recognizer = "oracle";
  CmdBuildDataset(c);
  const RunLayout layout = RunLayout::For(c);
  const fs::path out = layout.outputs(Variant::kFull);
  fs::create_directories(out);
  long n = 0;
  for (const auto& r : ReadManifest(layout.manifest())) {
    if (r.split != Split::kTest) continue;
    fs::copy_file(layout.dataset() / r.x, out / (r.sample_id + ".png"));
    ++n;
  }
  const MetricReport m = CmdEvaluate(c, Variant::kFull);
  CHECK(m.sample_count == n);
  CHECK(m.fid <= 1e-6);
  CHECK(m.ned == doctest::Approx(1.0));

  fs::remove(out / (ReadManifest(layout.manifest()).back().sample_id + ".png"));
  try {
    CmdEvaluate(c, Variant::kFull);
    FAIL("expected missing outputs");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kMissingOutput);
  }
  c.evaluate.lenient = true;
  CHECK(CmdEvaluate(c, Variant::kFull).skipped == 1);
}
