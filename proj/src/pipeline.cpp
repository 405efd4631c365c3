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

#include "mangasfx/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <numeric>

#include "mangasfx/digest.hpp"
#include "mangasfx/error.hpp"
#include "mangasfx/png_io.hpp"
#include "mangasfx/remote.hpp"
#include "mangasfx/toy_backend.hpp"

namespace mangasfx {

namespace fs = std::filesystem;
using nlohmann::json;

std::string ToString(Variant v) {
  switch (v) {
    case Variant::kFull: return "full";
    case Variant::kNoInContext: return "no_incontext";
    case Variant::kMaskKontextCrop: return "mask_kontext_crop";
  }
  return "full";
}

Variant ParseVariant(const std::string& s) {
  for (Variant v : kAllVariants) {
    if (ToString(v) == s) return v;
  }
  throw Error(ErrorKind::kConfig,
              "unknown variant '" + s +
                  "' (expected full, no_incontext or mask_kontext_crop)");
}

ConditioningMode ModeFor(Variant v) {
  return v == Variant::kNoInContext ? ConditioningMode::kPlain
                                    : ConditioningMode::kInContext;
}

namespace {

std::string RegionName(EvalRegion r) {
  return r == EvalRegion::kPolygonCrop ? "polygon_crop" : "full_canvas";
}

EvalRegion ParseRegion(const std::string& s) {
  if (s == "polygon_crop") return EvalRegion::kPolygonCrop;
  if (s == "full_canvas") return EvalRegion::kFullCanvas;
  throw Error(ErrorKind::kConfig, "unknown evaluation region '" + s + "'");
}

bool IsUri(const std::string& s) { return s.rfind("http://", 0) == 0; }

}  // namespace

json PipelineConfig::ToJson() const {
  return {
      {"schema", kConfigSchema},
      {"paths",
       {{"data_root", paths.data_root.string()},
        {"corpus", paths.corpus.string()},
        {"runs", paths.runs.string()}}},
      {"source", source},
      {"synthetic", synthetic.ToJson()},
      {"dataset", dataset.ToJson()},
      {"model",
       {{"hidden", model.hidden},
        {"first_kernel", model.first_kernel},
        {"mid_kernel", model.mid_kernel},
        {"adapter_rank", model.adapter_rank},
        {"adapter_scale", model.adapter_scale},
        {"freeze_base", model.freeze_base},
        {"data_scale", model.data_scale}}},
      {"schedule", schedule.ToJson()},
      {"train",
       {{"steps", train.steps},
        {"batch_size", train.batch_size},
        {"adam", train.adam.ToJson()},
        {"log_every", train.log_every},
        {"checkpoint_every", train.checkpoint_every},
        {"validation_every", train.validation_every},
        {"validation_samples", train.validation_samples}}},
      {"generate",
       {{"variant", ToString(generate.variant)},
        {"split", ToString(generate.split)},
        {"strict", generate.strict},
        {"converter_prompt", generate.converter_prompt},
        {"converter_style", generate.converter_style.ToJson()},
        {"containment_tolerance", generate.containment_tolerance},
        {"inpaint",
         {{"tolerance", generate.inpaint.tolerance},
          {"max_iterations", generate.inpaint.max_iterations}}}}},
      {"evaluate",
       {{"lenient", evaluate.lenient},
        {"region", RegionName(evaluate.region)}}},
      {"backends",
       {{"denoiser", backends.denoiser},
        {"converter", backends.converter},
        {"inpainter", backends.inpainter},
        {"captioner", backends.captioner},
        {"recognizer", backends.recognizer},
        {"extractor", backends.extractor}}},
      {"seed", seed},
      {"workers", workers}};
}

PipelineConfig PipelineConfig::FromJson(const json& in) {
  if (!in.is_object()) throw Error(ErrorKind::kConfig, "config must be an object");
  const PipelineConfig defaults;
  json j = defaults.ToJson();
  for (const auto& [key, _] : in.items()) {
    if (!j.contains(key)) {
      throw Error(ErrorKind::kConfig, "unknown config key '" + key + "'");
    }
  }
  if (in.contains("schema") && in.at("schema") != kConfigSchema) {
    throw Error(ErrorKind::kConfig,
                "unsupported config schema " + in.at("schema").dump());
  }
  j.merge_patch(in);

  PipelineConfig c;
  try {
    const json& p = j.at("paths");
    c.paths.data_root = p.at("data_root").get<std::string>();
    c.paths.corpus = p.at("corpus").get<std::string>();
    c.paths.runs = p.at("runs").get<std::string>();
    c.source = j.at("source").get<std::string>();
    c.synthetic = SyntheticConfig::FromJson(j.at("synthetic"));
    c.dataset = DatasetConfig::FromJson(j.at("dataset"));
    const json& m = j.at("model");
    c.model.hidden = m.at("hidden").get<int>();
    c.model.first_kernel = m.at("first_kernel").get<int>();
    c.model.mid_kernel = m.at("mid_kernel").get<int>();
    c.model.adapter_rank = m.at("adapter_rank").get<int>();
    c.model.adapter_scale = m.at("adapter_scale").get<double>();
    c.model.freeze_base = m.at("freeze_base").get<bool>();
    c.model.data_scale = m.at("data_scale").get<double>();
    c.schedule = NoiseSchedule::FromJson(j.at("schedule"));
    const json& t = j.at("train");
    c.train.steps = t.at("steps").get<long>();
    c.train.batch_size = t.at("batch_size").get<int>();
    c.train.adam = AdamConfig::FromJson(t.at("adam"));
    c.train.log_every = t.at("log_every").get<int>();
    c.train.checkpoint_every = t.at("checkpoint_every").get<long>();
    c.train.validation_every = t.at("validation_every").get<long>();
    c.train.validation_samples = t.at("validation_samples").get<int>();
    const json& g = j.at("generate");
    c.generate.variant = ParseVariant(g.at("variant").get<std::string>());
    c.generate.split = ParseSplit(g.at("split").get<std::string>());
    c.generate.strict = g.at("strict").get<bool>();
    c.generate.converter_prompt = g.at("converter_prompt").get<std::string>();
    c.generate.converter_style = ConverterStyle::FromJson(g.at("converter_style"));
    c.generate.containment_tolerance = g.at("containment_tolerance").get<int>();
    c.generate.inpaint.tolerance = g.at("inpaint").at("tolerance").get<double>();
    c.generate.inpaint.max_iterations =
        g.at("inpaint").at("max_iterations").get<int>();
    const json& e = j.at("evaluate");
    c.evaluate.lenient = e.at("lenient").get<bool>();
    c.evaluate.region = ParseRegion(e.at("region").get<std::string>());
    const json& b = j.at("backends");
    c.backends.denoiser = b.at("denoiser").get<std::string>();
    c.backends.converter = b.at("converter").get<std::string>();
    c.backends.inpainter = b.at("inpainter").get<std::string>();
    c.backends.captioner = b.at("captioner").get<std::string>();
    c.backends.recognizer = b.at("recognizer").get<std::string>();
    c.backends.extractor = b.at("extractor").get<std::string>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.workers = j.at("workers").get<int>();
  } catch (const json::exception& ex) {
    throw Error(ErrorKind::kConfig, ex.what());
  }
  c.Validate();
  return c;
}

void PipelineConfig::Validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::kConfig, msg); };
  if (source != "synthetic" && source != "corpus") {
    fail("source must be 'synthetic' or 'corpus'");
  }
  schedule.Validate();
  if (dataset.canvas % 8 != 0) fail("canvas must be a multiple of 8");
  if (model.hidden <= 0 || model.first_kernel <= 0 || model.mid_kernel <= 0 ||
      model.first_kernel % 2 == 0 || model.mid_kernel % 2 == 0) {
    fail("model sizes must be positive and kernels odd");
  }
  if (model.adapter_rank <= 0) fail("adapter_rank must be positive");
  if (!(model.data_scale >= 0.0)) fail("model.data_scale must be >= 0");
  if (train.steps < 0 || train.batch_size <= 0 || train.log_every <= 0) {
    fail("train.steps >= 0, batch_size > 0 and log_every > 0 required");
  }
  if (workers < 0) fail("workers must be >= 0");
  for (const auto& [name, value] :
       {std::pair{"denoiser", backends.denoiser},
        std::pair{"converter", backends.converter},
        std::pair{"inpainter", backends.inpainter},
        std::pair{"captioner", backends.captioner}}) {
    if (value != "reference" && !IsUri(value)) {
      fail(std::string("backend ") + name + " must be 'reference' or an http:// URI");
    }
    if (IsUri(value)) ServiceUri::Parse(value);
  }
  const auto& r = backends.recognizer;
  if (r != "template" && r != "oracle" && !IsUri(r)) {
    fail("recognizer must be 'template', 'oracle' or an http:// URI");
  }
  if (backends.extractor != "histogram68") {
    fail("extractor must be 'histogram68'");
  }
}

std::string PipelineConfig::Digest() const {
  json j = ToJson();
  j.erase("paths");
  j.erase("seed");
  j.erase("workers");
  j["generate"].erase("variant");
  j["generate"].erase("split");
  j["generate"].erase("strict");
  j["evaluate"].erase("lenient");
  for (const char* key : {"steps", "log_every", "checkpoint_every",
                          "validation_every", "validation_samples"}) {
    j["train"].erase(key);
  }
  return HexDigest(Fnv1a64(j.dump())).substr(0, 12);
}

FlowTask PipelineConfig::Task(ConditioningMode mode) const {
  FlowTask t;
  t.mode = mode;
  t.canvas = dataset.canvas;
  return t;
}

void ApplyOverride(json& config, const std::string& assignment) {
  const std::size_t eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw Error(ErrorKind::kConfig,
                "override must look like key.path=value: " + assignment);
  }
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::exception&) {
    value = raw;
  }
  json* node = &config;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = key.find('.', start);
    const std::string part = key.substr(start, dot - start);
    if (dot == std::string::npos) {
      (*node)[part] = value;
      break;
    }
    json& child = (*node)[part];
    if (!child.is_object()) child = json::object();
    node = &child;
    start = dot + 1;
  }
}

PipelineConfig LoadConfig(const std::optional<fs::path>& file,
                          const std::vector<std::string>& overrides) {
  json j = json::object();
  if (file) {
    std::ifstream in(*file);
    if (!in) throw Error(ErrorKind::kConfig, "cannot open " + file->string());
    try {
      j = json::parse(in);
    } catch (const json::exception& e) {
      throw Error(ErrorKind::kConfig, file->string() + ": " + e.what());
    }
  }
  for (const auto& o : overrides) ApplyOverride(j, o);
  PipelineConfig c = PipelineConfig::FromJson(j);
  if (const char* root = std::getenv(kDataRootEnv); root && *root) {
    c.paths.data_root = root;
  }
  return c;
}

RunLayout RunLayout::For(const PipelineConfig& config) {
  return {config.paths.data_root / config.paths.runs /
          (config.Digest() + "-seed" + std::to_string(config.seed))};
}

fs::path RunLayout::checkpoint(ConditioningMode mode) const {
  return root / "checkpoints" / (ToString(mode) + ".ckpt");
}

fs::path RunLayout::loss_csv(ConditioningMode mode) const {
  return root / ("train_" + ToString(mode) + "_loss.csv");
}

fs::path RunLayout::outputs(Variant v) const {
  return root / "outputs" / ToString(v);
}

fs::path RunLayout::metrics(Variant v) const {
  return root / "metrics" / (ToString(v) + ".json");
}

EventLog::EventLog(const fs::path& dir, std::string stage)
    : stage_(std::move(stage)) {
  fs::create_directories(dir);
  out_.open(dir / (stage_ + ".jsonl"), std::ios::app);
  if (!out_) throw Error(ErrorKind::kIo, "cannot open event log in " + dir.string());
}

void EventLog::Emit(const std::string& event, json fields) {
  const auto now = std::chrono::system_clock::now();
  const std::time_t secs = std::chrono::system_clock::to_time_t(now);
  std::tm utc{};
  gmtime_r(&secs, &utc);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &utc);
  fields["time"] = stamp;
  fields["stage"] = stage_;
  fields["event"] = event;
  std::lock_guard<std::mutex> lock(mu_);
  out_ << fields.dump() << '\n';
  out_.flush();
}

std::uint64_t SampleSeed(std::uint64_t run_seed, const std::string& sample_id) {
  return Fnv1a64(sample_id, Fnv1a64(&run_seed, sizeof run_seed));
}

namespace {

void WriteConfigSnapshot(const PipelineConfig& config, const RunLayout& layout) {
  fs::create_directories(layout.root);
  std::ofstream out(layout.root / "config.json");
  out << config.ToJson().dump(2) << '\n';
}

std::unique_ptr<CaptionerBackend> MakeCaptioner(const BackendSettings& b) {
  if (IsUri(b.captioner)) {
    return std::make_unique<RemoteCaptioner>(ServiceUri::Parse(b.captioner));
  }
  return std::make_unique<ReferenceCaptioner>();
}

std::vector<SampleRecord> LoadManifestOrFail(const RunLayout& layout) {
  if (!fs::exists(layout.manifest())) {
    throw Error(ErrorKind::kConfig,
                "no dataset at " + layout.manifest().string() +
                    "; run build-dataset with the same config first");
  }
  return ReadManifest(layout.manifest());
}

std::vector<SampleRecord> OfSplit(const std::vector<SampleRecord>& all,
                                  Split split) {
  std::vector<SampleRecord> out;
  std::copy_if(all.begin(), all.end(), std::back_inserter(out),
               [&](const SampleRecord& r) { return r.split == split; });
  return out;
}

ToyNetConfig NetConfigFor(const PipelineConfig& config, const FlowTask& task) {
  ToyNetConfig n = task.NetConfig(config.model.hidden, config.model.adapter_rank,
                                  config.model.adapter_scale);
  n.first_kernel = config.model.first_kernel;
  n.mid_kernel = config.model.mid_kernel;
  n.freeze_base = config.model.freeze_base && n.adapters;
  n.data_scale = config.model.data_scale;
  return n;
}

std::vector<TrainExample> LoadExamples(const std::vector<SampleRecord>& records,
                                       const fs::path& root,
                                       const FlowTask& task) {
  std::vector<TrainExample> out(records.size());
  std::vector<std::string> errors(records.size());
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < records.size(); ++i) {
    try {
      const SampleImages s = LoadSample(records[i], root);
      out[i].condition = task.MakeCondition(s);
      out[i].x0 = task.MakeTarget(s);
    } catch (const std::exception& e) {
      errors[i] = records[i].sample_id + ": " + e.what();
    }
  }
  for (const auto& e : errors) {
    if (!e.empty()) throw Error(ErrorKind::kIngest, e);
  }
  return out;
}

// Rows of [sampled output | target] for a few held-out samples.
void WriteValidationGrid(const ToyVelocityNet& net, const FlowTask& task,
                         const PipelineConfig& config,
                         const std::vector<SampleRecord>& records,
                         const std::vector<TrainExample>& examples,
                         const fs::path& path) {
  std::vector<RasterImage> rows(examples.size());
#pragma omp parallel for
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const LatentTensor out =
        Sample(net, examples[i].condition, task.TargetShape(), config.schedule,
               SampleSeed(config.seed, records[i].sample_id));
    rows[i] = ConcatH(task.DecodeOutput(out), task.DecodeOutput(examples[i].x0)).image;
  }
  if (rows.empty()) return;
  RasterImage grid(rows[0].width(), rows[0].height() * static_cast<int>(rows.size()), 3);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const int top = static_cast<int>(i) * rows[0].height();
    for (int y = 0; y < rows[i].height(); ++y) {
      const auto src = rows[i].row(y);
      std::copy(src.begin(), src.end(), &grid.at(0, top + y));
    }
  }
  fs::create_directories(path.parent_path());
  WritePng(path, grid);
}

double MeanOf(const std::vector<double>& v, std::size_t first, std::size_t count) {
  if (count == 0) return 0.0;
  return std::accumulate(v.begin() + first, v.begin() + first + count, 0.0) / count;
}

}  // namespace

BuildSummary CmdBuildDataset(const PipelineConfig& config) {
  const RunLayout layout = RunLayout::For(config);
  WriteConfigSnapshot(config, layout);
  EventLog log(layout.logs(), "build-dataset");
  log.Emit("start", {{"run", layout.root.string()}, {"source", config.source}});

  CorpusLayout corpus{config.paths.data_root / config.paths.corpus};
  if (config.source == "synthetic") {
    corpus.root = layout.corpus();
    fs::remove_all(corpus.root);
    GenerateSyntheticCorpus(config.synthetic, corpus.root);
    log.Emit("synthetic_corpus", {{"path", corpus.root.string()},
                                  {"config", config.synthetic.ToJson()}});
  }
  const auto captioner = MakeCaptioner(config.backends);
  fs::remove_all(layout.dataset());
  try {
    BuildSummary summary =
        BuildDataset(corpus, layout.dataset(), config.dataset, *captioner);
    for (const auto& w : summary.warnings) log.Emit("warning", {{"message", w}});
    json fields = summary.ToJson();
    fields.erase("warnings");
    fields["warning_count"] = summary.warnings.size();
    log.Emit("done", fields);
    return summary;
  } catch (const Error& e) {
    log.Emit("error", {{"kind", ToString(e.kind())}, {"message", e.what()}});
    throw;
  }
}

TrainSummary CmdTrain(const PipelineConfig& config, ConditioningMode mode,
                      bool resume) {
  if (config.backends.denoiser != "reference") {
    throw Error(ErrorKind::kConfig,
                "training needs the reference denoiser; external denoisers "
                "are trained out of process");
  }
  const RunLayout layout = RunLayout::For(config);
  WriteConfigSnapshot(config, layout);
  EventLog log(layout.logs(), "train");
  const FlowTask task = config.Task(mode);
  const auto all = LoadManifestOrFail(layout);
  const auto train_records = OfSplit(all, Split::kTrain);
  if (train_records.empty()) {
    throw Error(ErrorKind::kConfig, "the dataset has no training samples");
  }
  const auto examples = LoadExamples(train_records, layout.dataset(), task);

  std::vector<SampleRecord> val_records = OfSplit(all, Split::kTest);
  if (val_records.empty()) val_records = train_records;
  val_records.resize(std::min<std::size_t>(
      val_records.size(), std::max(0, config.train.validation_samples)));
  const auto val_examples =
      config.train.validation_every > 0
          ? LoadExamples(val_records, layout.dataset(), task)
          : std::vector<TrainExample>{};

  const fs::path ckpt = layout.checkpoint(mode);
  std::unique_ptr<ToyVelocityNet> net;
  TrainerState state(config.seed ^ 0x5eedf00dULL);
  if (resume && fs::exists(ckpt)) {
    LoadedCheckpoint loaded = LoadCheckpoint(ckpt);
    if (loaded.net->config().ToJson() != NetConfigFor(config, task).ToJson()) {
      throw Error(ErrorKind::kConfig, "checkpoint network differs from config");
    }
    net = std::move(loaded.net);
    state = std::move(loaded.trainer);
    log.Emit("resume", {{"checkpoint", ckpt.string()}, {"step", state.step}});
  } else {
    net = std::make_unique<ToyVelocityNet>(NetConfigFor(config, task), config.seed);
  }
  log.Emit("start", {{"mode", ToString(mode)},
                     {"samples", examples.size()},
                     {"network", net->Identity()},
                     {"from_step", state.step},
                     {"to_step", config.train.steps}});

  const bool append = resume && state.step > 0 && fs::exists(layout.loss_csv(mode));
  std::ofstream csv(layout.loss_csv(mode), append ? std::ios::app : std::ios::trunc);
  if (!append) csv << "step,loss,smoothed\n";
  csv.precision(10);

  json metadata = {{"mode", ToString(mode)},
                   {"config_digest", config.Digest()},
                   {"seed", config.seed}};
  auto save = [&] {
    fs::create_directories(ckpt.parent_path());
    SaveCheckpoint(ckpt, *net, state, config.schedule, metadata);
    log.Emit("checkpoint", {{"step", state.step}, {"path", ckpt.string()}});
  };

  std::vector<double> losses;
  double smoothed = 0.0;
  std::uniform_int_distribution<std::size_t> pick(0, examples.size() - 1);
  std::vector<const TrainExample*> batch(config.train.batch_size);
  try {
    while (state.step < config.train.steps) {
      for (auto& b : batch) b = &examples[pick(state.rng)];
      const StepReport r =
          TrainStep(*net, state, config.train.adam, batch, config.schedule);
      smoothed = losses.empty() ? r.loss : 0.98 * smoothed + 0.02 * r.loss;
      losses.push_back(r.loss);
      csv << state.step << ',' << r.loss << ',' << smoothed << '\n';
      if (state.step % config.train.log_every == 0) {
        log.Emit("step", {{"step", state.step}, {"loss", r.loss}, {"smoothed", smoothed}});
      }
      if (config.train.checkpoint_every > 0 &&
          state.step % config.train.checkpoint_every == 0) {
        save();
      }
      if (config.train.validation_every > 0 &&
          state.step % config.train.validation_every == 0) {
        const fs::path grid = layout.validation() /
                              (ToString(mode) + "_step" + std::to_string(state.step) + ".png");
        WriteValidationGrid(*net, task, config, val_records, val_examples, grid);
        log.Emit("validation", {{"step", state.step}, {"path", grid.string()}});
      }
    }
  } catch (const Error& e) {
    log.Emit("abort", {{"step", state.step}, {"kind", ToString(e.kind())}, {"message", e.what()}});
    throw;
  }
  save();

  TrainSummary s;
  s.steps_run = static_cast<long>(losses.size());
  s.final_step = state.step;
  const std::size_t window = std::min<std::size_t>(50, losses.size());
  s.initial_smoothed_loss = MeanOf(losses, 0, window);
  s.final_smoothed_loss = MeanOf(losses, losses.size() - window, window);
  s.checkpoint = ckpt;
  s.loss_csv = layout.loss_csv(mode);
  log.Emit("done", {{"steps_run", s.steps_run},
                    {"final_step", s.final_step},
                    {"initial_smoothed_loss", s.initial_smoothed_loss},
                    {"final_smoothed_loss", s.final_smoothed_loss}});
  return s;
}

GenerateSummary CmdGenerate(const PipelineConfig& config, Variant variant,
                            const std::optional<fs::path>& checkpoint) {
  const RunLayout layout = RunLayout::For(config);
  WriteConfigSnapshot(config, layout);
  EventLog log(layout.logs(), "generate");
  const ConditioningMode mode = ModeFor(variant);
  const FlowTask task = config.Task(mode);

  std::unique_ptr<DenoiserBackend> denoiser;
  if (IsUri(config.backends.denoiser)) {
    denoiser = std::make_unique<RemoteDenoiser>(ServiceUri::Parse(config.backends.denoiser));
  } else {
    const fs::path path = checkpoint.value_or(layout.checkpoint(mode));
    if (!fs::exists(path)) {
      throw Error(ErrorKind::kConfig, "no checkpoint at " + path.string() +
                                          "; train the " + ToString(mode) +
                                          " model first");
    }
    LoadedCheckpoint loaded = LoadCheckpoint(path);
    if (loaded.net->config().cond_channels != task.ConditionChannels() ||
        loaded.net->config().latent_channels != task.TargetShape().channels) {
      throw Error(ErrorKind::kConfig, "checkpoint " + path.string() +
                                          " does not fit the " + ToString(mode) + " task");
    }
    denoiser = std::move(loaded.net);
  }
  std::unique_ptr<ConverterBackend> converter;
  if (IsUri(config.backends.converter)) {
    converter = std::make_unique<RemoteConverter>(ServiceUri::Parse(config.backends.converter));
  } else {
    converter = std::make_unique<ReferenceConverter>(config.generate.converter_style);
  }
  std::unique_ptr<InpainterBackend> inpainter;
  if (IsUri(config.backends.inpainter)) {
    inpainter = std::make_unique<RemoteInpainter>(ServiceUri::Parse(config.backends.inpainter));
  } else {
    inpainter = std::make_unique<ReferenceInpainter>(config.generate.inpaint);
  }
  const bool parallel_ok = !IsUri(config.backends.denoiser) &&
                           !IsUri(config.backends.converter) &&
                           !IsUri(config.backends.inpainter);

  const auto records = OfSplit(LoadManifestOrFail(layout), config.generate.split);
  const fs::path out_dir = layout.outputs(variant);
  fs::remove_all(out_dir);
  fs::create_directories(out_dir);
  log.Emit("start", {{"variant", ToString(variant)},
                     {"samples", records.size()},
                     {"denoiser", denoiser->Identity()},
                     {"converter", converter->Identity()},
                     {"inpainter", inpainter->Identity()}});

  std::vector<std::string> failures(records.size());
  std::vector<std::vector<std::string>> warnings(records.size());
#pragma omp parallel for schedule(dynamic) if (parallel_ok)
  for (std::size_t i = 0; i < records.size(); ++i) {
    const SampleRecord& r = records[i];
    try {
      const SampleImages s = LoadSample(r, layout.dataset());
      const std::uint64_t seed = SampleSeed(config.seed, r.sample_id);
      const LatentTensor latent = Sample(*denoiser, task.MakeCondition(s),
                                         task.TargetShape(), config.schedule, seed);
      const RasterImage decoded = task.DecodeOutput(latent);
      json sidecar = {{"sample_id", r.sample_id},
                      {"variant", ToString(variant)},
                      {"seed", seed},
                      {"denoiser", denoiser->Identity()}};
      RasterImage final_image;
      if (variant == Variant::kMaskKontextCrop) {
        final_image = task.layout.RgbHalf(WrapCanvas(decoded, task.canvas));
      } else {
        const RasterImage mask_image =
            variant == Variant::kFull
                ? task.layout.MaskHalf(WrapCanvas(decoded, task.canvas))
                : decoded;
        const BinaryMask mask = Binarize(ToLuminance(mask_image));
        WriteMaskPng(out_dir / (r.sample_id + "_mask.png"), mask);
        RasterImage layer(s.y.width(), s.y.height(), 4, 0);
        if (mask.count() == 0) {
          warnings[i].push_back("generated mask is empty; output is the inpainted context");
        } else {
          ConvertResult converted =
              Convert(mask, config.generate.converter_prompt, *converter,
                      config.generate.containment_tolerance);
          layer = std::move(converted.layer);
          for (auto& w : converted.warnings) warnings[i].push_back(std::move(w));
          WritePng(out_dir / (r.sample_id + "_rgba.png"), layer);
        }
        const Composition comp = ComposeFinal(s.y, s.polygon, layer, *inpainter);
        final_image = comp.final_image;
        sidecar["offset"] = {comp.offset_x, comp.offset_y};
        sidecar["converter"] = converter->Identity();
        sidecar["inpainter"] = inpainter->Identity();
        sidecar["mask_pixels"] = mask.count();
      }
      WritePng(out_dir / (r.sample_id + ".png"), final_image);
      sidecar["warnings"] = warnings[i];
      std::ofstream(out_dir / (r.sample_id + ".json")) << sidecar.dump(2) << '\n';
    } catch (const std::exception& e) {
      failures[i] = e.what();
    }
  }

  GenerateSummary summary;
  summary.variant = variant;
  summary.output_dir = out_dir;
  for (std::size_t i = 0; i < records.size(); ++i) {
    for (const auto& w : warnings[i]) {
      summary.warnings.push_back(records[i].sample_id + ": " + w);
      log.Emit("warning", {{"sample_id", records[i].sample_id}, {"message", w}});
    }
    if (failures[i].empty()) {
      ++summary.generated;
    } else {
      ++summary.failed;
      log.Emit("sample_failed", {{"sample_id", records[i].sample_id}, {"message", failures[i]}});
    }
  }
  log.Emit("done", {{"variant", ToString(variant)},
                    {"generated", summary.generated},
                    {"failed", summary.failed},
                    {"warnings", summary.warnings.size()}});
  if (summary.failed > 0 && config.generate.strict) {
    const auto first = std::find_if(failures.begin(), failures.end(),
                                    [](const auto& f) { return !f.empty(); });
    throw Error(ErrorKind::kBackend,
                std::to_string(summary.failed) + " of " +
                    std::to_string(records.size()) + " samples failed; first: " + *first);
  }
  return summary;
}

MetricReport CmdEvaluate(const PipelineConfig& config, Variant variant) {
  const RunLayout layout = RunLayout::For(config);
  EventLog log(layout.logs(), "evaluate");
  const auto records = LoadManifestOrFail(layout);
  if (!fs::exists(layout.outputs(variant))) {
    throw Error(ErrorKind::kMissingOutput,
                "no generated outputs for variant " + ToString(variant));
  }
  HistogramFeatures extractor;
  std::unique_ptr<RecognizerBackend> recognizer;
  if (config.backends.recognizer == "oracle") {
    auto oracle = std::make_unique<OracleRecognizer>();
    for (const auto& r : records) {
      if (r.split != Split::kTest) continue;
      oracle->Register(EvalView(ReadPng(layout.dataset() / r.x), r.polygon,
                                config.evaluate.region),
                       r.text);
    }
    recognizer = std::move(oracle);
  } else if (IsUri(config.backends.recognizer)) {
    recognizer = std::make_unique<RemoteRecognizer>(ServiceUri::Parse(config.backends.recognizer));
  } else {
    recognizer = std::make_unique<TemplateRecognizer>();
  }
  EvalOptions options;
  options.variant = ToString(variant);
  options.config_digest = config.Digest();
  options.lenient = config.evaluate.lenient;
  options.region = config.evaluate.region;
  try {
    MetricReport report = EvaluateRun(layout.outputs(variant), records,
                                      layout.dataset(), extractor, *recognizer, options);
    fs::create_directories(layout.metrics(variant).parent_path());
    std::ofstream(layout.metrics(variant)) << report.ToJson().dump(2) << '\n';
    log.Emit("done", report.ToJson());
    return report;
  } catch (const Error& e) {
    log.Emit("error", {{"variant", ToString(variant)}, {"kind", ToString(e.kind())}, {"message", e.what()}});
    throw;
  }
}

std::vector<MetricReport> CmdAblate(const PipelineConfig& config) {
  const RunLayout layout = RunLayout::For(config);
  std::vector<std::string> missing;
  for (ConditioningMode m : {ConditioningMode::kInContext, ConditioningMode::kPlain}) {
    if (!IsUri(config.backends.denoiser) && !fs::exists(layout.checkpoint(m))) {
      missing.push_back(layout.checkpoint(m).string());
    }
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    throw Error(ErrorKind::kConfig, "ablation needs trained checkpoints: " + list);
  }
  std::vector<MetricReport> rows;
  for (Variant v : kAllVariants) {
    CmdGenerate(config, v);
    rows.push_back(CmdEvaluate(config, v));
  }
  std::ofstream(layout.root / "ablation.csv") << RenderCsv(rows);
  std::ofstream(layout.root / "ablation.txt") << RenderTextTable(rows);
  EventLog log(layout.logs(), "ablate");
  json table = json::array();
  for (const auto& r : rows) table.push_back(r.ToJson());
  log.Emit("done", {{"rows", table}});
  return rows;
}

}  // namespace mangasfx
