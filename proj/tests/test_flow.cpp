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

#include <Eigen/LU>
#include <random>

#include "doctest.h"
#include "mangasfx/conditioning.hpp"
#include "mangasfx/error.hpp"
#include "mangasfx/flow.hpp"
#include "mangasfx/toy_backend.hpp"
#include "mangasfx/trainer.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace mangasfx;

namespace {

LatentTensor Constant(LatentShape s, double v) { return LatentTensor(s, v); }

LatentTensor Random(LatentShape s, std::mt19937_64& rng) {
  LatentTensor t(s);
  std::normal_distribution<double> n(0.0, 1.0);
  for (double& v : t.values) v = n(rng);
  return t;
}

double MaxAbsDiff(const LatentTensor& a, const LatentTensor& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    m = std::max(m, std::abs(a.values[i] - b.values[i]));
  }
  return m;
}

template <typename F>
ErrorKind KindOf(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected mangasfx::Error");
  return ErrorKind::kBackend;
}

const LatentShape kShape{2, 3, 4};

}  // namespace

TEST_CASE("interpolate") {
  std::mt19937_64 rng(1);
  const auto x0 = Random(kShape, rng);
  const auto z = Random(kShape, rng);
  CHECK(MaxAbsDiff(Interpolate(x0, z, 0.0), x0) == 0.0);
  CHECK(MaxAbsDiff(Interpolate(x0, z, 1.0), z) == 0.0);
  const auto mid = Interpolate(Constant(kShape, 0), Constant(kShape, 2), 0.5);
  for (double v : mid.values) CHECK(v == 1.0);
  CHECK(KindOf([&] { Interpolate(x0, z, 1.5); }) == ErrorKind::kRange);
  CHECK(KindOf([&] { Interpolate(x0, Constant({1, 1, 1}, 0), 0.5); }) ==
        ErrorKind::kShape);
}

TEST_CASE("velocity_target") {
  std::mt19937_64 rng(2);
  const auto x0 = Random(kShape, rng);
  for (double v : VelocityTarget(x0, x0).values) CHECK(v == 0.0);
  const auto z = Random(kShape, rng);
  CHECK(MaxAbsDiff(VelocityTarget(Constant(kShape, 0), z), z) == 0.0);
  for (double v : VelocityTarget(Constant(kShape, 1), Constant(kShape, 3)).values) {
    CHECK(v == 2.0);
  }
}

TEST_CASE("fm_loss") {
  std::mt19937_64 rng(3);
  const auto a = Random(kShape, rng);
  CHECK(FmLoss(a, a, 1.0) == 0.0);
  LatentTensor shifted = a;
  for (double& v : shifted.values) v += 2.0;
  CHECK(FmLoss(shifted, a, 1.0) == doctest::Approx(4.0).epsilon(1e-12));
  const auto b = Random(kShape, rng);
  CHECK(FmLoss(a, b, 2.0) == doctest::Approx(2.0 * FmLoss(a, b, 1.0)));
  CHECK(FmLoss(a, b, 1.0) > 0.0);
  CHECK(KindOf([&] { FmLoss(a, b, 0.0); }) == ErrorKind::kRange);
}

TEST_CASE("noise schedule validation") {
  NoiseSchedule s;
  CHECK_NOTHROW(s.Validate());
  CHECK(s.sampler_steps == 28);
  s.sigma_kind = "shifted";
  s.shift = 3.0;
  CHECK_NOTHROW(s.Validate());
  CHECK(s.Sigma(0.5) == doctest::Approx(0.75));
  s.sampler_steps = 0;
  CHECK(KindOf([&] { s.Validate(); }) == ErrorKind::kConfig);
}

TEST_CASE("sampling with the exact velocity recovers x0") {
  std::mt19937_64 rng(4);
  const auto x0 = Random(kShape, rng);
  const std::uint64_t seed = 99;
  oracle::ExactVelocityBackend backend(x0, DrawNoise(kShape, seed));
  for (int steps : {1, 5, 50}) {
    NoiseSchedule s;
    s.sampler_steps = steps;
    CHECK(MaxAbsDiff(Sample(backend, {}, kShape, s, seed), x0) < 1e-6);
  }
  NoiseSchedule s;
  const auto a = Sample(backend, {}, kShape, s, seed);
  const auto b = Sample(backend, {}, kShape, s, seed);
  CHECK(a.values == b.values);
}

TEST_CASE("apply_adapter") {
  std::mt19937_64 rng(5);
  Eigen::MatrixXd base = Eigen::MatrixXd::Random(4, 3);
  LowRankAdapter zero{Eigen::MatrixXd::Random(2, 3), Eigen::MatrixXd::Zero(4, 2), 1.0};
  CHECK(ApplyAdapter(base, zero) == base);

  LowRankAdapter e1{Eigen::MatrixXd::Zero(1, 3), Eigen::MatrixXd::Zero(4, 1), 3.0};
  e1.down(0, 0) = 1.0;
  e1.up(0, 0) = 1.0;
  Eigen::MatrixXd expected = base;
  expected(0, 0) += 3.0;
  CHECK((ApplyAdapter(base, e1) - expected).norm() == 0.0);

  LowRankAdapter r{Eigen::MatrixXd::Random(2, 3), Eigen::MatrixXd::Random(4, 2), 0.5};
  const Eigen::MatrixXd merged = ApplyAdapter(base, r);
  for (int i = 0; i < 20; ++i) {
    const Eigen::VectorXd v = Eigen::VectorXd::Random(3);
    const Eigen::VectorXd split = base * v + r.scale * (r.up * (r.down * v));
    CHECK((merged * v - split).cwiseAbs().maxCoeff() < 1e-6);
  }
  CHECK(Eigen::FullPivLU<Eigen::MatrixXd>(r.Delta()).rank() <= 2);

  LowRankAdapter bad{Eigen::MatrixXd::Zero(2, 5), Eigen::MatrixXd::Zero(4, 2), 1.0};
  CHECK(KindOf([&] { ApplyAdapter(base, bad); }) == ErrorKind::kDimension);
}

TEST_CASE("zero adapter leaves network outputs unchanged") {
  ToyNetConfig cfg;
  cfg.latent_channels = 4;
  cfg.cond_channels = 3;
  cfg.hidden = 6;
  ToyVelocityNet plain(cfg, 17);
  cfg.adapters = true;
  cfg.adapter_rank = 2;
  ToyVelocityNet adapted(cfg, 17);
  // Same base weights, adapter up-matrices start at zero.
  for (auto& p : adapted.parameters()) {
    for (const auto& q : plain.parameters()) {
      if (p.name == q.name) p.value = q.value;
    }
  }
  std::mt19937_64 rng(6);
  Condition c;
  c.latent = Random({3, 4, 5}, rng);
  const auto x = Random({4, 4, 5}, rng);
  CHECK(MaxAbsDiff(plain.Predict(x, 0.3, c), adapted.Predict(x, 0.3, c)) == 0.0);
}

TEST_CASE("skip path of the preconditioned network") {
  ToyNetConfig cfg;
  cfg.latent_channels = 2;
  cfg.cond_channels = 1;
  cfg.hidden = 4;
  cfg.data_scale = 0.5;
  ToyVelocityNet net(cfg, 3);
  for (auto& p : net.parameters()) {
    if (p.name.rfind("conv3", 0) == 0) p.value.setZero();
  }
  std::mt19937_64 rng(8);
  Condition c;
  c.latent = Random({1, 3, 3}, rng);
  const auto x = Random({2, 3, 3}, rng);
  // skip(t) = (t - (1-t) s^2) / ((1-t)^2 s^2 + t^2) with s = 0.5.
  const std::pair<double, double> cases[] = {{1.0, 1.0}, {0.0, -1.0}, {0.5, 1.2}};
  for (const auto& [t, skip] : cases) {
    const auto v = net.Predict(x, t, c);
    for (std::size_t i = 0; i < v.values.size(); ++i) {
      CHECK(v.values[i] == doctest::Approx(skip * x.values[i]).epsilon(1e-12));
    }
  }
  cfg.data_scale = 0.0;
  ToyVelocityNet raw(cfg, 3);
  for (auto& p : raw.parameters()) {
    if (p.name.rfind("conv3", 0) == 0) p.value.setZero();
  }
  for (double v : raw.Predict(x, 0.5, c).values) CHECK(v == 0.0);
}

TEST_CASE("codec") {
  std::mt19937_64 rng(7);
  PackingCodec codec;
  for (int i = 0; i < 10; ++i) {
    const auto img = testing::RandomImage(rng, 16, 24, 3);
    const auto back = codec.Decode(codec.Encode(img), 3);
    int max_err = 0;
    for (std::size_t k = 0; k < img.pixels().size(); ++k) {
      max_err = std::max(max_err, std::abs(int(img.pixels()[k]) - int(back.pixels()[k])));
    }
    CHECK(max_err <= 1);
  }
  const auto zero = codec.Encode(RasterImage(16, 8, 3, 0));
  for (double v : zero.values) CHECK(v == 0.0);
  CHECK(zero.shape == LatentShape{3 * 64, 1, 2});
  CHECK(KindOf([&] { codec.Encode(RasterImage(12, 8, 3)); }) == ErrorKind::kShape);
}

TEST_CASE("toy network gradients match central differences") {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    auto inst = oracle::MakeGradientInstance(seed);
    const auto r = oracle::CheckGradients(inst.net, inst.items);
    INFO("worst parameter " << r.worst_parameter);
    CHECK(r.max_relative_error < 1e-4);
  }
}

namespace {

struct TinyProblem {
  ToyVelocityNet net;
  std::vector<TrainExample> examples;
};

TinyProblem MakeTinyProblem(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  ToyNetConfig cfg;
  cfg.latent_channels = 3;
  cfg.cond_channels = 3;
  cfg.hidden = 8;
  TinyProblem p{ToyVelocityNet(cfg, seed), {}};
  TrainExample ex;
  ex.condition.latent = Random({3, 2, 2}, rng);
  ex.x0 = Random({3, 2, 2}, rng);
  p.examples.push_back(ex);
  return p;
}

double EvalLoss(const ToyVelocityNet& net, const TrainExample& ex,
                std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<FlowTrainItem> items;
  for (int i = 0; i < 64; ++i) {
    const double t = u(rng);
    const auto z = DrawNoise(ex.x0.shape, seed + i);
    FlowTrainItem it;
    it.condition = &ex.condition;
    it.t = t;
    it.x_t = Interpolate(ex.x0, z, t);
    it.target = VelocityTarget(ex.x0, z);
    items.push_back(it);
  }
  return net.LossAndGradient(items, nullptr);
}

}  // namespace

TEST_CASE("train_step") {
  NoiseSchedule schedule;
  SUBCASE("zero learning rate leaves parameters unchanged") {
    auto p = MakeTinyProblem(1);
    const auto before = p.net.parameters();
    TrainerState state(5);
    AdamConfig adam;
    adam.learning_rate = 0.0;
    const TrainExample* batch[] = {&p.examples[0]};
    const auto report = TrainStep(p.net, state, adam, batch, schedule);
    CHECK(std::isfinite(report.loss));
    for (std::size_t i = 0; i < before.size(); ++i) {
      CHECK(p.net.parameters()[i].value == before[i].value);
    }
  }
  SUBCASE("loss decreases on a one-sample dataset") {
    auto p = MakeTinyProblem(2);
    const double before = EvalLoss(p.net, p.examples[0], 1234);
    TrainerState state(6);
    AdamConfig adam;
    adam.learning_rate = 1e-2;
    const TrainExample* batch[] = {&p.examples[0], &p.examples[0]};
    for (int i = 0; i < 100; ++i) TrainStep(p.net, state, adam, batch, schedule);
    CHECK(EvalLoss(p.net, p.examples[0], 1234) < before);
  }
  SUBCASE("non-finite loss aborts with the step index") {
    auto p = MakeTinyProblem(3);
    p.net.parameters()[0].value(0, 0) = std::numeric_limits<double>::quiet_NaN();
    TrainerState state(7);
    const TrainExample* batch[] = {&p.examples[0]};
    try {
      TrainStep(p.net, state, AdamConfig{}, batch, schedule);
      FAIL("expected failure");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kNonFinite);
      CHECK(std::string(e.what()).find("step 0") != std::string::npos);
    }
  }
}

TEST_CASE("checkpoint round trip and resume") {
  const auto dir = testing::ScratchDir("ckpt");
  NoiseSchedule schedule;
  AdamConfig adam;
  adam.learning_rate = 5e-3;

  auto p = MakeTinyProblem(4);
  const TrainExample* batch[] = {&p.examples[0]};
  TrainerState state(8);
  for (int i = 0; i < 5; ++i) TrainStep(p.net, state, adam, batch, schedule);
  SaveCheckpoint(dir / "a.ckpt", p.net, state, schedule, {{"note", "x"}});

  auto loaded = LoadCheckpoint(dir / "a.ckpt");
  CHECK(loaded.trainer.step == 5);
  CHECK(loaded.metadata["note"] == "x");
  for (std::size_t i = 0; i < p.net.parameters().size(); ++i) {
    CHECK(loaded.net->parameters()[i].value == p.net.parameters()[i].value);
  }

  // Continue both; the resumed run must match the uninterrupted one.
  std::vector<double> direct, resumed;
  for (int i = 0; i < 5; ++i) {
    direct.push_back(TrainStep(p.net, state, adam, batch, schedule).loss);
    resumed.push_back(
        TrainStep(*loaded.net, loaded.trainer, adam, batch, schedule).loss);
  }
  CHECK(direct == resumed);
}

TEST_CASE("conditioning modes produce consistent shapes") {
  std::mt19937_64 rng(9);
  SampleImages s;
  s.y_m = testing::RandomImage(rng, 16, 16, 3);
  s.y = testing::RandomImage(rng, 16, 16, 3);
  s.x = testing::RandomImage(rng, 16, 16, 3);
  s.x_m = testing::RandomMask(rng, 16, 16, 0.3);
  FlowTask task;
  task.canvas = 16;
  task.codec.factor = 8;
  const auto c = task.MakeCondition(s);
  CHECK(c.latent.shape == LatentShape{192, 2, 4});
  CHECK(task.MakeTarget(s).shape == task.TargetShape());
  task.mode = ConditioningMode::kPlain;
  const auto cp = task.MakeCondition(s);
  CHECK(cp.latent.shape == LatentShape{384, 2, 2});
  CHECK(task.MakeTarget(s).shape == LatentShape{192, 2, 2});
  CHECK(task.NetConfig(8, 4, 1.0).adapters == false);
}
