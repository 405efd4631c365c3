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

#include "mangasfx/trainer.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "mangasfx/error.hpp"

namespace mangasfx {

using Eigen::MatrixXd;
using nlohmann::json;

json AdamConfig::ToJson() const {
  return {{"learning_rate", learning_rate},
          {"beta1", beta1},
          {"beta2", beta2},
          {"epsilon", epsilon}};
}

AdamConfig AdamConfig::FromJson(const json& j) {
  AdamConfig c;
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.beta1 = j.value("beta1", c.beta1);
  c.beta2 = j.value("beta2", c.beta2);
  c.epsilon = j.value("epsilon", c.epsilon);
  return c;
}

StepReport TrainStep(ToyVelocityNet& net, TrainerState& state,
                     const AdamConfig& adam,
                     std::span<const TrainExample* const> batch,
                     const NoiseSchedule& schedule) {
  if (batch.empty()) throw Error(ErrorKind::kRange, "empty training batch");
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  StepReport report;
  std::vector<FlowTrainItem> items(batch.size());
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const TrainExample& ex = *batch[b];
    const double t = uniform(state.rng);
    LatentTensor z(ex.x0.shape);
    for (double& v : z.values) v = normal(state.rng);
    const double sigma = schedule.Sigma(t);
    items[b].condition = &ex.condition;
    items[b].x_t = Interpolate(ex.x0, z, sigma);
    items[b].t = t;
    items[b].target = VelocityTarget(ex.x0, z);
    items[b].weight = schedule.Weight(t);
    report.t_values.push_back(t);
  }

  std::vector<MatrixXd> grads;
  report.loss = net.LossAndGradient(items, &grads);
  if (!std::isfinite(report.loss)) {
    std::ostringstream os;
    os << "loss " << report.loss << " at step " << state.step << ", t =";
    for (double t : report.t_values) os << " " << t;
    throw Error(ErrorKind::kNonFinite, os.str());
  }

  auto& params = net.parameters();
  if (state.first_moment.size() != params.size()) {
    state.first_moment.clear();
    state.second_moment.clear();
    for (const auto& p : params) {
      state.first_moment.push_back(MatrixXd::Zero(p.value.rows(), p.value.cols()));
      state.second_moment.push_back(MatrixXd::Zero(p.value.rows(), p.value.cols()));
    }
  }
  ++state.step;
  const double bc1 = 1.0 - std::pow(adam.beta1, double(state.step));
  const double bc2 = 1.0 - std::pow(adam.beta2, double(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params[i].trainable) continue;
    MatrixXd& m = state.first_moment[i];
    MatrixXd& v = state.second_moment[i];
    m = adam.beta1 * m + (1.0 - adam.beta1) * grads[i];
    v = adam.beta2 * v + (1.0 - adam.beta2) * grads[i].cwiseAbs2();
    if (adam.learning_rate == 0.0) continue;
    const MatrixXd step =
        (m / bc1).array() / ((v / bc2).array().sqrt() + adam.epsilon);
    params[i].value -= adam.learning_rate * step;
  }
  return report;
}

namespace {

constexpr char kMagic[8] = {'M', 'S', 'F', 'X', 'C', 'K', 'P', 'T'};

struct ArrayRef {
  std::string name;
  const MatrixXd* matrix;
};

}  // namespace

void SaveCheckpoint(const std::filesystem::path& path,
                    const ToyVelocityNet& net, const TrainerState& trainer,
                    const NoiseSchedule& schedule, const json& metadata) {
  std::vector<ArrayRef> arrays;
  json trainable = json::object();
  for (const auto& p : net.parameters()) {
    arrays.push_back({"param/" + p.name, &p.value});
    trainable[p.name] = p.trainable;
  }
  const bool has_moments =
      trainer.first_moment.size() == net.parameters().size();
  if (has_moments) {
    for (std::size_t i = 0; i < net.parameters().size(); ++i) {
      const std::string& name = net.parameters()[i].name;
      arrays.push_back({"adam_m/" + name, &trainer.first_moment[i]});
      arrays.push_back({"adam_v/" + name, &trainer.second_moment[i]});
    }
  }

  std::ostringstream rng_state;
  rng_state << trainer.rng;
  json header;
  header["format_version"] = kCheckpointFormat;
  header["network"] = net.config().ToJson();
  header["schedule"] = schedule.ToJson();
  header["trainer"] = {{"step", trainer.step},
                       {"rng", rng_state.str()},
                       {"has_moments", has_moments}};
  header["metadata"] = metadata;
  json table = json::array();
  std::uint64_t offset = 0;
  for (const auto& a : arrays) {
    table.push_back({{"name", a.name},
                     {"rows", a.matrix->rows()},
                     {"cols", a.matrix->cols()},
                     {"offset", offset}});
    offset += static_cast<std::uint64_t>(a.matrix->size());
  }
  header["arrays"] = table;
  const std::string header_text = header.dump();

  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  os.write(kMagic, sizeof(kMagic));
  const std::uint64_t header_len = header_text.size();
  os.write(reinterpret_cast<const char*>(&header_len), sizeof(header_len));
  os.write(header_text.data(), static_cast<std::streamsize>(header_len));
  for (const auto& a : arrays) {
    os.write(reinterpret_cast<const char*>(a.matrix->data()),
             static_cast<std::streamsize>(a.matrix->size() * sizeof(double)));
  }
  if (!os) throw Error(ErrorKind::kIo, "write failed: " + path.string());
}

LoadedCheckpoint LoadCheckpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorKind::kIo, "cannot read " + path.string());
  char magic[sizeof(kMagic)];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw Error(ErrorKind::kIo, path.string() + " is not a checkpoint");
  }
  std::uint64_t header_len = 0;
  is.read(reinterpret_cast<char*>(&header_len), sizeof(header_len));
  std::string header_text(header_len, '\0');
  is.read(header_text.data(), static_cast<std::streamsize>(header_len));
  const json header = json::parse(header_text);
  if (header.at("format_version") != kCheckpointFormat) {
    throw Error(ErrorKind::kIo, "unsupported checkpoint format " +
                                    header.at("format_version").dump());
  }
  const auto data_start = is.tellg();

  LoadedCheckpoint out;
  out.net = std::make_unique<ToyVelocityNet>(
      ToyNetConfig::FromJson(header.at("network")), 0);
  out.schedule = NoiseSchedule::FromJson(header.at("schedule"));
  out.metadata = header.value("metadata", json::object());
  const json& tr = header.at("trainer");
  out.trainer.step = tr.at("step").get<std::int64_t>();
  std::istringstream rng_state(tr.at("rng").get<std::string>());
  rng_state >> out.trainer.rng;

  auto read_array = [&](const json& entry) {
    MatrixXd m(entry.at("rows").get<Eigen::Index>(),
               entry.at("cols").get<Eigen::Index>());
    is.seekg(data_start + static_cast<std::streamoff>(
                              entry.at("offset").get<std::uint64_t>() *
                              sizeof(double)));
    is.read(reinterpret_cast<char*>(m.data()),
            static_cast<std::streamsize>(m.size() * sizeof(double)));
    if (!is) throw Error(ErrorKind::kIo, "truncated checkpoint " + path.string());
    return m;
  };
  std::map<std::string, MatrixXd> arrays;
  for (const auto& entry : header.at("arrays")) {
    arrays[entry.at("name").get<std::string>()] = read_array(entry);
  }
  auto take = [&](const std::string& name, const MatrixXd& like) {
    auto it = arrays.find(name);
    if (it == arrays.end() || it->second.rows() != like.rows() ||
        it->second.cols() != like.cols()) {
      throw Error(ErrorKind::kIo, "checkpoint array " + name +
                                      " missing or misshapen");
    }
    return it->second;
  };
  for (auto& p : out.net->parameters()) p.value = take("param/" + p.name, p.value);
  if (tr.value("has_moments", false)) {
    for (const auto& p : out.net->parameters()) {
      out.trainer.first_moment.push_back(take("adam_m/" + p.name, p.value));
      out.trainer.second_moment.push_back(take("adam_v/" + p.name, p.value));
    }
  }
  return out;
}

}  // namespace mangasfx
