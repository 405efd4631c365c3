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

#include "mangasfx/toy_backend.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "mangasfx/error.hpp"

namespace mangasfx {

namespace {

using Eigen::MatrixXd;
using RowMajorMap =
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                   Eigen::RowMajor>>;

// Block-wise im2col: `x` holds `blocks` images of h*w columns each; the
// result has C*k*k rows with row index (c * k + ky) * k + kx, zero padded.
MatrixXd Im2Col(const MatrixXd& x, int blocks, int h, int w, int k) {
  if (k == 1) return x;
  const int r = k / 2;
  const int c_in = static_cast<int>(x.rows());
  const int p = h * w;
  MatrixXd cols = MatrixXd::Zero(static_cast<Eigen::Index>(c_in) * k * k,
                                 static_cast<Eigen::Index>(blocks) * p);
  for (int b = 0; b < blocks; ++b) {
    for (int c = 0; c < c_in; ++c) {
      for (int ky = 0; ky < k; ++ky) {
        for (int kx = 0; kx < k; ++kx) {
          const int row = (c * k + ky) * k + kx;
          for (int y = 0; y < h; ++y) {
            const int sy = y + ky - r;
            if (sy < 0 || sy >= h) continue;
            for (int xx = 0; xx < w; ++xx) {
              const int sx = xx + kx - r;
              if (sx < 0 || sx >= w) continue;
              cols(row, b * p + y * w + xx) = x(c, b * p + sy * w + sx);
            }
          }
        }
      }
    }
  }
  return cols;
}

// Adjoint of Im2Col.
MatrixXd Col2Im(const MatrixXd& cols, int c_in, int blocks, int h, int w,
                int k) {
  if (k == 1) return cols;
  const int r = k / 2;
  const int p = h * w;
  MatrixXd x = MatrixXd::Zero(c_in, static_cast<Eigen::Index>(blocks) * p);
  for (int b = 0; b < blocks; ++b) {
    for (int c = 0; c < c_in; ++c) {
      for (int ky = 0; ky < k; ++ky) {
        for (int kx = 0; kx < k; ++kx) {
          const int row = (c * k + ky) * k + kx;
          for (int y = 0; y < h; ++y) {
            const int sy = y + ky - r;
            if (sy < 0 || sy >= h) continue;
            for (int xx = 0; xx < w; ++xx) {
              const int sx = xx + kx - r;
              if (sx < 0 || sx >= w) continue;
              x(c, b * p + sy * w + sx) += cols(row, b * p + y * w + xx);
            }
          }
        }
      }
    }
  }
  return x;
}

double Sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

MatrixXd Silu(const MatrixXd& z) {
  return z.unaryExpr([](double v) { return v * Sigmoid(v); });
}

MatrixXd SiluGrad(const MatrixXd& z) {
  return z.unaryExpr([](double v) {
    const double s = Sigmoid(v);
    return s * (1.0 + v * (1.0 - s));
  });
}

struct Preconditioning {
  double skip = 0.0;
  double out = 1.0;
};

// Linear least-squares estimate of the velocity from x_t for data of scale
// `sigma`, plus the matching residual scale.
Preconditioning PreconditioningAt(double t, double sigma) {
  if (sigma <= 0.0) return {};
  const double s2 = sigma * sigma;
  const double a = (1.0 - t) * (1.0 - t) * s2 + t * t;
  return {(t - (1.0 - t) * s2) / a, sigma / std::sqrt(a)};
}

}  // namespace

nlohmann::json ToyNetConfig::ToJson() const {
  return {{"latent_channels", latent_channels},
          {"cond_channels", cond_channels},
          {"hidden", hidden},
          {"first_kernel", first_kernel},
          {"mid_kernel", mid_kernel},
          {"adapters", adapters},
          {"adapter_rank", adapter_rank},
          {"adapter_scale", adapter_scale},
          {"freeze_base", freeze_base},
          {"data_scale", data_scale}};
}

ToyNetConfig ToyNetConfig::FromJson(const nlohmann::json& j) {
  ToyNetConfig c;
  c.latent_channels = j.at("latent_channels").get<int>();
  c.cond_channels = j.at("cond_channels").get<int>();
  c.hidden = j.value("hidden", c.hidden);
  c.first_kernel = j.value("first_kernel", c.first_kernel);
  c.mid_kernel = j.value("mid_kernel", c.mid_kernel);
  c.adapters = j.value("adapters", c.adapters);
  c.adapter_rank = j.value("adapter_rank", c.adapter_rank);
  c.adapter_scale = j.value("adapter_scale", c.adapter_scale);
  c.freeze_base = j.value("freeze_base", c.freeze_base);
  c.data_scale = j.value("data_scale", c.data_scale);
  return c;
}

ToyVelocityNet::ToyVelocityNet(const ToyNetConfig& config,
                               std::uint64_t init_seed)
    : config_(config) {
  if (config.latent_channels <= 0 || config.cond_channels < 0 ||
      config.hidden <= 0 || config.first_kernel % 2 == 0 ||
      config.mid_kernel % 2 == 0 || config.first_kernel < 1 ||
      config.mid_kernel < 1 || !(config.data_scale >= 0.0)) {
    throw Error(ErrorKind::kConfig, "invalid toy network configuration");
  }
  if (config.adapters && config.adapter_rank < 1) {
    throw Error(ErrorKind::kConfig, "adapter rank must be >= 1");
  }
  std::mt19937_64 rng(init_seed);
  const int c_in = config.latent_channels + config.cond_channels + 1;
  const struct {
    const char* name;
    int in, out, k;
  } specs[] = {{"conv1", c_in, config.hidden, config.first_kernel},
               {"conv2", config.hidden, config.hidden, config.mid_kernel},
               {"conv3", config.hidden, config.latent_channels, 1}};
  const bool base_trainable = !(config.adapters && config.freeze_base);
  for (const auto& s : specs) {
    Layer layer{s.in, s.out, s.k};
    const int fan_in = s.in * s.k * s.k;
    std::normal_distribution<double> init(0.0, 1.0 / std::sqrt(fan_in));
    MatrixXd w(s.out, fan_in);
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = init(rng);
    layer.weight = static_cast<int>(params_.size());
    params_.push_back({std::string(s.name) + ".weight", w, base_trainable});
    layer.bias = static_cast<int>(params_.size());
    params_.push_back(
        {std::string(s.name) + ".bias", MatrixXd::Zero(s.out, 1), base_trainable});
    if (config.adapters) {
      const int r = config.adapter_rank;
      MatrixXd down(r, fan_in);
      for (Eigen::Index i = 0; i < down.size(); ++i) down.data()[i] = init(rng);
      layer.down = static_cast<int>(params_.size());
      params_.push_back({std::string(s.name) + ".lora_down", down, true});
      layer.up = static_cast<int>(params_.size());
      params_.push_back(
          {std::string(s.name) + ".lora_up", MatrixXd::Zero(s.out, r), true});
    }
    layers_.push_back(layer);
  }
}

std::string ToyVelocityNet::Identity() const {
  std::ostringstream os;
  os << "toy-conv(hidden=" << config_.hidden << ",k=" << config_.first_kernel
     << "/" << config_.mid_kernel;
  if (config_.adapters) os << ",lora=" << config_.adapter_rank;
  if (config_.data_scale > 0.0) os << ",skip=" << config_.data_scale;
  os << ")";
  return os.str();
}

MatrixXd ToyVelocityNet::EffectiveWeight(const Layer& layer) const {
  const MatrixXd& w = params_[layer.weight].value;
  if (layer.down < 0) return w;
  LowRankAdapter adapter{params_[layer.down].value, params_[layer.up].value,
                         config_.adapter_scale};
  return ApplyAdapter(w, adapter);
}

MatrixXd ToyVelocityNet::AssembleInput(std::span<const FlowTrainItem> batch,
                                       int height, int width) const {
  const int cl = config_.latent_channels;
  const int cc = config_.cond_channels;
  const int p = height * width;
  MatrixXd x(cl + cc + 1, static_cast<Eigen::Index>(batch.size()) * p);
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const FlowTrainItem& item = batch[b];
    const LatentShape expect{cl, height, width};
    if (item.x_t.shape != expect) {
      throw Error(ErrorKind::kShape, "x_t shape does not match the network");
    }
    const LatentTensor& cond = item.condition->latent;
    if (cond.shape != LatentShape{cc, height, width}) {
      throw Error(ErrorKind::kShape,
                  "condition latent shape does not match the network");
    }
    const auto cols = static_cast<Eigen::Index>(b) * p;
    x.block(0, cols, cl, p) = RowMajorMap(item.x_t.values.data(), cl, p);
    if (cc > 0) {
      x.block(cl, cols, cc, p) = RowMajorMap(cond.values.data(), cc, p);
    }
    x.block(cl + cc, cols, 1, p).setConstant(item.t);
  }
  return x;
}

LatentTensor ToyVelocityNet::Predict(const LatentTensor& x_t, double t,
                                     const Condition& condition) const {
  FlowTrainItem item;
  item.condition = &condition;
  item.x_t = x_t;
  item.t = t;
  const int h = x_t.shape.height;
  const int w = x_t.shape.width;
  const MatrixXd x = AssembleInput(std::span(&item, 1), h, w);
  MatrixXd a = x;
  for (std::size_t li = 0; li < layers_.size(); ++li) {
    const Layer& layer = layers_[li];
    const MatrixXd cols = Im2Col(a, 1, h, w, layer.kernel);
    MatrixXd z = EffectiveWeight(layer) * cols;
    z.colwise() += params_[layer.bias].value.col(0);
    a = li + 1 < layers_.size() ? Silu(z) : z;
  }
  const Preconditioning pc = PreconditioningAt(t, config_.data_scale);
  a *= pc.out;
  if (pc.skip != 0.0) a += pc.skip * x.topRows(x_t.shape.channels);
  LatentTensor out(x_t.shape);
  Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                           Eigen::RowMajor>>(out.values.data(), a.rows(),
                                             a.cols()) = a;
  return out;
}

double ToyVelocityNet::LossAndGradient(std::span<const FlowTrainItem> batch,
                                       std::vector<MatrixXd>* grads) const {
  if (batch.empty()) throw Error(ErrorKind::kRange, "empty batch");
  const int h = batch[0].x_t.shape.height;
  const int w = batch[0].x_t.shape.width;
  const int blocks = static_cast<int>(batch.size());
  const int p = h * w;

  // Forward with caches.
  std::vector<MatrixXd> cols(layers_.size());
  std::vector<MatrixXd> pre(layers_.size());
  std::vector<MatrixXd> weights(layers_.size());
  MatrixXd a = AssembleInput(batch, h, w);
  for (std::size_t li = 0; li < layers_.size(); ++li) {
    const Layer& layer = layers_[li];
    weights[li] = EffectiveWeight(layer);
    cols[li] = Im2Col(a, blocks, h, w, layer.kernel);
    pre[li] = weights[li] * cols[li];
    pre[li].colwise() += params_[layer.bias].value.col(0);
    a = li + 1 < layers_.size() ? Silu(pre[li]) : pre[li];
  }

  // Loss and d loss / d output.
  const int cl = config_.latent_channels;
  const double n = static_cast<double>(cl) * p;
  MatrixXd d_out(cl, static_cast<Eigen::Index>(blocks) * p);
  double loss = 0.0;
  for (int b = 0; b < blocks; ++b) {
    const FlowTrainItem& item = batch[b];
    if (item.target.shape != item.x_t.shape) {
      throw Error(ErrorKind::kShape, "target shape differs from x_t");
    }
    const Preconditioning pc = PreconditioningAt(item.t, config_.data_scale);
    const MatrixXd pred =
        pc.out * a.block(0, static_cast<Eigen::Index>(b) * p, cl, p) +
        pc.skip * MatrixXd(RowMajorMap(item.x_t.values.data(), cl, p));
    const MatrixXd diff =
        pred - MatrixXd(RowMajorMap(item.target.values.data(), cl, p));
    loss += item.weight * diff.squaredNorm() / n;
    d_out.block(0, static_cast<Eigen::Index>(b) * p, cl, p) =
        (2.0 * item.weight * pc.out / (n * blocks)) * diff;
  }
  loss /= blocks;
  if (!grads) return loss;

  grads->assign(params_.size(), MatrixXd());
  for (std::size_t i = 0; i < params_.size(); ++i) {
    (*grads)[i] = MatrixXd::Zero(params_[i].value.rows(), params_[i].value.cols());
  }

  MatrixXd d_pre = d_out;
  for (int li = static_cast<int>(layers_.size()) - 1; li >= 0; --li) {
    const Layer& layer = layers_[li];
    const MatrixXd d_weight = d_pre * cols[li].transpose();
    if (params_[layer.weight].trainable) (*grads)[layer.weight] = d_weight;
    if (params_[layer.bias].trainable) {
      (*grads)[layer.bias] = d_pre.rowwise().sum();
    }
    if (layer.down >= 0) {
      const double s = config_.adapter_scale;
      (*grads)[layer.up] = s * d_weight * params_[layer.down].value.transpose();
      (*grads)[layer.down] = s * params_[layer.up].value.transpose() * d_weight;
    }
    if (li == 0) break;
    const MatrixXd d_cols = weights[li].transpose() * d_pre;
    const MatrixXd d_act = Col2Im(d_cols, layer.in, blocks, h, w, layer.kernel);
    d_pre = d_act.cwiseProduct(SiluGrad(pre[li - 1]));
  }
  return loss;
}

}  // namespace mangasfx
