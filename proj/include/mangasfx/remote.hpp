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

// JSON-over-HTTP adapters for external model services. Every call is a
// POST of one JSON object to `<base><prefix>/<operation>`; images travel as
// base64-encoded PNG and latents as {"shape": [c, h, w], "values": [...]}.
//
//   denoiser    /predict    {x_t, t, prompt, condition_latent,
//                            canvas_png?, aux_png?}   -> {velocity}
//   converter   /convert    {mask_png, prompt}        -> {rgba_png}
//   inpainter   /inpaint    {image_png, hole_png}     -> {image_png}
//   recognizer  /recognize  {image_png}               -> {text}
//   captioner   /caption    {image_png}               -> {caption}

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "mangasfx/compositor.hpp"
#include "mangasfx/dataset.hpp"
#include "mangasfx/evaluation.hpp"
#include "mangasfx/flow.hpp"
#include "mangasfx/mask_to_rgba.hpp"

namespace mangasfx {

std::string EncodeBase64(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> DecodeBase64(const std::string& text);

std::string ImageToBase64Png(const RasterImage& image);
RasterImage ImageFromBase64Png(const std::string& text);

nlohmann::json LatentToJson(const LatentTensor& t);
LatentTensor LatentFromJson(const nlohmann::json& j);

// "http://host:port[/prefix]".
struct ServiceUri {
  std::string host;
  int port = 80;
  std::string prefix;

  static ServiceUri Parse(const std::string& uri);
  std::string ToString() const;
};

// Blocking JSON POST client. Failures raise kBackend with the URL.
class JsonServiceClient {
 public:
  explicit JsonServiceClient(ServiceUri uri, double timeout_seconds = 120.0);
  ~JsonServiceClient();
  nlohmann::json Post(const std::string& operation, const nlohmann::json& body);
  const ServiceUri& uri() const { return uri_; }

 private:
  struct Impl;
  ServiceUri uri_;
  std::unique_ptr<Impl> impl_;
};

class RemoteDenoiser : public DenoiserBackend {
 public:
  explicit RemoteDenoiser(ServiceUri uri) : client_(std::move(uri)) {}
  LatentTensor Predict(const LatentTensor& x_t, double t,
                       const Condition& condition) const override;
  std::string Identity() const override;

 private:
  mutable JsonServiceClient client_;
};

class RemoteConverter : public ConverterBackend {
 public:
  explicit RemoteConverter(ServiceUri uri) : client_(std::move(uri)) {}
  RasterImage Convert(const BinaryMask& mask, const std::string& prompt) override;
  std::string Identity() const override;

 private:
  JsonServiceClient client_;
};

class RemoteInpainter : public InpainterBackend {
 public:
  explicit RemoteInpainter(ServiceUri uri) : client_(std::move(uri)) {}
  RasterImage Inpaint(const RasterImage& image, const BinaryMask& hole) override;
  std::string Identity() const override;

 private:
  JsonServiceClient client_;
};

class RemoteRecognizer : public RecognizerBackend {
 public:
  explicit RemoteRecognizer(ServiceUri uri) : client_(std::move(uri)) {}
  std::string Recognize(const RasterImage& image) override;
  std::string Identity() const override;

 private:
  JsonServiceClient client_;
};

class RemoteCaptioner : public CaptionerBackend {
 public:
  explicit RemoteCaptioner(ServiceUri uri) : client_(std::move(uri)) {}
  std::string Caption(const RasterImage& context) override;
  std::string Identity() const override;

 private:
  JsonServiceClient client_;
};

}  // namespace mangasfx
