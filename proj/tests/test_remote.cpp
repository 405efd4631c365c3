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

#include <random>
#include <thread>

#include "doctest.h"
#include "mangasfx/error.hpp"
#include "mangasfx/remote.hpp"
#include "test_util.hpp"

// After Eigen: the resolver headers define a macro that clashes with it.
#include <httplib.h>

using namespace mangasfx;
using nlohmann::json;

namespace {

// In-process service answering every adapter operation with the reference
// implementations.
class ReferenceService {
 public:
  ReferenceService() {
    Handle("/v1/predict", [](const json& in) {
      const auto x = LatentFromJson(in.at("x_t"));
      LatentTensor v = x;
      for (double& e : v.values) e *= in.at("t").get<double>();
      return json{{"velocity", LatentToJson(v)}};
    });
    Handle("/v1/convert", [](const json& in) {
      const auto mask = Binarize(ImageFromBase64Png(in.at("mask_png")));
      return json{{"rgba_png", ImageToBase64Png(ConvertReference(mask))}};
    });
    Handle("/v1/inpaint", [](const json& in) {
      const auto image = ImageFromBase64Png(in.at("image_png"));
      const auto hole = Binarize(ImageFromBase64Png(in.at("hole_png")));
      return json{{"image_png", ImageToBase64Png(InpaintReference(image, hole))}};
    });
    Handle("/v1/recognize", [](const json& in) {
      const auto image = ImageFromBase64Png(in.at("image_png"));
      return json{{"text", std::to_string(image.width())}};
    });
    Handle("/v1/caption", [](const json&) { return json{{"wrong_key", 1}}; });
    server_.Post("/v1/fail", [](const httplib::Request&, httplib::Response& res) {
      res.status = 503;
      res.set_content("overloaded", "text/plain");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~ReferenceService() {
    server_.stop();
    thread_.join();
  }
  ServiceUri uri() const { return ServiceUri::Parse("http://127.0.0.1:" + std::to_string(port_) + "/v1"); }

 private:
  template <typename F>
  void Handle(const char* path, F f) {
    server_.Post(path, [f](const httplib::Request& req, httplib::Response& res) {
      res.set_content(f(json::parse(req.body)).dump(), "application/json");
    });
  }

  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

}  // namespace

TEST_CASE("base64 and latent codecs round trip") {
  std::mt19937_64 rng(1);
  for (std::size_t n : {0, 1, 2, 3, 4, 100}) {
    std::vector<std::uint8_t> bytes(n);
    for (auto& b : bytes) b = static_cast<std::uint8_t>(rng());
    CHECK(DecodeBase64(EncodeBase64(bytes)) == bytes);
  }
  CHECK(EncodeBase64({'M', 'a', 'n'}) == "TWFu");
  CHECK_THROWS_AS(DecodeBase64("@@@@"), Error);

  const auto img = testing::RandomImage(rng, 9, 5, 4);
  CHECK(ImageFromBase64Png(ImageToBase64Png(img)) == img);

  LatentTensor t({2, 3, 1});
  for (std::size_t i = 0; i < t.values.size(); ++i) t.values[i] = 0.1 * i;
  CHECK(LatentFromJson(LatentToJson(t)).values == t.values);
  CHECK_THROWS_AS(LatentFromJson(json{{"shape", {1, 1, 2}}, {"values", {1.0}}}), Error);
}

TEST_CASE("service uri parsing") {
  const auto u = ServiceUri::Parse("http://models.local:9000/api/");
  CHECK(u.host == "models.local");
  CHECK(u.port == 9000);
  CHECK(u.prefix == "/api");
  CHECK(ServiceUri::Parse("http://h").port == 80);
  CHECK_THROWS_AS(ServiceUri::Parse("ftp://h"), Error);
  CHECK_THROWS_AS(ServiceUri::Parse("http://h:xx"), Error);
}

TEST_CASE("remote adapters against an in-process service") {
  ReferenceService service;
  std::mt19937_64 rng(2);

  RemoteDenoiser denoiser(service.uri());
  LatentTensor x({2, 2, 2});
  for (auto& v : x.values) v = 1.5;
  Condition c;
  c.latent = x;
  c.canvas = RasterImage(8, 8, 3, 1);
  const auto v = denoiser.Predict(x, 0.5, c);
  CHECK(v.shape == x.shape);
  CHECK(v.values[3] == 0.75);

  RemoteConverter converter(service.uri());
  BinaryMask mask(12, 10);
  mask.at(4, 4) = 1;
  CHECK(Convert(mask, "p", converter).layer == ConvertReference(mask));

  RemoteInpainter inpainter(service.uri());
  const auto img = testing::RandomImage(rng, 12, 10, 3);
  auto hole = testing::RandomMask(rng, 12, 10, 0.3);
  hole.at(0, 0) = 0;
  CHECK(Inpaint(inpainter, img, hole) == InpaintReference(img, hole));

  RemoteRecognizer recognizer(service.uri());
  CHECK(recognizer.Recognize(img) == "12");

  RemoteCaptioner captioner(service.uri());
  try {
    captioner.Caption(img);
    FAIL("expected contract error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kBackendContract);
  }
  const auto prompt = BuildPrompt(img, captioner, "x {caption}");
  CHECK(prompt.rendered == "x ");
  CHECK(prompt.warnings.size() == 1);

  JsonServiceClient client(service.uri());
  try {
    client.Post("fail", json::object());
    FAIL("expected backend error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kBackend);
    CHECK(std::string(e.what()).find("503") != std::string::npos);
  }
}

TEST_CASE("unreachable or silent services report backend errors") {
  RemoteRecognizer refused(ServiceUri::Parse("http://127.0.0.1:1"));
  CHECK_THROWS_AS(refused.Recognize(RasterImage(2, 2, 3, 0)), Error);

  // Accepts connections but never answers.
  httplib::Server silent;
  const int port = silent.bind_to_any_port("127.0.0.1");
  JsonServiceClient client(
      ServiceUri::Parse("http://127.0.0.1:" + std::to_string(port)), 1.0);
  try {
    client.Post("recognize", json::object());
    FAIL("expected timeout");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kBackend);
  }
}
