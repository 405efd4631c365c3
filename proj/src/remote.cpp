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

#include "mangasfx/remote.hpp"

#include <boost/beast/core/detail/base64.hpp>
#include <httplib.h>

#include "mangasfx/error.hpp"
#include "mangasfx/png_io.hpp"

namespace mangasfx {

namespace b64 = boost::beast::detail::base64;

std::string EncodeBase64(const std::vector<std::uint8_t>& bytes) {
  std::string out(b64::encoded_size(bytes.size()), '\0');
  out.resize(b64::encode(out.data(), bytes.data(), bytes.size()));
  return out;
}

std::vector<std::uint8_t> DecodeBase64(const std::string& text) {
  std::vector<std::uint8_t> out(b64::decoded_size(text.size()));
  const auto [written, read] = b64::decode(out.data(), text.data(), text.size());
  if (text.find_first_not_of('=', read) != std::string::npos) {
    throw Error(ErrorKind::kBackendContract, "malformed base64 payload");
  }
  out.resize(written);
  return out;
}

std::string ImageToBase64Png(const RasterImage& image) {
  return EncodeBase64(EncodePng(image));
}

RasterImage ImageFromBase64Png(const std::string& text) {
  return DecodePng(DecodeBase64(text));
}

nlohmann::json LatentToJson(const LatentTensor& t) {
  return {{"shape", {t.shape.channels, t.shape.height, t.shape.width}},
          {"values", t.values}};
}

LatentTensor LatentFromJson(const nlohmann::json& j) {
  const auto shape = j.at("shape").get<std::vector<int>>();
  if (shape.size() != 3) {
    throw Error(ErrorKind::kBackendContract, "latent shape must have 3 entries");
  }
  LatentTensor t({shape[0], shape[1], shape[2]});
  t.values = j.at("values").get<std::vector<double>>();
  if (t.values.size() != t.shape.size()) {
    throw Error(ErrorKind::kBackendContract,
                "latent has " + std::to_string(t.values.size()) +
                    " values for shape of size " + std::to_string(t.shape.size()));
  }
  return t;
}

ServiceUri ServiceUri::Parse(const std::string& uri) {
  static const std::string kScheme = "http://";
  if (uri.rfind(kScheme, 0) != 0) {
    throw Error(ErrorKind::kConfig, "backend URI must start with http://: " + uri);
  }
  ServiceUri out;
  const std::string rest = uri.substr(kScheme.size());
  const std::size_t slash = rest.find('/');
  const std::string authority = rest.substr(0, slash);
  if (slash != std::string::npos) out.prefix = rest.substr(slash);
  while (!out.prefix.empty() && out.prefix.back() == '/') out.prefix.pop_back();
  const std::size_t colon = authority.rfind(':');
  out.host = authority.substr(0, colon);
  if (colon != std::string::npos) {
    try {
      out.port = std::stoi(authority.substr(colon + 1));
    } catch (const std::exception&) {
      throw Error(ErrorKind::kConfig, "bad port in backend URI: " + uri);
    }
  }
  if (out.host.empty()) {
    throw Error(ErrorKind::kConfig, "missing host in backend URI: " + uri);
  }
  return out;
}

std::string ServiceUri::ToString() const {
  return "http://" + host + ":" + std::to_string(port) + prefix;
}

struct JsonServiceClient::Impl {
  explicit Impl(const ServiceUri& uri) : client(uri.host, uri.port) {}
  httplib::Client client;
};

JsonServiceClient::JsonServiceClient(ServiceUri uri, double timeout_seconds)
    : uri_(std::move(uri)), impl_(std::make_unique<Impl>(uri_)) {
  const auto secs = static_cast<time_t>(timeout_seconds);
  impl_->client.set_read_timeout(secs, 0);
  impl_->client.set_write_timeout(secs, 0);
}

JsonServiceClient::~JsonServiceClient() = default;

nlohmann::json JsonServiceClient::Post(const std::string& operation,
                                       const nlohmann::json& body) {
  const std::string path = uri_.prefix + "/" + operation;
  const std::string where = uri_.ToString() + "/" + operation;
  const auto res = impl_->client.Post(path, body.dump(), "application/json");
  if (!res) {
    throw Error(ErrorKind::kBackend,
                where + ": " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw Error(ErrorKind::kBackend,
                where + ": HTTP " + std::to_string(res->status) + " " +
                    res->body.substr(0, 200));
  }
  try {
    return nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kBackendContract, where + ": " + e.what());
  }
}

namespace {

template <typename T>
T Field(const nlohmann::json& j, const char* key, const std::string& who) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorKind::kBackendContract,
                who + " response lacks '" + key + "'");
  }
}

}  // namespace

LatentTensor RemoteDenoiser::Predict(const LatentTensor& x_t, double t,
                                     const Condition& condition) const {
  nlohmann::json body = {{"x_t", LatentToJson(x_t)},
                         {"t", t},
                         {"prompt", condition.prompt},
                         {"condition_latent", LatentToJson(condition.latent)}};
  if (!condition.canvas.empty()) {
    body["canvas_png"] = ImageToBase64Png(condition.canvas);
  }
  if (!condition.aux.empty()) body["aux_png"] = ImageToBase64Png(condition.aux);
  const auto res = client_.Post("predict", body);
  return LatentFromJson(Field<nlohmann::json>(res, "velocity", Identity()));
}

std::string RemoteDenoiser::Identity() const {
  return "remote-denoiser@" + client_.uri().ToString();
}

RasterImage RemoteConverter::Convert(const BinaryMask& mask,
                                     const std::string& prompt) {
  const auto res = client_.Post(
      "convert", {{"mask_png", ImageToBase64Png(LiftMask(mask, 1))},
                  {"prompt", prompt}});
  return ImageFromBase64Png(Field<std::string>(res, "rgba_png", Identity()));
}

std::string RemoteConverter::Identity() const {
  return "remote-converter@" + client_.uri().ToString();
}

RasterImage RemoteInpainter::Inpaint(const RasterImage& image,
                                     const BinaryMask& hole) {
  const auto res = client_.Post(
      "inpaint", {{"image_png", ImageToBase64Png(image)},
                  {"hole_png", ImageToBase64Png(LiftMask(hole, 1))}});
  return ImageFromBase64Png(Field<std::string>(res, "image_png", Identity()));
}

std::string RemoteInpainter::Identity() const {
  return "remote-inpainter@" + client_.uri().ToString();
}

std::string RemoteRecognizer::Recognize(const RasterImage& image) {
  const auto res =
      client_.Post("recognize", {{"image_png", ImageToBase64Png(image)}});
  return Field<std::string>(res, "text", Identity());
}

std::string RemoteRecognizer::Identity() const {
  return "remote-recognizer@" + client_.uri().ToString();
}

std::string RemoteCaptioner::Caption(const RasterImage& context) {
  const auto res =
      client_.Post("caption", {{"image_png", ImageToBase64Png(context)}});
  return Field<std::string>(res, "caption", Identity());
}

std::string RemoteCaptioner::Identity() const {
  return "remote-captioner@" + client_.uri().ToString();
}

}  // namespace mangasfx
