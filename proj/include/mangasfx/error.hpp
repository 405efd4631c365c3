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

#include <stdexcept>
#include <string>
#include <string_view>

namespace mangasfx {

enum class ErrorKind {
  kDimension,
  kDegeneratePolygon,
  kChannelMismatch,
  kBounds,
  kShape,
  kSeam,
  kIngest,
  kConfig,
  kEmptyGroundTruth,
  kEmptyMask,
  kBackendContract,
  kDegenerateHole,
  kNonFinite,
  kRange,
  kIo,
  kMissingOutput,
  kBackend,
};

std::string_view ToString(ErrorKind kind);

// All library failures are reported through this type; `kind()` lets callers
// and tests distinguish the failure class without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(ToString(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace mangasfx
