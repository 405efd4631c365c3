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

#include "mangasfx/error.hpp"

namespace mangasfx {

std::string_view ToString(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kDimension: return "dimension error";
    case ErrorKind::kDegeneratePolygon: return "degenerate polygon";
    case ErrorKind::kChannelMismatch: return "channel mismatch";
    case ErrorKind::kBounds: return "bounds error";
    case ErrorKind::kShape: return "shape error";
    case ErrorKind::kSeam: return "seam error";
    case ErrorKind::kIngest: return "ingest error";
    case ErrorKind::kConfig: return "configuration error";
    case ErrorKind::kEmptyGroundTruth: return "empty ground truth";
    case ErrorKind::kEmptyMask: return "empty mask";
    case ErrorKind::kBackendContract: return "backend contract violation";
    case ErrorKind::kDegenerateHole: return "degenerate hole";
    case ErrorKind::kNonFinite: return "non-finite value";
    case ErrorKind::kRange: return "range error";
    case ErrorKind::kIo: return "i/o error";
    case ErrorKind::kMissingOutput: return "missing output";
    case ErrorKind::kBackend: return "backend failure";
  }
  return "error";
}

}  // namespace mangasfx
