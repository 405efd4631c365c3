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

#include <cstdint>
#include <string>
#include <string_view>

namespace mangasfx {

// 64-bit FNV-1a, chainable through `state`.
inline std::uint64_t Fnv1a64(const void* data, std::size_t size,
                             std::uint64_t state = 0xcbf29ce484222325ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < size; ++i) {
    state ^= p[i];
    state *= 0x100000001b3ull;
  }
  return state;
}

inline std::uint64_t Fnv1a64(std::string_view s,
                             std::uint64_t state = 0xcbf29ce484222325ull) {
  return Fnv1a64(s.data(), s.size(), state);
}

// Lower-case hex, zero padded to 16 digits.
std::string HexDigest(std::uint64_t value);

}  // namespace mangasfx
