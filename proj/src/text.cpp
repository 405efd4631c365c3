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

#include "mangasfx/text.hpp"

#include <unicode/normalizer2.h>
#include <unicode/unistr.h>

#include "mangasfx/error.hpp"

namespace mangasfx {

std::u32string DecodeUtf8(std::string_view utf8) {
  const auto us = icu::UnicodeString::fromUTF8(
      icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())));
  std::u32string out(static_cast<std::size_t>(us.countChar32()), U'\0');
  UErrorCode status = U_ZERO_ERROR;
  const int32_t n = us.toUTF32(reinterpret_cast<UChar32*>(out.data()),
                               static_cast<int32_t>(out.size()), status);
  if (U_FAILURE(status)) {
    throw Error(ErrorKind::kRange, "utf-8 decode failed");
  }
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::string EncodeUtf8(std::u32string_view text) {
  const auto us = icu::UnicodeString::fromUTF32(
      reinterpret_cast<const UChar32*>(text.data()),
      static_cast<int32_t>(text.size()));
  std::string out;
  us.toUTF8String(out);
  return out;
}

std::string NormalizeNfc(std::string_view utf8) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) {
    throw Error(ErrorKind::kRange, "NFC normalizer unavailable");
  }
  const auto us = icu::UnicodeString::fromUTF8(
      icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())));
  const icu::UnicodeString normalized = nfc->normalize(us, status);
  if (U_FAILURE(status)) {
    throw Error(ErrorKind::kRange, "NFC normalization failed");
  }
  std::string out;
  normalized.toUTF8String(out);
  return out;
}

}  // namespace mangasfx
