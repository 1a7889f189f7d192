// Copyright 2026 The BRAN Authors. All Rights Reserved.
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

#include "bran/utf8.h"

#include <algorithm>

namespace bran {

int Utf8SequenceLength(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead >> 5) == 0x6) return 2;
  if ((lead >> 4) == 0xE) return 3;
  if ((lead >> 3) == 0x1E) return 4;
  return 1;
}

std::vector<std::string> SplitCodePoints(std::string_view text) {
  std::vector<std::string> out;
  size_t i = 0;
  while (i < text.size()) {
    size_t len = Utf8SequenceLength(static_cast<unsigned char>(text[i]));
    if (i + len > text.size()) len = text.size() - i;
    out.emplace_back(text.substr(i, len));
    i += len;
  }
  return out;
}

std::vector<int64_t> CodePointOffsets(std::string_view text) {
  std::vector<int64_t> offsets;
  size_t i = 0;
  while (i < text.size()) {
    offsets.push_back(static_cast<int64_t>(i));
    size_t len = Utf8SequenceLength(static_cast<unsigned char>(text[i]));
    i = std::min(text.size(), i + len);
  }
  offsets.push_back(static_cast<int64_t>(text.size()));
  return offsets;
}

}  // namespace bran
