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

#ifndef BRAN_UTF8_H_
#define BRAN_UTF8_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace bran {

// Byte length of the UTF-8 sequence starting with `lead`. Invalid lead
// bytes count as a single byte so malformed input never stalls a scan.
int Utf8SequenceLength(unsigned char lead);

// Splits `text` into code points, each returned as its UTF-8 byte string.
std::vector<std::string> SplitCodePoints(std::string_view text);

// Byte offset of every code point boundary: entry k is the byte offset of
// code point k, and the final entry is text.size().
std::vector<int64_t> CodePointOffsets(std::string_view text);

}  // namespace bran

#endif  // BRAN_UTF8_H_
