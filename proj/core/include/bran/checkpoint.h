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

#ifndef BRAN_CHECKPOINT_H_
#define BRAN_CHECKPOINT_H_

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "bran/tape.h"
#include "bran/tensor.h"

// Binary tensor file ("brantensor-v1"):
//
//   bytes 0..12   ASCII "brantensor-v1"
//   then, repeated until end of file, one record per named tensor:
//     uint32      name length in bytes
//     bytes       name (UTF-8)
//     uint32      rank
//     int64[rank] dimensions
//     float64[]   values, row-major
//
// All integers and doubles are little-endian. Writing the same tensors
// always produces identical bytes.

namespace bran {

inline constexpr char kTensorFileMagic[] = "brantensor-v1";

using NamedTensor = std::pair<std::string, Tensor>;

void WriteTensors(std::ostream& out, const std::vector<NamedTensor>& tensors);
std::vector<NamedTensor> ReadTensors(std::istream& in);

void SaveTensorFile(const std::string& path,
                    const std::vector<NamedTensor>& tensors);
std::vector<NamedTensor> LoadTensorFile(const std::string& path);

std::vector<NamedTensor> ParamsToTensors(const ParamSet& params);
// Overwrites every parameter in `params` from `tensors`. Missing names or
// shape mismatches raise ParseError; extra tensors are ignored.
void AssignParams(const std::vector<NamedTensor>& tensors, ParamSet& params);

}  // namespace bran

#endif  // BRAN_CHECKPOINT_H_
