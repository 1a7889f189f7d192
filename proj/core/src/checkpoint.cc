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

#include "bran/checkpoint.h"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_map>

#include "bran/error.h"

namespace bran {
namespace {

static_assert(std::endian::native == std::endian::little,
              "tensor files are written in host order; port the byte swaps");

template <typename T>
void WriteRaw(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T ReadRaw(std::istream& in, const char* what) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw ParseError(std::string("truncated tensor file while reading ") + what);
  return value;
}

constexpr size_t kMagicLength = sizeof(kTensorFileMagic) - 1;
constexpr uint32_t kMaxRank = 16;
constexpr uint32_t kMaxNameLength = 1 << 16;

}  // namespace

void WriteTensors(std::ostream& out, const std::vector<NamedTensor>& tensors) {
  out.write(kTensorFileMagic, kMagicLength);
  for (const auto& [name, tensor] : tensors) {
    WriteRaw<uint32_t>(out, static_cast<uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    WriteRaw<uint32_t>(out, static_cast<uint32_t>(tensor.rank()));
    for (int64_t d : tensor.shape()) WriteRaw<int64_t>(out, d);
    out.write(reinterpret_cast<const char*>(tensor.data()),
              static_cast<std::streamsize>(tensor.size() * sizeof(double)));
  }
  if (!out) throw Error("failed writing tensor file");
}

std::vector<NamedTensor> ReadTensors(std::istream& in) {
  char magic[kMagicLength];
  in.read(magic, kMagicLength);
  if (!in || std::memcmp(magic, kTensorFileMagic, kMagicLength) != 0) {
    throw ParseError("not a brantensor-v1 file");
  }
  std::vector<NamedTensor> tensors;
  while (in.peek() != std::char_traits<char>::eof()) {
    const auto name_length = ReadRaw<uint32_t>(in, "name length");
    if (name_length > kMaxNameLength) throw ParseError("implausible tensor name length");
    std::string name(name_length, '\0');
    in.read(name.data(), name_length);
    if (!in) throw ParseError("truncated tensor name");
    const auto rank = ReadRaw<uint32_t>(in, "rank");
    if (rank > kMaxRank) throw ParseError("implausible rank for '" + name + "'");
    Shape shape;
    for (uint32_t i = 0; i < rank; ++i) shape.push_back(ReadRaw<int64_t>(in, "dimension"));
    Tensor tensor(shape);
    in.read(reinterpret_cast<char*>(tensor.data()),
            static_cast<std::streamsize>(tensor.size() * sizeof(double)));
    if (!in) throw ParseError("truncated values for '" + name + "'");
    tensors.emplace_back(std::move(name), std::move(tensor));
  }
  return tensors;
}

void SaveTensorFile(const std::string& path,
                    const std::vector<NamedTensor>& tensors) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  WriteTensors(out, tensors);
}

std::vector<NamedTensor> LoadTensorFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  return ReadTensors(in);
}

std::vector<NamedTensor> ParamsToTensors(const ParamSet& params) {
  std::vector<NamedTensor> out;
  out.reserve(params.size());
  for (size_t i = 0; i < params.size(); ++i) {
    out.emplace_back(params[i].name, params[i].value);
  }
  return out;
}

void AssignParams(const std::vector<NamedTensor>& tensors, ParamSet& params) {
  std::unordered_map<std::string, const Tensor*> by_name;
  for (const auto& [name, tensor] : tensors) by_name[name] = &tensor;
  for (size_t i = 0; i < params.size(); ++i) {
    Parameter& p = params[i];
    auto it = by_name.find(p.name);
    if (it == by_name.end()) throw ParseError("checkpoint lacks parameter '" + p.name + "'");
    if (it->second->shape() != p.value.shape()) {
      throw ParseError("checkpoint shape " + ShapeToString(it->second->shape()) +
                       " for '" + p.name + "' but model expects " +
                       ShapeToString(p.value.shape()));
    }
    p.value = *it->second;
  }
}

}  // namespace bran
