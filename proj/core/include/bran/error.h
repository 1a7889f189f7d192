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

#ifndef BRAN_ERROR_H_
#define BRAN_ERROR_H_

#include <stdexcept>
#include <string>

namespace bran {

// Base of every error raised by the library. The CLI maps ConfigError to
// exit code 1 and everything else to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration, flags or preconditions supplied by the caller.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed input file (PubTator, vocabulary, checkpoint, config, TSV).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Shape mismatch between tensor operands.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A documented precondition of an operation was violated.
class ContractError : public Error {
 public:
  using Error::Error;
};

// A character span could not be mapped onto tokens.
class AlignmentError : public Error {
 public:
  using Error::Error;
};

// Index out of range in a table lookup.
class LookupError : public Error {
 public:
  using Error::Error;
};

// Non-finite loss or gradient during optimization.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace bran

#endif  // BRAN_ERROR_H_
