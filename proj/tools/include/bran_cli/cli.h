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

#ifndef BRAN_CLI_CLI_H_
#define BRAN_CLI_CLI_H_

#include <iosfwd>
#include <string>
#include <vector>

namespace bran::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitFailure = 2;

// Runs one `bran` invocation. `args` excludes the program name. Returns 0
// on success, 1 on invalid flags or configuration and 2 on any other
// failure.
int Run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bran::cli

#endif  // BRAN_CLI_CLI_H_
