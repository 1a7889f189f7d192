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

#ifndef BRAN_GRADCHECK_H_
#define BRAN_GRADCHECK_H_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "bran/config.h"
#include "bran/corpus.h"
#include "bran/tape.h"

// Finite-difference verification of the analytic gradients of the full
// model on a small random document.

namespace bran {

struct GradCheckOptions {
  GradCheckOptions() {
    encoder.dim = 8;
    encoder.heads = 2;
    encoder.blocks = 1;
    // Shorter than the document so the fallback position vector is used.
    encoder.max_positions = 10;
  }

  EncoderConfig encoder;
  int tokens = 12;
  int vocab_size = 20;
  double ner_weight = 1.0;
  MentionCells cells = MentionCells::kFirst;
  double step = 1e-5;
  uint64_t seed = 1;
};

struct GroupError {
  std::string name;
  int64_t scalars = 0;
  // max |analytic - numeric| / max(max |analytic|, max |numeric|)
  double relative_error = 0.0;
};

struct GradCheckReport {
  std::vector<GroupError> groups;
  double max_relative_error = 0.0;
};

// Compares param.grad (already filled by the caller) with central
// differences of `loss` for every entry of every parameter.
GradCheckReport CompareGradients(ParamSet& params, const std::function<double()>& loss,
                                 double step);

// Two entities (one chemical, one disease) with two mentions each on a
// `tokens`-long random document.
Document MakeGradCheckDocument(const GradCheckOptions& options);

// Builds the model with non-zero output layers, runs the joint loss
// backward and compares against central differences.
GradCheckReport RunGradCheck(const GradCheckOptions& options);

}  // namespace bran

#endif  // BRAN_GRADCHECK_H_
