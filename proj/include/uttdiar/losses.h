// uttdiar/losses.h

// Copyright 2026  The uttdiar Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef UTTDIAR_LOSSES_H_
#define UTTDIAR_LOSSES_H_

#include <string>
#include <vector>

#include "json.hpp"
#include "uttdiar/assign.h"

namespace uttdiar {

struct MultiTaskWeights {
  double alpha = 1.0;
  double gamma = 0.1;
  double lambda = 0.03;
};

struct LossBreakdown {
  double vad = 0.0;
  double ubd = 0.0;
  double emb = 0.0;
  double total = 0.0;
};

nlohmann::json LossBreakdownToJson(const LossBreakdown &losses);

// Widens every spike of a UBD reference into a triangular window of half
// width `width`: 1 at the spike, 1/(width+1) at the edges. Overlapping
// windows combine by pointwise max.
Matrix<double> WidenUbdLabels(const Matrix<uint8_t> &grid, int width);

/// Mean BCE between the widened reference and the clamped UBD posteriors.
double UbdLoss(const Matrix<uint8_t> &reference, const ScoreMatrix &scores,
               int width);

struct LabeledEmbedding {
  std::vector<double> vector;
  std::string speaker;
};

/// Mean squared distance over same-speaker pairs plus mean squared hinge
/// max(0, margin - d)^2 over different-speaker pairs. A term with no pairs
/// contributes 0. Inputs must be unit norm.
double EmbeddingLoss(const std::vector<LabeledEmbedding> &embeddings,
                     double margin = 1.0);

LossBreakdown Combine(double vad, double ubd, double emb,
                      const MultiTaskWeights &weights = {});

}  // namespace uttdiar

#endif  // UTTDIAR_LOSSES_H_
