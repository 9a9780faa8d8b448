// losses.cc

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

#include "uttdiar/losses.h"

#include <algorithm>
#include <cmath>

namespace uttdiar {

nlohmann::json LossBreakdownToJson(const LossBreakdown &losses) {
  return {{"vad", losses.vad},
          {"ubd", losses.ubd},
          {"emb", losses.emb},
          {"total", losses.total}};
}

Matrix<double> WidenUbdLabels(const Matrix<uint8_t> &grid, int width) {
  if (width < 0) throw InvalidInput("ubd width must be >= 0");
  const int64_t num_frames = static_cast<int64_t>(grid.rows());
  Matrix<double> out(grid.rows(), grid.cols(), 0.0);
  for (int64_t t = 0; t < num_frames; ++t) {
    for (std::size_t c = 0; c < grid.cols(); ++c) {
      if (!grid(t, c)) continue;
      const int64_t lo = std::max<int64_t>(0, t - width);
      const int64_t hi = std::min<int64_t>(num_frames - 1, t + width);
      for (int64_t s = lo; s <= hi; ++s) {
        const double d = static_cast<double>(s > t ? s - t : t - s);
        const double v = 1.0 - d / (width + 1.0);
        out(s, c) = std::max(out(s, c), v);
      }
    }
  }
  return out;
}

double UbdLoss(const Matrix<uint8_t> &reference, const ScoreMatrix &scores,
               int width) {
  if (reference.rows() != scores.num_frames() ||
      reference.cols() != scores.num_channels())
    throw InvalidInput("UBD reference and scores differ in shape");
  if (reference.empty()) return 0.0;
  const Matrix<double> target = WidenUbdLabels(reference, width);
  double sum = 0.0;
  for (std::size_t i = 0; i < target.data().size(); ++i)
    sum += Bce(target.data()[i], scores.values.data()[i]);
  return sum / static_cast<double>(target.data().size());
}

double EmbeddingLoss(const std::vector<LabeledEmbedding> &embeddings,
                     double margin) {
  if (embeddings.size() < 2)
    throw InvalidInput("embedding loss needs at least two embeddings");
  const std::size_t dim = embeddings.front().vector.size();
  for (const auto &e : embeddings) {
    if (e.vector.size() != dim)
      throw InvalidInput("embeddings differ in dimension");
    double sq = 0.0;
    for (double x : e.vector) sq += x * x;
    if (std::abs(std::sqrt(sq) - 1.0) > 1e-6)
      throw InvalidInput("embedding is not unit norm");
  }
  double same_sum = 0.0, diff_sum = 0.0;
  std::size_t same_n = 0, diff_n = 0;
  for (std::size_t i = 0; i < embeddings.size(); ++i) {
    for (std::size_t j = i + 1; j < embeddings.size(); ++j) {
      double sq = 0.0;
      for (std::size_t k = 0; k < dim; ++k) {
        const double d = embeddings[i].vector[k] - embeddings[j].vector[k];
        sq += d * d;
      }
      if (embeddings[i].speaker == embeddings[j].speaker) {
        same_sum += sq;
        ++same_n;
      } else {
        const double hinge = std::max(0.0, margin - std::sqrt(sq));
        diff_sum += hinge * hinge;
        ++diff_n;
      }
    }
  }
  return (same_n ? same_sum / same_n : 0.0) + (diff_n ? diff_sum / diff_n : 0.0);
}

LossBreakdown Combine(double vad, double ubd, double emb,
                      const MultiTaskWeights &weights) {
  if (weights.alpha < 0 || weights.gamma < 0 || weights.lambda < 0)
    throw InvalidInput("multi-task weights must be non-negative");
  return {vad, ubd, emb,
          weights.alpha * vad + weights.gamma * ubd + weights.lambda * emb};
}

}  // namespace uttdiar
