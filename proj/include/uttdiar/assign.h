// uttdiar/assign.h

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

// Graph-PIT utterance-to-channel assignment for the overlap-aware VAD loss.
//
// The BCE between a rendered reference Y^(all) P and the posteriors splits
// into a constant part (every entry scored as 0) plus one additive term per
// (utterance, channel). Because a proper coloring never puts two utterances
// on the same frame of the same channel, the total for any valid P is
//
//   baseline + sum_u delta[u][p_u],
//
// which turns the minimization over colorings into a shortest path over
// channel-occupancy states (SolveDp). SolveBruteForce enumerates colorings
// directly and exists as a test oracle.

#ifndef UTTDIAR_ASSIGN_H_
#define UTTDIAR_ASSIGN_H_

#include <cstdint>
#include <string>

#include "json.hpp"
#include "uttdiar/common.h"
#include "uttdiar/timeline.h"

namespace uttdiar {

inline constexpr double kClampEpsilon = 1e-7;

double ClampProbability(double p);

// Binary cross entropy of a single entry; `p` is clamped first.
double Bce(double target, double p);

// T x C posterior grid.
struct ScoreMatrix {
  LabelKind kind = LabelKind::kVad;
  double frame_rate = 100.0;
  Matrix<double> values;

  std::size_t num_frames() const { return values.rows(); }
  std::size_t num_channels() const { return values.cols(); }

  // Copy with every entry clamped to [eps, 1 - eps].
  ScoreMatrix Clamped() const;
};

// Headerless CSV, T rows x C columns.
ScoreMatrix ReadScoreCsv(const std::string &path, LabelKind kind,
                         double frame_rate);
void WriteScoreCsv(const std::string &path, const ScoreMatrix &scores);
ScoreMatrix ParseScoreCsv(const std::string &text, LabelKind kind,
                          double frame_rate);
std::string FormatScoreCsv(const ScoreMatrix &scores);

nlohmann::json ScoreMatrixToJson(const ScoreMatrix &scores);
ScoreMatrix ScoreMatrixFromJson(const nlohmann::json &j);

struct CostMatrix {
  double baseline = 0.0;
  Matrix<double> delta;  // U x C
  int64_t num_frames = 0;

  std::size_t num_utterances() const { return delta.rows(); }
  int num_channels() const { return static_cast<int>(delta.cols()); }
  // baseline + sum_u delta[u][channel_of[u]].
  double Evaluate(const Assignment &assignment) const;
};

struct AssignmentResult {
  Assignment assignment;
  double cost = 0.0;  // unnormalized: baseline + sum of deltas
  double loss = 0.0;  // cost / (T * C)
  int64_t explored_states = 0;
};

CostMatrix ComputeCostMatrix(const LabelMatrix &labels,
                             const ScoreMatrix &scores);
// Same result computed from the utterance intervals, without a dense label
// grid.
CostMatrix ComputeCostMatrix(const Timeline &timeline,
                             const ScoreMatrix &scores);

struct BruteForceOptions {
  std::size_t max_utterances = 12;
};

/// Exhaustive minimum over proper colorings. Ties go to the lexicographically
/// smallest channel vector. Throws InvalidInput above the utterance cap and
/// Infeasible when no proper coloring with `num_channels` exists.
AssignmentResult SolveBruteForce(const OverlapGraph &graph,
                                 const CostMatrix &cost, int num_channels,
                                 const BruteForceOptions &options = {});

/// Dynamic program over channel-occupancy states, processing utterances in
/// start order. Same optimum and tie-break as SolveBruteForce.
AssignmentResult SolveDp(const OverlapGraph &graph, const CostMatrix &cost,
                         const Timeline &timeline, int num_channels);

enum class Solver { kDp, kBruteForce };

Solver SolverFromString(const std::string &s);

struct VadLossResult {
  double loss = 0.0;
  Assignment optimal;
  AssignmentResult details;
};

/// Mean-reduced min over proper colorings of BCE(Y^(all) P, Y_hat).
VadLossResult GraphPitVadLoss(const LabelMatrix &labels,
                              const ScoreMatrix &scores,
                              const Timeline &timeline, int num_channels,
                              Solver solver = Solver::kDp);

}  // namespace uttdiar

#endif  // UTTDIAR_ASSIGN_H_
