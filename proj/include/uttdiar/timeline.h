// uttdiar/timeline.h

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

#ifndef UTTDIAR_TIMELINE_H_
#define UTTDIAR_TIMELINE_H_

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "uttdiar/common.h"

namespace uttdiar {

// A labeled half-open frame interval [start, end).
struct Utterance {
  int id = 0;  // 1-based, dense within a Timeline
  int64_t start = 0;
  int64_t end = 0;
  std::optional<std::string> speaker;

  int64_t duration() const { return end - start; }
  bool operator==(const Utterance &) const = default;
};

// Half-open overlap test: touching intervals do not overlap.
inline bool Overlaps(int64_t a_start, int64_t a_end, int64_t b_start,
                     int64_t b_end) {
  return a_start < b_end && b_start < a_end;
}

inline bool Overlaps(const Utterance &a, const Utterance &b) {
  return Overlaps(a.start, a.end, b.start, b.end);
}

/// An immutable set of utterances on a frame clock. Utterances are stored in
/// id order, so index i holds id i+1.
class Timeline {
 public:
  Timeline() = default;
  /// Throws InvalidInput on zero-length or out-of-range utterances, duplicate
  /// or non-dense ids, or a non-positive frame rate.
  Timeline(std::vector<Utterance> utterances, int64_t total_frames,
           double frame_rate);

  const std::vector<Utterance> &utterances() const { return utterances_; }
  const Utterance &operator[](std::size_t i) const { return utterances_[i]; }
  std::size_t size() const { return utterances_.size(); }
  bool empty() const { return utterances_.empty(); }
  int64_t total_frames() const { return total_frames_; }
  double frame_rate() const { return frame_rate_; }

  // Distinct speaker ids, sorted. Utterances without a speaker are skipped.
  std::vector<std::string> speakers() const;

  // 0-based indices sorted by (start, id).
  std::vector<int> start_order() const;

  bool operator==(const Timeline &) const = default;

 private:
  std::vector<Utterance> utterances_;
  int64_t total_frames_ = 0;
  double frame_rate_ = 100.0;
};

enum class LabelKind { kVad, kUbd };

const char *ToString(LabelKind kind);
LabelKind LabelKindFromString(const std::string &s);

// T x U binary grid; column u is y_u (VAD) or z_u (UBD).
struct LabelMatrix {
  LabelKind kind = LabelKind::kVad;
  Matrix<uint8_t> values;
};

LabelMatrix MakeLabels(const Timeline &timeline, LabelKind kind);

// Undirected overlap graph on 0-based utterance indices. Edges are stored as
// (u, v) with u < v, sorted.
struct OverlapGraph {
  std::size_t num_vertices = 0;
  std::vector<std::pair<int, int>> edges;

  std::vector<std::vector<int>> Adjacency() const;
  bool operator==(const OverlapGraph &) const = default;
};

// channel_of[u] in [0, num_channels).
struct Assignment {
  std::vector<int> channel_of;
  int num_channels = 0;

  bool operator==(const Assignment &) const = default;
};

/// Sweep-line construction, O(U log U + |E|).
OverlapGraph BuildOverlapGraph(const Timeline &timeline);

/// True iff no edge is monochromatic. Throws InvalidInput when the assignment
/// length differs from the vertex count or a channel is out of range.
bool IsValidAssignment(const OverlapGraph &graph, const Assignment &assignment);

/// Maximum number of simultaneously active utterances (0 when empty).
int MaxConcurrency(const Timeline &timeline);

/// 0-based indices of a maximum clique: the utterances active at the first
/// frame where concurrency peaks.
std::vector<int> MaxClique(const Timeline &timeline);

/// Renders Y^(all) P (VAD) or Z^(all) P (UBD) as a T x C grid. Throws
/// ConstraintViolation when the assignment is not a proper coloring.
Matrix<uint8_t> RenderReference(const Timeline &timeline,
                                const Assignment &assignment, LabelKind kind);

/// First-fit coloring in start order: each utterance takes the lowest channel
/// whose previous utterance has ended. Optimal for interval graphs; throws
/// Infeasible when more than `num_channels` are needed.
Assignment FirstFitAssignment(const Timeline &timeline, int num_channels);

/// Overlapped speech time / total speech time, frame counted.
double OverlapRatio(const Timeline &timeline);

nlohmann::json TimelineToJson(const Timeline &timeline);
Timeline TimelineFromJson(const nlohmann::json &j);

Timeline ReadTimeline(const std::string &path);
void WriteTimeline(const std::string &path, const Timeline &timeline);

}  // namespace uttdiar

#endif  // UTTDIAR_TIMELINE_H_
