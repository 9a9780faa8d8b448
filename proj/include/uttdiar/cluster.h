// uttdiar/cluster.h

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

// Utterance embeddings and constrained agglomerative clustering.

#ifndef UTTDIAR_CLUSTER_H_
#define UTTDIAR_CLUSTER_H_

#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "uttdiar/assign.h"
#include "uttdiar/decoder.h"
#include "uttdiar/scoring.h"

namespace uttdiar {

// T x C x L frame embeddings, stored channel-major: (c * T + t) * L + l.
class FrameEmbeddings {
 public:
  FrameEmbeddings() = default;
  FrameEmbeddings(std::size_t num_frames, std::size_t num_channels,
                  std::size_t dim);

  std::size_t num_frames() const { return frames_; }
  std::size_t num_channels() const { return channels_; }
  std::size_t dim() const { return dim_; }

  std::span<double> at(std::size_t t, std::size_t c) {
    return {values_.data() + (c * frames_ + t) * dim_, dim_};
  }
  std::span<const double> at(std::size_t t, std::size_t c) const {
    return {values_.data() + (c * frames_ + t) * dim_, dim_};
  }

  const std::vector<double> &values() const { return values_; }
  bool operator==(const FrameEmbeddings &) const = default;

 private:
  std::size_t frames_ = 0;
  std::size_t channels_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> values_;
};

// CSV with T*C rows of L values (channel-major) plus a JSON sidecar
// {"T": .., "C": .., "L": ..}.
FrameEmbeddings ReadFrameEmbeddings(const std::string &csv_path,
                                    const std::string &sidecar_path);
void WriteFrameEmbeddings(const std::string &csv_path,
                          const std::string &sidecar_path,
                          const FrameEmbeddings &embeddings);
// Sidecar path convention: "emb.csv" -> "emb.json".
std::string SidecarPath(const std::string &csv_path);

struct UtteranceEmbedding {
  int utterance_id = 0;
  std::vector<double> vector;
};

/// VAD-weighted mean of the utterance's frame embeddings on its channel,
/// normalized to unit length. Throws DegenerateEmbedding when the weighted
/// sum vanishes.
UtteranceEmbedding AggregateEmbedding(const FrameEmbeddings &frames,
                                      const ScoreMatrix &vad_scores,
                                      const DecodedUtterance &utterance);

// Unordered pairs of utterance ids, stored as (smaller, larger).
using CannotLinkSet = std::set<std::pair<int, int>>;

CannotLinkSet DeriveCannotLinks(const std::vector<DecodedUtterance> &utterances);

struct ClusterResult {
  std::vector<int> labels;  // aligned with the input embeddings, 0-based
  int num_clusters = 0;
  // Set when num_speakers was requested but cannot-links stopped merging
  // before reaching it.
  bool constraint_limited = false;
};

struct ClusterConfig {
  std::optional<int> num_speakers;
  double stop_threshold = 1.0;
};

/// Average-linkage AHC on Euclidean distance with cannot-link constraints.
/// Labels are numbered in order of first appearance.
ClusterResult Cluster(const std::vector<UtteranceEmbedding> &embeddings,
                      const CannotLinkSet &constraints,
                      const ClusterConfig &config = {});

/// Groups labeled utterances into per-speaker tracks in milliseconds; label
/// k becomes speaker "spk<k+1>".
Diarization AssembleDiarization(const std::vector<DecodedUtterance> &utterances,
                                const std::vector<int> &labels,
                                double frame_rate,
                                const std::string &recording_id);

Millis FrameToMillis(int64_t frame, double frame_rate);

}  // namespace uttdiar

#endif  // UTTDIAR_CLUSTER_H_
