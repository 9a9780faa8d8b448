// uttdiar/simulator.h

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

// Meeting-like ground truth plus oracle/noisy network outputs.
//
// Each speaker alternates exponential pauses (mean beta seconds) and uniform
// utterance durations on a shared clock starting at 0. Tracks are mixed; an
// optional concurrency cap delays utterances to the earliest start where
// they fit.

#ifndef UTTDIAR_SIMULATOR_H_
#define UTTDIAR_SIMULATOR_H_

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "uttdiar/assign.h"
#include "uttdiar/cluster.h"
#include "uttdiar/scoring.h"
#include "uttdiar/timeline.h"

namespace uttdiar {

// Portable sampling on top of mt19937_64; the std:: distributions are
// implementation-defined and would break cross-platform reproducibility.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  double Uniform();  // [0, 1)
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }
  int UniformInt(int lo, int hi);  // inclusive
  double Exponential(double mean);
  double Normal();

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

uint64_t DeriveSeed(uint64_t seed, uint64_t stream);

struct SimConfig {
  int min_speakers = 2;
  int max_speakers = 7;
  double beta = 10.0;  // mean pause, seconds
  double min_utterance_s = 0.5;
  double max_utterance_s = 3.0;
  std::optional<int64_t> target_frames;  // defaults to 3.3 minutes
  double frame_rate = 100.0;
  std::optional<int> max_concurrency_cap = 2;
  uint64_t seed = 0;
  double posterior_noise = 0.0;  // logit-domain std
  double embedding_noise = 0.05;
  int embedding_dim = 16;
  int num_channels = 2;
  bool strict_placement = false;

  int64_t TotalFrames() const;
  void Validate() const;
};

struct DroppedUtterance {
  std::string speaker;
  int64_t tentative_start = 0;
  int64_t duration = 0;
};

class PlacementError : public Error {
 public:
  PlacementError(const std::string &what, std::vector<DroppedUtterance> dropped)
      : Error(what), dropped_(std::move(dropped)) {}
  const std::vector<DroppedUtterance> &dropped() const { return dropped_; }

 private:
  std::vector<DroppedUtterance> dropped_;
};

/// Deterministic given config.seed. Utterances the cap pushes past the end
/// of the meeting are dropped and reported through `dropped`; with
/// strict_placement set they raise PlacementError instead.
Timeline SimulateTimeline(const SimConfig &config,
                          std::vector<DroppedUtterance> *dropped = nullptr);

struct SimPosteriors {
  ScoreMatrix vad;
  ScoreMatrix ubd;
  Assignment assignment;
};

/// Renders a first-fit assignment, saturates to the clamp bounds and adds
/// Gaussian logit jitter of std `noise`.
SimPosteriors SynthesizePosteriors(const Timeline &timeline, int num_channels,
                                   double noise, uint64_t seed);

/// Random orthonormal speaker centroids; active frames carry centroid + noise
/// (renormalized), inactive frames carry pure noise.
FrameEmbeddings SynthesizeEmbeddings(const Timeline &timeline,
                                     const Assignment &assignment, int dim,
                                     double noise, uint64_t seed);

Diarization ReferenceDiarization(const Timeline &timeline,
                                 const std::string &recording_id);

struct Meeting {
  std::string id;
  Timeline timeline;
  SimPosteriors posteriors;
  FrameEmbeddings embeddings;
  Diarization reference;
  double overlap_ratio = 0.0;
  std::vector<DroppedUtterance> dropped;
};

std::string MeetingId(std::size_t index);

// Meeting `index` of the corpus defined by `config`.
Meeting SimulateMeeting(const SimConfig &config, std::size_t index);

// Writes <dir>/{timeline.json, vad.csv, ubd.csv, emb.csv, emb.json, ref.rttm}.
void WriteMeeting(const std::string &dir, const Meeting &meeting);

struct CorpusStats {
  std::size_t num_meetings = 0;
  double mean_overlap_ratio = 0.0;
  double min_overlap_ratio = 0.0;
  double max_overlap_ratio = 0.0;
  int max_concurrency = 0;
  std::size_t dropped_utterances = 0;
  std::map<int, std::size_t> speaker_histogram;

  void Add(const Meeting &meeting);
  void Finish();
  std::string Format() const;

 private:
  double ratio_sum_ = 0.0;
};

}  // namespace uttdiar

#endif  // UTTDIAR_SIMULATOR_H_
