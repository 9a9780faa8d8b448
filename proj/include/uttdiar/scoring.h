// uttdiar/scoring.h

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

// RTTM I/O and overlap-aware diarization error rate.
//
// Times are held as integer milliseconds so that every score is computed by
// exact interval arithmetic.

#ifndef UTTDIAR_SCORING_H_
#define UTTDIAR_SCORING_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "uttdiar/common.h"

namespace uttdiar {

using Millis = int64_t;

Millis SecondsToMillis(double seconds);
inline double MillisToSeconds(Millis ms) { return static_cast<double>(ms) / 1000.0; }

struct Segment {
  Millis onset = 0;
  Millis offset = 0;  // exclusive

  Millis duration() const { return offset - onset; }
  bool operator==(const Segment &) const = default;
  auto operator<=>(const Segment &) const = default;
};

class Diarization {
 public:
  Diarization() = default;
  explicit Diarization(std::string recording_id)
      : recording_id_(std::move(recording_id)) {}

  const std::string &recording_id() const { return recording_id_; }
  void set_recording_id(std::string id) { recording_id_ = std::move(id); }

  // Adds [onset, offset); zero-length segments are ignored. The speaker's
  // track is kept sorted with abutting/overlapping segments merged.
  void Add(const std::string &speaker, Segment segment);

  const std::map<std::string, std::vector<Segment>> &speakers() const {
    return speakers_;
  }
  std::size_t num_speakers() const { return speakers_.size(); }
  bool empty() const { return speakers_.empty(); }

  // Copy with speaker labels renamed through `mapping` (labels absent from
  // the mapping keep their name).
  Diarization Relabeled(const std::map<std::string, std::string> &mapping) const;

  bool operator==(const Diarization &) const = default;

 private:
  std::string recording_id_;
  std::map<std::string, std::vector<Segment>> speakers_;
};

/// Parses SPEAKER lines; blank lines, ';;' comments and other record types
/// are skipped. Result is sorted by recording id. Throws ParseError with the
/// line number on malformed SPEAKER lines.
std::vector<Diarization> ParseRttm(const std::string &text);
std::string WriteRttm(const Diarization &diarization);
std::string WriteRttm(const std::vector<Diarization> &diarizations);

std::vector<Diarization> ReadRttmFile(const std::string &path);
void WriteRttmFile(const std::string &path,
                   const std::vector<Diarization> &diarizations);

struct DerReport {
  std::string recording_id;
  double der = 0.0;  // percentages of scored reference speech
  double miss = 0.0;
  double false_alarm = 0.0;
  double confusion = 0.0;
  double scored_time = 0.0;  // seconds of scored reference speech

  // Raw error durations, kept for time-weighted corpus aggregation.
  Millis scored_ms = 0;
  Millis miss_ms = 0;
  Millis false_alarm_ms = 0;
  Millis confusion_ms = 0;
};

// Maximum-weight bipartite matching (Hungarian method) on a rows x cols
// non-negative integer weight matrix. Returns, per row, the matched column or
// -1. Pairs of zero weight are left unmatched.
std::vector<int> MaxWeightMatching(const std::vector<std::vector<int64_t>> &weights);

/// Optimal reference -> hypothesis label mapping by total overlap duration.
std::map<std::string, std::string> MapSpeakers(const Diarization &reference,
                                               const Diarization &hypothesis);

/// Overlap-aware DER. Regions within `collar` seconds of any reference
/// boundary are excluded. Throws UndefinedDer when no reference speech is
/// left to score.
DerReport ScoreDer(const Diarization &reference, const Diarization &hypothesis,
                   double collar);

// Time-weighted corpus aggregate of per-recording reports.
DerReport AggregateReports(const std::vector<DerReport> &reports);

nlohmann::json DerReportToJson(const DerReport &report);
// Aligned text table, one row per report: DER MI FA CF.
std::string FormatDerTable(const std::vector<DerReport> &reports,
                           const DerReport &total);

}  // namespace uttdiar

#endif  // UTTDIAR_SCORING_H_
