// uttdiar/decoder.h

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

// Turns per-channel VAD and utterance-beginning posteriors into utterances.

#ifndef UTTDIAR_DECODER_H_
#define UTTDIAR_DECODER_H_

#include <cstdint>
#include <vector>

#include "json.hpp"
#include "uttdiar/assign.h"

namespace uttdiar {

struct DecodedUtterance {
  int id = 0;  // 1-based position in the decoded list
  int64_t start = 0;
  int64_t end = 0;
  int channel = 0;
  double confidence = 0.0;  // mean VAD posterior over [start, end)

  bool operator==(const DecodedUtterance &) const = default;
};

struct DecodeConfig {
  double threshold = 0.5;
  int median_window = 11;
  double peak_threshold = 0.3;
  int min_gap = 10;
  int min_duration = 5;
};

// Per-channel median filter (edges replicated) followed by `>= threshold`.
Matrix<uint8_t> BinarizeVad(const ScoreMatrix &scores, double threshold,
                            int median_window);

// Active runs become utterances, split at UBD peaks strictly inside a run.
// Peaks are local maxima >= peak_threshold; a greedy non-maximum suppression
// keeps the highest ones at least `min_gap` frames apart.
std::vector<DecodedUtterance> SplitOnUbd(const Matrix<uint8_t> &binary,
                                         const ScoreMatrix &ubd,
                                         double peak_threshold, int min_gap);

// Binarize, split, then trim each piece that ends at a UBD split back over
// trailing frames whose raw VAD is below threshold (at most
// median_window / 2 of them), and drop pieces shorter than min_duration.
std::vector<DecodedUtterance> Decode(const ScoreMatrix &vad,
                                     const ScoreMatrix &ubd,
                                     const DecodeConfig &config = {});

// Timeline-shaped JSON with an extra "channel" (1-based) per utterance.
nlohmann::json DecodedToJson(const std::vector<DecodedUtterance> &utterances,
                             int64_t total_frames, double frame_rate);

}  // namespace uttdiar

#endif  // UTTDIAR_DECODER_H_
