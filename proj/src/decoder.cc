// decoder.cc

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

#include "uttdiar/decoder.h"

#include <algorithm>
#include <map>

namespace uttdiar {

Matrix<uint8_t> BinarizeVad(const ScoreMatrix &scores, double threshold,
                            int median_window) {
  if (median_window < 1 || median_window % 2 == 0)
    throw InvalidInput("median window must be odd and >= 1");
  if (!(threshold > 0.0 && threshold < 1.0))
    throw InvalidInput("threshold must lie in (0, 1)");
  const int64_t num_frames = static_cast<int64_t>(scores.num_frames());
  const int64_t half = median_window / 2;
  Matrix<uint8_t> out(scores.num_frames(), scores.num_channels(), 0);
  std::vector<double> window(median_window);
  for (std::size_t c = 0; c < scores.num_channels(); ++c) {
    for (int64_t t = 0; t < num_frames; ++t) {
      for (int64_t k = -half; k <= half; ++k) {
        const int64_t s = std::clamp<int64_t>(t + k, 0, num_frames - 1);
        window[k + half] = scores.values(s, c);
      }
      std::nth_element(window.begin(), window.begin() + half, window.end());
      out(t, c) = window[half] >= threshold ? 1 : 0;
    }
  }
  return out;
}

namespace {

// Split points for the run [begin, end) of one channel.
std::vector<int64_t> PickPeaks(const ScoreMatrix &ubd, std::size_t channel,
                               int64_t begin, int64_t end,
                               double peak_threshold, int min_gap) {
  const int64_t num_frames = static_cast<int64_t>(ubd.num_frames());
  auto value = [&](int64_t t) { return ubd.values(t, channel); };
  std::vector<int64_t> candidates;
  // The run's first frame already starts an utterance.
  for (int64_t t = begin + 1; t < end; ++t) {
    const double v = value(t);
    if (v < peak_threshold) continue;
    if (t > 0 && value(t - 1) > v) continue;
    if (t + 1 < num_frames && value(t + 1) > v) continue;
    candidates.push_back(t);
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [&](int64_t a, int64_t b) { return value(a) > value(b); });
  std::vector<int64_t> kept;
  for (int64_t t : candidates) {
    bool far = true;
    for (int64_t k : kept)
      if ((t > k ? t - k : k - t) < min_gap) {
        far = false;
        break;
      }
    if (far) kept.push_back(t);
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

}  // namespace

std::vector<DecodedUtterance> SplitOnUbd(const Matrix<uint8_t> &binary,
                                         const ScoreMatrix &ubd,
                                         double peak_threshold, int min_gap) {
  if (binary.rows() != ubd.num_frames() || binary.cols() != ubd.num_channels())
    throw InvalidInput("VAD and UBD grids differ in shape");
  const int64_t num_frames = static_cast<int64_t>(binary.rows());
  std::vector<DecodedUtterance> out;
  for (std::size_t c = 0; c < binary.cols(); ++c) {
    int64_t t = 0;
    while (t < num_frames) {
      if (!binary(t, c)) {
        ++t;
        continue;
      }
      int64_t run_end = t;
      while (run_end < num_frames && binary(run_end, c)) ++run_end;
      int64_t piece_start = t;
      for (int64_t split : PickPeaks(ubd, c, t, run_end, peak_threshold, min_gap)) {
        out.push_back({0, piece_start, split, static_cast<int>(c), 0.0});
        piece_start = split;
      }
      out.push_back({0, piece_start, run_end, static_cast<int>(c), 0.0});
      t = run_end;
    }
  }
  std::sort(out.begin(), out.end(),
            [](const DecodedUtterance &a, const DecodedUtterance &b) {
              return a.start != b.start ? a.start < b.start : a.channel < b.channel;
            });
  for (std::size_t i = 0; i < out.size(); ++i) out[i].id = static_cast<int>(i) + 1;
  return out;
}

std::vector<DecodedUtterance> Decode(const ScoreMatrix &vad,
                                     const ScoreMatrix &ubd,
                                     const DecodeConfig &config) {
  if (vad.num_frames() != ubd.num_frames() ||
      vad.num_channels() != ubd.num_channels())
    throw InvalidInput("VAD and UBD score matrices differ in shape");
  const Matrix<uint8_t> binary =
      BinarizeVad(vad, config.threshold, config.median_window);
  std::vector<DecodedUtterance> pieces =
      SplitOnUbd(binary, ubd, config.peak_threshold, config.min_gap);
  // A split inside a median-filtered run may have swallowed a short pause
  // before the new onset; give the tail back where the raw posteriors are
  // below threshold. The filter bridges at most median_window / 2 frames.
  std::map<std::pair<int, int64_t>, std::size_t> starting_at;
  for (std::size_t i = 0; i < pieces.size(); ++i)
    starting_at[{pieces[i].channel, pieces[i].start}] = i;
  const int64_t max_trim = config.median_window / 2;
  for (DecodedUtterance &u : pieces) {
    if (!starting_at.count({u.channel, u.end})) continue;
    const int64_t floor = std::max(u.start + 1, u.end - max_trim);
    while (u.end > floor && vad.values(u.end - 1, u.channel) < config.threshold)
      --u.end;
  }

  std::vector<DecodedUtterance> out;
  for (DecodedUtterance &u : pieces) {
    if (u.end - u.start < config.min_duration) continue;
    double sum = 0.0;
    for (int64_t t = u.start; t < u.end; ++t) sum += vad.values(t, u.channel);
    u.confidence = sum / static_cast<double>(u.end - u.start);
    u.id = static_cast<int>(out.size()) + 1;
    out.push_back(u);
  }
  return out;
}

nlohmann::json DecodedToJson(const std::vector<DecodedUtterance> &utterances,
                             int64_t total_frames, double frame_rate) {
  nlohmann::json utts = nlohmann::json::array();
  for (const auto &u : utterances)
    utts.push_back({{"id", u.id},
                    {"start", u.start},
                    {"end", u.end},
                    {"channel", u.channel + 1},
                    {"confidence", u.confidence}});
  return {{"total_frames", total_frames},
          {"frame_rate", frame_rate},
          {"utterances", std::move(utts)}};
}

}  // namespace uttdiar
