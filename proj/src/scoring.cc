// scoring.cc

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

#include "uttdiar/scoring.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <tuple>

#include "csv_util.h"

namespace uttdiar {

Millis SecondsToMillis(double seconds) {
  return static_cast<Millis>(std::llround(seconds * 1000.0));
}

void Diarization::Add(const std::string &speaker, Segment segment) {
  if (segment.offset <= segment.onset) return;
  auto &track = speakers_[speaker];
  track.push_back(segment);
  std::sort(track.begin(), track.end());
  std::vector<Segment> merged;
  for (const Segment &s : track) {
    if (!merged.empty() && s.onset <= merged.back().offset)
      merged.back().offset = std::max(merged.back().offset, s.offset);
    else
      merged.push_back(s);
  }
  track = std::move(merged);
}

Diarization Diarization::Relabeled(
    const std::map<std::string, std::string> &mapping) const {
  Diarization out(recording_id_);
  for (const auto &[label, segments] : speakers_) {
    auto it = mapping.find(label);
    const std::string &name = it == mapping.end() ? label : it->second;
    for (const Segment &s : segments) out.Add(name, s);
  }
  return out;
}

namespace {

double ParseField(const std::string &token, std::size_t line_no,
                  const char *what) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || ptr != token.data() + token.size() || !std::isfinite(v))
    throw ParseError(std::string("bad ") + what + " '" + token + "'", line_no);
  return v;
}

std::string FormatMillis(Millis ms) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%lld.%03lld",
                static_cast<long long>(ms / 1000),
                static_cast<long long>(ms % 1000));
  return buf;
}

}  // namespace

std::vector<Diarization> ParseRttm(const std::string &text) {
  std::map<std::string, Diarization> by_id;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::vector<std::string> tokens;
    for (std::string tok; fields >> tok;) tokens.push_back(tok);
    if (tokens.empty() || tokens[0].starts_with(";") || tokens[0].starts_with("#"))
      continue;
    if (tokens[0] != "SPEAKER") continue;
    if (tokens.size() < 8)
      throw ParseError("SPEAKER line needs at least 8 fields", line_no);
    const double onset = ParseField(tokens[3], line_no, "onset");
    const double duration = ParseField(tokens[4], line_no, "duration");
    if (onset < 0 || duration < 0)
      throw ParseError("negative onset or duration", line_no);
    const Millis on = SecondsToMillis(onset);
    const Millis dur = SecondsToMillis(duration);
    auto [it, inserted] = by_id.try_emplace(tokens[1], tokens[1]);
    it->second.Add(tokens[7], {on, on + dur});
  }
  std::vector<Diarization> out;
  for (auto &[id, d] : by_id) out.push_back(std::move(d));
  return out;
}

std::string WriteRttm(const Diarization &diarization) {
  std::vector<std::tuple<Millis, std::string, Millis>> rows;
  for (const auto &[label, segments] : diarization.speakers())
    for (const Segment &s : segments) rows.emplace_back(s.onset, label, s.duration());
  std::sort(rows.begin(), rows.end());
  std::string out;
  for (const auto &[onset, label, duration] : rows) {
    out += "SPEAKER " + diarization.recording_id() + " 1 " + FormatMillis(onset) +
           " " + FormatMillis(duration) + " <NA> <NA> " + label + " <NA> <NA>\n";
  }
  return out;
}

std::string WriteRttm(const std::vector<Diarization> &diarizations) {
  std::string out;
  for (const auto &d : diarizations) out += WriteRttm(d);
  return out;
}

std::vector<Diarization> ReadRttmFile(const std::string &path) {
  try {
    return ParseRttm(internal::ReadFile(path));
  } catch (const ParseError &e) {
    throw ParseError(path + ": " + e.what());
  }
}

void WriteRttmFile(const std::string &path,
                   const std::vector<Diarization> &diarizations) {
  internal::WriteFile(path, WriteRttm(diarizations));
}

std::vector<int> MaxWeightMatching(
    const std::vector<std::vector<int64_t>> &weights) {
  const std::size_t rows = weights.size();
  const std::size_t cols = rows ? weights[0].size() : 0;
  std::vector<int> match(rows, -1);
  if (rows == 0 || cols == 0) return match;
  const std::size_t n = std::max(rows, cols);
  int64_t max_w = 0;
  for (const auto &r : weights)
    for (int64_t w : r) max_w = std::max(max_w, w);
  auto cost = [&](std::size_t i, std::size_t j) -> int64_t {
    const int64_t w = (i < rows && j < cols) ? weights[i][j] : 0;
    return max_w - w;
  };
  // Shortest augmenting path Hungarian, 1-based with a virtual column 0.
  constexpr int64_t kInf = std::numeric_limits<int64_t>::max() / 4;
  std::vector<int64_t> u(n + 1, 0), v(n + 1, 0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<int64_t> minv(n + 1, kInf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      int64_t delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const int64_t cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  for (std::size_t j = 1; j <= n; ++j) {
    const std::size_t i = p[j] - 1;
    if (i < rows && j - 1 < cols && weights[i][j - 1] > 0)
      match[i] = static_cast<int>(j - 1);
  }
  return match;
}

namespace {

struct Piece {
  Millis duration;
  std::vector<int> ref;  // active reference speaker indices
  std::vector<int> hyp;
};

// Cuts the union timeline into pieces with constant speaker sets; pieces
// inside a collar region are dropped.
std::vector<Piece> ScoredPieces(const Diarization &reference,
                                const Diarization &hypothesis, Millis collar) {
  // (time, kind, index, delta); kind 0 = collar, 1 = ref, 2 = hyp.
  std::vector<std::tuple<Millis, int, int, int>> events;
  int idx = 0;
  for (const auto &[label, segments] : reference.speakers()) {
    for (const Segment &s : segments) {
      events.emplace_back(s.onset, 1, idx, +1);
      events.emplace_back(s.offset, 1, idx, -1);
      if (collar > 0) {
        for (Millis b : {s.onset, s.offset}) {
          events.emplace_back(std::max<Millis>(0, b - collar), 0, 0, +1);
          events.emplace_back(b + collar, 0, 0, -1);
        }
      }
    }
    ++idx;
  }
  const int num_ref = idx;
  idx = 0;
  for (const auto &[label, segments] : hypothesis.speakers()) {
    for (const Segment &s : segments) {
      events.emplace_back(s.onset, 2, idx, +1);
      events.emplace_back(s.offset, 2, idx, -1);
    }
    ++idx;
  }
  std::sort(events.begin(), events.end());
  std::vector<int> ref_on(num_ref, 0), hyp_on(idx, 0);
  int collar_depth = 0;
  std::vector<Piece> pieces;
  std::size_t e = 0;
  while (e < events.size()) {
    const Millis now = std::get<0>(events[e]);
    for (; e < events.size() && std::get<0>(events[e]) == now; ++e) {
      const auto &[t, kind, i, delta] = events[e];
      if (kind == 0) collar_depth += delta;
      else if (kind == 1) ref_on[i] += delta;
      else hyp_on[i] += delta;
    }
    if (e == events.size()) break;
    const Millis next = std::get<0>(events[e]);
    if (collar_depth > 0 || next == now) continue;
    Piece piece{next - now, {}, {}};
    for (int r = 0; r < num_ref; ++r)
      if (ref_on[r] > 0) piece.ref.push_back(r);
    for (int h = 0; h < idx; ++h)
      if (hyp_on[h] > 0) piece.hyp.push_back(h);
    if (!piece.ref.empty() || !piece.hyp.empty()) pieces.push_back(std::move(piece));
  }
  return pieces;
}

}  // namespace

std::map<std::string, std::string> MapSpeakers(const Diarization &reference,
                                               const Diarization &hypothesis) {
  std::vector<std::string> ref_labels, hyp_labels;
  for (const auto &[label, s] : reference.speakers()) ref_labels.push_back(label);
  for (const auto &[label, s] : hypothesis.speakers()) hyp_labels.push_back(label);
  std::vector<std::vector<int64_t>> weights(
      ref_labels.size(), std::vector<int64_t>(hyp_labels.size(), 0));
  for (const Piece &piece : ScoredPieces(reference, hypothesis, 0))
    for (int r : piece.ref)
      for (int h : piece.hyp) weights[r][h] += piece.duration;
  std::map<std::string, std::string> mapping;
  const std::vector<int> match = MaxWeightMatching(weights);
  for (std::size_t r = 0; r < match.size(); ++r)
    if (match[r] >= 0) mapping[ref_labels[r]] = hyp_labels[match[r]];
  return mapping;
}

namespace {

void FillPercentages(DerReport &report) {
  const double scored = static_cast<double>(report.scored_ms);
  report.scored_time = MillisToSeconds(report.scored_ms);
  if (scored <= 0) {
    report.der = report.miss = report.false_alarm = report.confusion = 0.0;
    return;
  }
  report.miss = 100.0 * static_cast<double>(report.miss_ms) / scored;
  report.false_alarm = 100.0 * static_cast<double>(report.false_alarm_ms) / scored;
  report.confusion = 100.0 * static_cast<double>(report.confusion_ms) / scored;
  report.der = 100.0 *
               static_cast<double>(report.miss_ms + report.false_alarm_ms +
                                   report.confusion_ms) /
               scored;
}

}  // namespace

DerReport ScoreDer(const Diarization &reference, const Diarization &hypothesis,
                   double collar) {
  if (!(collar >= 0)) throw InvalidInput("collar must be >= 0");
  const std::vector<Piece> pieces =
      ScoredPieces(reference, hypothesis, SecondsToMillis(collar));
  const std::size_t num_ref = reference.num_speakers();
  const std::size_t num_hyp = hypothesis.num_speakers();
  std::vector<std::vector<int64_t>> weights(num_ref,
                                            std::vector<int64_t>(num_hyp, 0));
  for (const Piece &piece : pieces)
    for (int r : piece.ref)
      for (int h : piece.hyp) weights[r][h] += piece.duration;
  const std::vector<int> match = MaxWeightMatching(weights);

  DerReport report;
  report.recording_id = reference.recording_id();
  for (const Piece &piece : pieces) {
    const int64_t n_ref = static_cast<int64_t>(piece.ref.size());
    const int64_t n_hyp = static_cast<int64_t>(piece.hyp.size());
    int64_t correct = 0;
    for (int r : piece.ref)
      if (match[r] >= 0 &&
          std::binary_search(piece.hyp.begin(), piece.hyp.end(), match[r]))
        ++correct;
    report.scored_ms += piece.duration * n_ref;
    report.miss_ms += piece.duration * std::max<int64_t>(0, n_ref - n_hyp);
    report.false_alarm_ms += piece.duration * std::max<int64_t>(0, n_hyp - n_ref);
    report.confusion_ms += piece.duration * (std::min(n_ref, n_hyp) - correct);
  }
  if (report.scored_ms == 0)
    throw UndefinedDer("no scored reference speech in recording '" +
                       reference.recording_id() + "'");
  FillPercentages(report);
  return report;
}

DerReport AggregateReports(const std::vector<DerReport> &reports) {
  DerReport total;
  total.recording_id = "TOTAL";
  for (const DerReport &r : reports) {
    total.scored_ms += r.scored_ms;
    total.miss_ms += r.miss_ms;
    total.false_alarm_ms += r.false_alarm_ms;
    total.confusion_ms += r.confusion_ms;
  }
  FillPercentages(total);
  return total;
}

nlohmann::json DerReportToJson(const DerReport &report) {
  return {{"recording_id", report.recording_id},
          {"der", report.der},
          {"miss", report.miss},
          {"false_alarm", report.false_alarm},
          {"confusion", report.confusion},
          {"scored_time", report.scored_time}};
}

std::string FormatDerTable(const std::vector<DerReport> &reports,
                           const DerReport &total) {
  std::size_t width = 9;
  for (const auto &r : reports) width = std::max(width, r.recording_id.size());
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-*s %7s %7s %7s %7s %10s\n",
                static_cast<int>(width), "Recording", "DER", "MI", "FA", "CF",
                "Scored(s)");
  out += buf;
  auto row = [&](const DerReport &r) {
    std::snprintf(buf, sizeof(buf), "%-*s %7.2f %7.2f %7.2f %7.2f %10.3f\n",
                  static_cast<int>(width), r.recording_id.c_str(), r.der, r.miss,
                  r.false_alarm, r.confusion, r.scored_time);
    out += buf;
  };
  for (const auto &r : reports) row(r);
  row(total);
  return out;
}

}  // namespace uttdiar
