// timeline.cc

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

#include "uttdiar/timeline.h"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <queue>
#include <set>

namespace uttdiar {

Timeline::Timeline(std::vector<Utterance> utterances, int64_t total_frames,
                   double frame_rate)
    : utterances_(std::move(utterances)),
      total_frames_(total_frames),
      frame_rate_(frame_rate) {
  if (!(frame_rate_ > 0.0))
    throw InvalidInput("frame_rate must be positive");
  if (total_frames_ < 0) throw InvalidInput("total_frames must be >= 0");
  std::sort(utterances_.begin(), utterances_.end(),
            [](const Utterance &a, const Utterance &b) { return a.id < b.id; });
  for (std::size_t i = 0; i < utterances_.size(); ++i) {
    const Utterance &u = utterances_[i];
    if (u.id != static_cast<int>(i) + 1)
      throw InvalidInput("utterance ids must be unique and dense 1..U (got " +
                         std::to_string(u.id) + ")");
    if (u.start < 0) throw InvalidInput("utterance start must be >= 0");
    if (u.end <= u.start)
      throw InvalidInput("utterance " + std::to_string(u.id) +
                         " has zero or negative duration");
    if (u.end > total_frames_)
      throw InvalidInput("utterance " + std::to_string(u.id) +
                         " ends after total_frames");
  }
}

std::vector<std::string> Timeline::speakers() const {
  std::set<std::string> s;
  for (const auto &u : utterances_)
    if (u.speaker) s.insert(*u.speaker);
  return {s.begin(), s.end()};
}

std::vector<int> Timeline::start_order() const {
  std::vector<int> order(utterances_.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [this](int a, int b) {
    return utterances_[a].start < utterances_[b].start;
  });
  return order;
}

const char *ToString(LabelKind kind) {
  return kind == LabelKind::kVad ? "VAD" : "UBD";
}

LabelKind LabelKindFromString(const std::string &s) {
  if (s == "VAD" || s == "vad") return LabelKind::kVad;
  if (s == "UBD" || s == "ubd") return LabelKind::kUbd;
  throw InvalidInput("unknown label kind '" + s + "'");
}

LabelMatrix MakeLabels(const Timeline &timeline, LabelKind kind) {
  LabelMatrix labels{kind, Matrix<uint8_t>(timeline.total_frames(),
                                           timeline.size(), 0)};
  for (std::size_t u = 0; u < timeline.size(); ++u) {
    const Utterance &utt = timeline[u];
    if (kind == LabelKind::kUbd) {
      labels.values(utt.start, u) = 1;
    } else {
      for (int64_t t = utt.start; t < utt.end; ++t) labels.values(t, u) = 1;
    }
  }
  return labels;
}

std::vector<std::vector<int>> OverlapGraph::Adjacency() const {
  std::vector<std::vector<int>> adj(num_vertices);
  for (auto [u, v] : edges) {
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  return adj;
}

OverlapGraph BuildOverlapGraph(const Timeline &timeline) {
  OverlapGraph graph;
  graph.num_vertices = timeline.size();
  // Active utterances keyed by end frame; everything ending at or before the
  // current start is retired before pairing.
  using Entry = std::pair<int64_t, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> by_end;
  std::set<int> active;
  for (int u : timeline.start_order()) {
    const int64_t start = timeline[u].start;
    while (!by_end.empty() && by_end.top().first <= start) {
      active.erase(by_end.top().second);
      by_end.pop();
    }
    for (int v : active) graph.edges.emplace_back(std::min(u, v), std::max(u, v));
    active.insert(u);
    by_end.emplace(timeline[u].end, u);
  }
  std::sort(graph.edges.begin(), graph.edges.end());
  return graph;
}

bool IsValidAssignment(const OverlapGraph &graph, const Assignment &assignment) {
  if (assignment.channel_of.size() != graph.num_vertices)
    throw InvalidInput("assignment length " +
                       std::to_string(assignment.channel_of.size()) +
                       " does not match graph size " +
                       std::to_string(graph.num_vertices));
  for (int c : assignment.channel_of)
    if (c < 0 || c >= assignment.num_channels)
      throw InvalidInput("channel index out of range");
  for (auto [u, v] : graph.edges)
    if (assignment.channel_of[u] == assignment.channel_of[v]) return false;
  return true;
}

namespace {

// (frame, delta) events; ends sort before starts at the same frame.
std::vector<std::pair<int64_t, int>> Events(const Timeline &timeline) {
  std::vector<std::pair<int64_t, int>> events;
  events.reserve(2 * timeline.size());
  for (const auto &u : timeline.utterances()) {
    events.emplace_back(u.start, +1);
    events.emplace_back(u.end, -1);
  }
  std::sort(events.begin(), events.end());
  return events;
}

}  // namespace

int MaxConcurrency(const Timeline &timeline) {
  int current = 0, best = 0;
  for (auto [frame, delta] : Events(timeline)) {
    current += delta;
    best = std::max(best, current);
  }
  return best;
}

std::vector<int> MaxClique(const Timeline &timeline) {
  int current = 0, best = 0;
  int64_t best_frame = -1;
  for (auto [frame, delta] : Events(timeline)) {
    current += delta;
    if (current > best) {
      best = current;
      best_frame = frame;
    }
  }
  std::vector<int> clique;
  if (best_frame < 0) return clique;
  for (std::size_t u = 0; u < timeline.size(); ++u)
    if (timeline[u].start <= best_frame && best_frame < timeline[u].end)
      clique.push_back(static_cast<int>(u));
  return clique;
}

Matrix<uint8_t> RenderReference(const Timeline &timeline,
                                const Assignment &assignment, LabelKind kind) {
  if (!IsValidAssignment(BuildOverlapGraph(timeline), assignment))
    throw ConstraintViolation(
        "assignment maps overlapping utterances to the same channel");
  Matrix<uint8_t> grid(timeline.total_frames(), assignment.num_channels, 0);
  for (std::size_t u = 0; u < timeline.size(); ++u) {
    const Utterance &utt = timeline[u];
    const int c = assignment.channel_of[u];
    if (kind == LabelKind::kUbd) {
      grid(utt.start, c) = 1;
    } else {
      for (int64_t t = utt.start; t < utt.end; ++t) grid(t, c) = 1;
    }
  }
  return grid;
}

Assignment FirstFitAssignment(const Timeline &timeline, int num_channels) {
  if (num_channels < 1) throw InvalidInput("num_channels must be >= 1");
  Assignment assignment{std::vector<int>(timeline.size(), -1), num_channels};
  std::vector<int64_t> tail(num_channels, 0);
  for (int u : timeline.start_order()) {
    const Utterance &utt = timeline[u];
    int chosen = -1;
    for (int c = 0; c < num_channels; ++c) {
      if (tail[c] <= utt.start) {
        chosen = c;
        break;
      }
    }
    if (chosen < 0)
      throw Infeasible("more than " + std::to_string(num_channels) +
                           " simultaneously active utterances",
                       MaxClique(timeline));
    assignment.channel_of[u] = chosen;
    tail[chosen] = utt.end;
  }
  return assignment;
}

double OverlapRatio(const Timeline &timeline) {
  int64_t speech = 0, overlapped = 0;
  int current = 0;
  int64_t prev = 0;
  for (auto [frame, delta] : Events(timeline)) {
    if (current >= 1) speech += frame - prev;
    if (current >= 2) overlapped += frame - prev;
    current += delta;
    prev = frame;
  }
  return speech == 0 ? 0.0
                     : static_cast<double>(overlapped) /
                           static_cast<double>(speech);
}

nlohmann::json TimelineToJson(const Timeline &timeline) {
  nlohmann::json utts = nlohmann::json::array();
  for (const auto &u : timeline.utterances()) {
    nlohmann::json ju = {{"id", u.id}, {"start", u.start}, {"end", u.end}};
    if (u.speaker) ju["speaker"] = *u.speaker;
    utts.push_back(std::move(ju));
  }
  return {{"total_frames", timeline.total_frames()},
          {"frame_rate", timeline.frame_rate()},
          {"utterances", std::move(utts)}};
}

Timeline TimelineFromJson(const nlohmann::json &j) {
  try {
    std::vector<Utterance> utts;
    for (const auto &ju : j.at("utterances")) {
      Utterance u;
      u.id = ju.at("id").get<int>();
      u.start = ju.at("start").get<int64_t>();
      u.end = ju.at("end").get<int64_t>();
      if (ju.contains("speaker") && !ju["speaker"].is_null())
        u.speaker = ju["speaker"].get<std::string>();
      utts.push_back(std::move(u));
    }
    return Timeline(std::move(utts), j.at("total_frames").get<int64_t>(),
                    j.value("frame_rate", 100.0));
  } catch (const nlohmann::json::exception &e) {
    throw ParseError(std::string("timeline json: ") + e.what());
  }
}

Timeline ReadTimeline(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception &e) {
    throw ParseError(path + ": " + e.what());
  }
  return TimelineFromJson(j);
}

void WriteTimeline(const std::string &path, const Timeline &timeline) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << TimelineToJson(timeline).dump(1) << '\n';
}

}  // namespace uttdiar
