// assign.cc

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

#include "uttdiar/assign.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "csv_util.h"

namespace uttdiar {

double ClampProbability(double p) {
  return std::clamp(p, kClampEpsilon, 1.0 - kClampEpsilon);
}

double Bce(double target, double p) {
  p = ClampProbability(p);
  return -(target * std::log(p) + (1.0 - target) * std::log1p(-p));
}

ScoreMatrix ScoreMatrix::Clamped() const {
  ScoreMatrix out = *this;
  for (double &v : out.values.data()) v = ClampProbability(v);
  return out;
}

ScoreMatrix ParseScoreCsv(const std::string &text, LabelKind kind,
                          double frame_rate) {
  return ScoreMatrix{kind, frame_rate, internal::ParseCsvMatrix(text)};
}

std::string FormatScoreCsv(const ScoreMatrix &scores) {
  return internal::FormatCsvMatrix(scores.values);
}

ScoreMatrix ReadScoreCsv(const std::string &path, LabelKind kind,
                         double frame_rate) {
  try {
    return ParseScoreCsv(internal::ReadFile(path), kind, frame_rate);
  } catch (const ParseError &e) {
    throw ParseError(path + ": " + e.what());
  }
}

void WriteScoreCsv(const std::string &path, const ScoreMatrix &scores) {
  internal::WriteFile(path, FormatScoreCsv(scores));
}

nlohmann::json ScoreMatrixToJson(const ScoreMatrix &scores) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t t = 0; t < scores.num_frames(); ++t) {
    auto r = scores.values.row(t);
    rows.push_back(std::vector<double>(r.begin(), r.end()));
  }
  return {{"kind", ToString(scores.kind)},
          {"frame_rate", scores.frame_rate},
          {"values", std::move(rows)}};
}

ScoreMatrix ScoreMatrixFromJson(const nlohmann::json &j) {
  try {
    ScoreMatrix s;
    s.kind = LabelKindFromString(j.at("kind").get<std::string>());
    s.frame_rate = j.at("frame_rate").get<double>();
    const auto &rows = j.at("values");
    const std::size_t cols = rows.empty() ? 0 : rows[0].size();
    s.values = Matrix<double>(rows.size(), cols);
    for (std::size_t t = 0; t < rows.size(); ++t) {
      if (rows[t].size() != cols)
        throw ParseError("score matrix rows have unequal width");
      for (std::size_t c = 0; c < cols; ++c)
        s.values(t, c) = rows[t][c].get<double>();
    }
    return s;
  } catch (const nlohmann::json::exception &e) {
    throw ParseError(std::string("score matrix json: ") + e.what());
  }
}

double CostMatrix::Evaluate(const Assignment &assignment) const {
  double sum = 0.0;
  for (std::size_t u = 0; u < assignment.channel_of.size(); ++u)
    sum += delta(u, assignment.channel_of[u]);
  return baseline + sum;
}

namespace {

CostMatrix Baseline(const ScoreMatrix &scores, std::size_t num_utterances) {
  CostMatrix cost;
  cost.num_frames = static_cast<int64_t>(scores.num_frames());
  cost.delta = Matrix<double>(num_utterances, scores.num_channels(), 0.0);
  for (double p : scores.values.data()) cost.baseline += Bce(0.0, p);
  return cost;
}

// BCE(1, p) - BCE(0, p) = log((1 - p) / p).
double ActiveDelta(double p) {
  p = ClampProbability(p);
  return std::log1p(-p) - std::log(p);
}

}  // namespace

CostMatrix ComputeCostMatrix(const LabelMatrix &labels,
                             const ScoreMatrix &scores) {
  if (labels.kind != LabelKind::kVad)
    throw InvalidInput("cost matrix needs VAD labels");
  if (labels.values.rows() != scores.num_frames())
    throw InvalidInput("labels have " + std::to_string(labels.values.rows()) +
                       " frames, scores have " +
                       std::to_string(scores.num_frames()));
  CostMatrix cost = Baseline(scores, labels.values.cols());
  const std::size_t num_channels = scores.num_channels();
  for (std::size_t t = 0; t < labels.values.rows(); ++t) {
    auto row = labels.values.row(t);
    for (std::size_t u = 0; u < row.size(); ++u) {
      if (!row[u]) continue;
      for (std::size_t c = 0; c < num_channels; ++c)
        cost.delta(u, c) += ActiveDelta(scores.values(t, c));
    }
  }
  return cost;
}

CostMatrix ComputeCostMatrix(const Timeline &timeline,
                             const ScoreMatrix &scores) {
  if (static_cast<int64_t>(scores.num_frames()) != timeline.total_frames())
    throw InvalidInput("timeline has " + std::to_string(timeline.total_frames()) +
                       " frames, scores have " +
                       std::to_string(scores.num_frames()));
  CostMatrix cost = Baseline(scores, timeline.size());
  const std::size_t num_channels = scores.num_channels();
  for (std::size_t u = 0; u < timeline.size(); ++u)
    for (int64_t t = timeline[u].start; t < timeline[u].end; ++t)
      for (std::size_t c = 0; c < num_channels; ++c)
        cost.delta(u, c) += ActiveDelta(scores.values(t, c));
  return cost;
}

namespace {

void CheckChannels(const CostMatrix &cost, int num_channels) {
  if (num_channels < 1) throw InvalidInput("need at least one channel");
  if (cost.num_channels() != num_channels)
    throw InvalidInput("cost matrix has " + std::to_string(cost.num_channels()) +
                       " channels, requested " + std::to_string(num_channels));
}

void Finalize(AssignmentResult &result, const CostMatrix &cost) {
  const double denom =
      static_cast<double>(cost.num_frames) * cost.num_channels();
  result.loss = denom > 0 ? result.cost / denom : 0.0;
}

class BruteForce {
 public:
  BruteForce(const OverlapGraph &graph, const CostMatrix &cost, int channels)
      : adj_(graph.Adjacency()),
        cost_(cost),
        channels_(channels),
        current_(graph.num_vertices, -1) {}

  // Visits children in ascending channel order, so the first strict minimum
  // found is the lexicographically smallest minimizer.
  void Run(std::size_t u, double partial) {
    ++explored_;
    if (u == current_.size()) {
      if (!found_ || partial < best_cost_) {
        found_ = true;
        best_cost_ = partial;
        best_ = current_;
      }
      return;
    }
    for (int c = 0; c < channels_; ++c) {
      bool ok = true;
      for (int v : adj_[u])
        if (static_cast<std::size_t>(v) < u && current_[v] == c) {
          ok = false;
          break;
        }
      if (!ok) continue;
      current_[u] = c;
      Run(u + 1, partial + cost_.delta(u, c));
    }
    current_[u] = -1;
  }

  bool found_ = false;
  double best_cost_ = 0.0;
  std::vector<int> best_;
  int64_t explored_ = 0;

 private:
  std::vector<std::vector<int>> adj_;
  const CostMatrix &cost_;
  int channels_;
  std::vector<int> current_;
};

}  // namespace

AssignmentResult SolveBruteForce(const OverlapGraph &graph,
                                 const CostMatrix &cost, int num_channels,
                                 const BruteForceOptions &options) {
  CheckChannels(cost, num_channels);
  if (cost.num_utterances() != graph.num_vertices)
    throw InvalidInput("cost matrix and graph sizes differ");
  if (graph.num_vertices > options.max_utterances)
    throw InvalidInput("brute force refused: " +
                       std::to_string(graph.num_vertices) +
                       " utterances exceed the cap of " +
                       std::to_string(options.max_utterances));
  BruteForce search(graph, cost, num_channels);
  search.Run(0, 0.0);
  if (!search.found_)
    throw Infeasible("no proper coloring with " + std::to_string(num_channels) +
                     " channels");
  AssignmentResult result;
  result.assignment = {std::move(search.best_), num_channels};
  result.cost = cost.baseline + search.best_cost_;
  result.explored_states = search.explored_;
  Finalize(result, cost);
  return result;
}

namespace {

constexpr int64_t kFree = -1;

struct Node {
  int parent;  // -1 at the root
  int utterance;
  int channel;
};

struct State {
  std::vector<int64_t> tails;  // end frame of the last utterance per channel
  double cost;
  int node;
};

struct TailsHash {
  std::size_t operator()(const std::vector<int64_t> &v) const {
    std::size_t h = 0xcbf29ce484222325ull;
    for (int64_t x : v) {
      h ^= static_cast<std::size_t>(x) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    }
    return h;
  }
};

// Both chains have equal depth and cover the same utterances. Returns true
// when chain `a` is lexicographically smaller in utterance-index order.
bool LexLess(const std::vector<Node> &nodes, int a, int b) {
  int first_diff = std::numeric_limits<int>::max();
  bool a_smaller = false;
  while (a != b && a >= 0 && b >= 0) {
    const Node &na = nodes[a], &nb = nodes[b];
    if (na.channel != nb.channel && na.utterance < first_diff) {
      first_diff = na.utterance;
      a_smaller = na.channel < nb.channel;
    }
    a = na.parent;
    b = nb.parent;
  }
  return a_smaller;
}

}  // namespace

AssignmentResult SolveDp(const OverlapGraph &graph, const CostMatrix &cost,
                         const Timeline &timeline, int num_channels) {
  CheckChannels(cost, num_channels);
  if (cost.num_utterances() != timeline.size() ||
      graph.num_vertices != timeline.size())
    throw InvalidInput("cost matrix, graph and timeline sizes differ");

  std::vector<Node> nodes;
  std::vector<State> layer{{std::vector<int64_t>(num_channels, kFree), 0.0, -1}};
  int64_t explored = 1;

  for (int u : timeline.start_order()) {
    const int64_t start = timeline[u].start;
    const int64_t end = timeline[u].end;
    std::vector<State> next;
    std::unordered_map<std::vector<int64_t>, std::size_t, TailsHash> index;
    for (State &state : layer) {
      // Tails at or before this start can never overlap anything later.
      for (int64_t &tail : state.tails)
        if (tail != kFree && tail <= start) tail = kFree;
      for (int c = 0; c < num_channels; ++c) {
        if (state.tails[c] != kFree) continue;
        std::vector<int64_t> tails = state.tails;
        tails[c] = end;
        const double new_cost = state.cost + cost.delta(u, c);
        const int node = static_cast<int>(nodes.size());
        nodes.push_back({state.node, u, c});
        auto [it, inserted] = index.try_emplace(tails, next.size());
        if (inserted) {
          next.push_back({std::move(tails), new_cost, node});
          continue;
        }
        State &existing = next[it->second];
        if (new_cost < existing.cost ||
            (new_cost == existing.cost && LexLess(nodes, node, existing.node))) {
          existing.cost = new_cost;
          existing.node = node;
        }
      }
    }
    if (next.empty())
      throw Infeasible("utterance " + std::to_string(u + 1) +
                           " has no free channel among " +
                           std::to_string(num_channels),
                       MaxClique(timeline));
    explored += static_cast<int64_t>(next.size());
    layer = std::move(next);
  }

  const State *best = &layer.front();
  for (const State &s : layer)
    if (s.cost < best->cost ||
        (s.cost == best->cost && LexLess(nodes, s.node, best->node)))
      best = &s;

  AssignmentResult result;
  result.assignment = {std::vector<int>(timeline.size(), -1), num_channels};
  for (int n = best->node; n >= 0; n = nodes[n].parent)
    result.assignment.channel_of[nodes[n].utterance] = nodes[n].channel;
  result.cost = cost.baseline + best->cost;
  result.explored_states = explored;
  Finalize(result, cost);
  if (!IsValidAssignment(graph, result.assignment))
    throw ConstraintViolation("graph does not match timeline overlaps");
  return result;
}

Solver SolverFromString(const std::string &s) {
  if (s == "dp") return Solver::kDp;
  if (s == "brute") return Solver::kBruteForce;
  throw InvalidInput("unknown solver '" + s + "' (expected dp or brute)");
}

VadLossResult GraphPitVadLoss(const LabelMatrix &labels,
                              const ScoreMatrix &scores,
                              const Timeline &timeline, int num_channels,
                              Solver solver) {
  if (labels.values.cols() != timeline.size())
    throw InvalidInput("label matrix does not match the timeline");
  const CostMatrix cost = ComputeCostMatrix(labels, scores);
  const OverlapGraph graph = BuildOverlapGraph(timeline);
  VadLossResult result;
  if (solver == Solver::kDp) {
    result.details = SolveDp(graph, cost, timeline, num_channels);
  } else {
    try {
      result.details = SolveBruteForce(graph, cost, num_channels);
    } catch (const Infeasible &e) {
      throw Infeasible(e.what(), MaxClique(timeline));
    }
  }
  result.loss = result.details.loss;
  result.optimal = result.details.assignment;
  return result;
}

}  // namespace uttdiar
