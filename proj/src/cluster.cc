// cluster.cc

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

#include "uttdiar/cluster.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>

#include "csv_util.h"
#include "json.hpp"

namespace uttdiar {

namespace {

// Embedding files are large (T*C*L values); 7 significant digits keep them
// manageable.
constexpr int kEmbeddingDigits = 7;

}  // namespace

FrameEmbeddings::FrameEmbeddings(std::size_t num_frames,
                                 std::size_t num_channels, std::size_t dim)
    : frames_(num_frames),
      channels_(num_channels),
      dim_(dim),
      values_(num_frames * num_channels * dim, 0.0) {
  if (dim == 0) throw InvalidInput("embedding dimension must be >= 1");
}

std::string SidecarPath(const std::string &csv_path) {
  const auto dot = csv_path.rfind('.');
  const auto slash = csv_path.rfind('/');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
    return csv_path + ".json";
  return csv_path.substr(0, dot) + ".json";
}

FrameEmbeddings ReadFrameEmbeddings(const std::string &csv_path,
                                    const std::string &sidecar_path) {
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(internal::ReadFile(sidecar_path));
  } catch (const nlohmann::json::exception &e) {
    throw ParseError(sidecar_path + ": " + e.what());
  }
  std::size_t T = 0, C = 0, L = 0;
  try {
    T = meta.at("T").get<std::size_t>();
    C = meta.at("C").get<std::size_t>();
    L = meta.at("L").get<std::size_t>();
  } catch (const nlohmann::json::exception &e) {
    throw ParseError(sidecar_path + ": " + e.what());
  }
  Matrix<double> m;
  try {
    m = internal::ParseCsvMatrix(internal::ReadFile(csv_path));
  } catch (const ParseError &e) {
    throw ParseError(csv_path + ": " + e.what());
  }
  if (m.rows() != T * C || (T * C > 0 && m.cols() != L))
    throw ParseError(csv_path + ": shape does not match sidecar");
  FrameEmbeddings emb(T, C, L);
  for (std::size_t c = 0; c < C; ++c)
    for (std::size_t t = 0; t < T; ++t) {
      auto dst = emb.at(t, c);
      auto src = m.row(c * T + t);
      std::copy(src.begin(), src.end(), dst.begin());
    }
  return emb;
}

void WriteFrameEmbeddings(const std::string &csv_path,
                          const std::string &sidecar_path,
                          const FrameEmbeddings &embeddings) {
  std::string out;
  out.reserve(embeddings.values().size() * 12);
  for (std::size_t c = 0; c < embeddings.num_channels(); ++c)
    for (std::size_t t = 0; t < embeddings.num_frames(); ++t) {
      auto v = embeddings.at(t, c);
      for (std::size_t l = 0; l < v.size(); ++l) {
        if (l) out.push_back(',');
        internal::AppendDouble(out, v[l], kEmbeddingDigits);
      }
      out.push_back('\n');
    }
  internal::WriteFile(csv_path, out);
  const nlohmann::json meta = {{"T", embeddings.num_frames()},
                               {"C", embeddings.num_channels()},
                               {"L", embeddings.dim()}};
  internal::WriteFile(sidecar_path, meta.dump() + "\n");
}

UtteranceEmbedding AggregateEmbedding(const FrameEmbeddings &frames,
                                      const ScoreMatrix &vad_scores,
                                      const DecodedUtterance &utterance) {
  if (utterance.start < 0 || utterance.end <= utterance.start ||
      static_cast<std::size_t>(utterance.end) > frames.num_frames() ||
      static_cast<std::size_t>(utterance.end) > vad_scores.num_frames())
    throw InvalidInput("utterance span outside the embedding grid");
  if (utterance.channel < 0 ||
      static_cast<std::size_t>(utterance.channel) >= frames.num_channels() ||
      static_cast<std::size_t>(utterance.channel) >= vad_scores.num_channels())
    throw InvalidInput("utterance channel out of range");
  std::vector<double> sum(frames.dim(), 0.0);
  for (int64_t t = utterance.start; t < utterance.end; ++t) {
    const double w = vad_scores.values(t, utterance.channel);
    auto e = frames.at(t, utterance.channel);
    for (std::size_t l = 0; l < sum.size(); ++l) sum[l] += w * e[l];
  }
  double norm = 0.0;
  for (double x : sum) norm += x * x;
  norm = std::sqrt(norm);
  if (!(norm > 1e-12) || !std::isfinite(norm))
    throw DegenerateEmbedding("weighted embedding sum vanishes for utterance " +
                              std::to_string(utterance.id));
  for (double &x : sum) x /= norm;
  return {utterance.id, std::move(sum)};
}

CannotLinkSet DeriveCannotLinks(const std::vector<DecodedUtterance> &utterances) {
  CannotLinkSet links;
  std::vector<const DecodedUtterance *> order;
  for (const auto &u : utterances) order.push_back(&u);
  std::sort(order.begin(), order.end(), [](auto *a, auto *b) {
    return a->start < b->start;
  });
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (std::size_t j = i + 1; j < order.size() && order[j]->start < order[i]->end;
         ++j) {
      const auto &a = *order[i];
      const auto &b = *order[j];
      if (a.channel != b.channel && Overlaps(a.start, a.end, b.start, b.end))
        links.emplace(std::min(a.id, b.id), std::max(a.id, b.id));
    }
  }
  return links;
}

ClusterResult Cluster(const std::vector<UtteranceEmbedding> &embeddings,
                      const CannotLinkSet &constraints,
                      const ClusterConfig &config) {
  const std::size_t n = embeddings.size();
  if (n == 0) throw InvalidInput("cannot cluster an empty embedding list");
  if (config.num_speakers && *config.num_speakers < 1)
    throw InvalidInput("num_speakers must be >= 1");

  std::map<int, std::size_t> index_of;
  for (std::size_t i = 0; i < n; ++i) index_of[embeddings[i].utterance_id] = i;

  // Slot i holds the cluster whose smallest member index is i.
  std::vector<std::vector<double>> dist(n, std::vector<double>(n, 0.0));
  std::vector<std::vector<char>> forbidden(n, std::vector<char>(n, 0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      double sq = 0.0;
      const auto &a = embeddings[i].vector, &b = embeddings[j].vector;
      if (a.size() != b.size()) throw InvalidInput("embeddings differ in dimension");
      for (std::size_t k = 0; k < a.size(); ++k) sq += (a[k] - b[k]) * (a[k] - b[k]);
      dist[i][j] = dist[j][i] = std::sqrt(sq);
    }
  for (auto [a, b] : constraints) {
    auto ia = index_of.find(a), ib = index_of.find(b);
    if (ia == index_of.end() || ib == index_of.end() || a == b) continue;
    forbidden[ia->second][ib->second] = forbidden[ib->second][ia->second] = 1;
  }

  std::vector<std::size_t> size(n, 1);
  std::vector<std::size_t> owner(n);
  for (std::size_t i = 0; i < n; ++i) owner[i] = i;
  std::vector<char> alive(n, 1);
  std::size_t num_alive = n;
  ClusterResult result;

  while (num_alive > 1) {
    if (config.num_speakers &&
        num_alive <= static_cast<std::size_t>(*config.num_speakers))
      break;
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = n, bj = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (!alive[i]) continue;
      for (std::size_t j = i + 1; j < n; ++j) {
        if (!alive[j] || forbidden[i][j]) continue;
        if (dist[i][j] < best) {
          best = dist[i][j];
          bi = i;
          bj = j;
        }
      }
    }
    if (bi == n) {
      result.constraint_limited = config.num_speakers.has_value();
      break;
    }
    if (!config.num_speakers && !(best < config.stop_threshold)) break;
    // Merge bj into bi (bi < bj keeps the slot at the smallest member).
    for (std::size_t k = 0; k < n; ++k) {
      if (!alive[k] || k == bi || k == bj) continue;
      const double d = (size[bi] * dist[bi][k] + size[bj] * dist[bj][k]) /
                       static_cast<double>(size[bi] + size[bj]);
      dist[bi][k] = dist[k][bi] = d;
      forbidden[bi][k] = forbidden[k][bi] = forbidden[bi][k] || forbidden[bj][k];
    }
    size[bi] += size[bj];
    alive[bj] = 0;
    for (std::size_t m = 0; m < n; ++m)
      if (owner[m] == bj) owner[m] = bi;
    --num_alive;
  }

  std::map<std::size_t, int> label_of_slot;
  result.labels.resize(n);
  for (std::size_t m = 0; m < n; ++m) {
    auto [it, inserted] =
        label_of_slot.try_emplace(owner[m], static_cast<int>(label_of_slot.size()));
    result.labels[m] = it->second;
  }
  result.num_clusters = static_cast<int>(label_of_slot.size());
  return result;
}

Millis FrameToMillis(int64_t frame, double frame_rate) {
  return static_cast<Millis>(
      std::llround(static_cast<double>(frame) * 1000.0 / frame_rate));
}

Diarization AssembleDiarization(const std::vector<DecodedUtterance> &utterances,
                                const std::vector<int> &labels,
                                double frame_rate,
                                const std::string &recording_id) {
  if (labels.size() != utterances.size())
    throw InvalidInput("every utterance needs a speaker label");
  Diarization d(recording_id);
  for (std::size_t i = 0; i < utterances.size(); ++i)
    d.Add("spk" + std::to_string(labels[i] + 1),
          {FrameToMillis(utterances[i].start, frame_rate),
           FrameToMillis(utterances[i].end, frame_rate)});
  return d;
}

}  // namespace uttdiar
