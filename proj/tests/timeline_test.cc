// timeline_test.cc

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

#include <algorithm>
#include <numeric>

#include "doctest.h"
#include "json.hpp"
#include "test_util.h"
#include "uttdiar/timeline.h"

namespace uttdiar {
namespace {

using testing::Engine;

Timeline Make(std::vector<std::pair<int64_t, int64_t>> spans, int64_t total = 1000) {
  std::vector<Utterance> utts;
  for (std::size_t i = 0; i < spans.size(); ++i)
    utts.push_back({static_cast<int>(i) + 1, spans[i].first, spans[i].second,
                    "spk" + std::to_string(i % 3 + 1)});
  return Timeline(std::move(utts), total, 100.0);
}

// Five utterances by three speakers where consecutive turns overlap.
Timeline ChainMeeting() {
  std::vector<Utterance> utts = {{1, 0, 100, "A"},
                                 {2, 80, 200, "B"},
                                 {3, 180, 260, "C"},
                                 {4, 250, 350, "A"},
                                 {5, 340, 420, "B"}};
  return Timeline(utts, 500, 100.0);
}

int FrameCountConcurrency(const Timeline &tl) {
  int best = 0;
  for (int64_t t = 0; t < tl.total_frames(); ++t) {
    int n = 0;
    for (const auto &u : tl.utterances()) n += (u.start <= t && t < u.end);
    best = std::max(best, n);
  }
  return best;
}

TEST_CASE("timeline construction rejects malformed utterances") {
  CHECK_THROWS_AS(Make({{5, 5}}), InvalidInput);
  CHECK_THROWS_AS(Make({{-1, 5}}), InvalidInput);
  CHECK_THROWS_AS(Make({{0, 1001}}), InvalidInput);
  CHECK_THROWS_AS(Timeline({{1, 0, 5, {}}, {1, 6, 9, {}}}, 10, 100.0), InvalidInput);
  CHECK_THROWS_AS(Timeline({{2, 0, 5, {}}}, 10, 100.0), InvalidInput);
  CHECK_THROWS_AS(Timeline({}, 10, 0.0), InvalidInput);
  // Input order does not matter; storage is by id.
  Timeline tl({{2, 10, 20, {}}, {1, 0, 5, {}}}, 30, 100.0);
  CHECK(tl[0].id == 1);
  CHECK(tl.start_order() == std::vector<int>{0, 1});
}

TEST_CASE("overlap graph on small cases") {
  CHECK(BuildOverlapGraph(Make({{0, 10}, {5, 15}, {20, 30}})).edges ==
        std::vector<std::pair<int, int>>{{0, 1}});
  CHECK(BuildOverlapGraph(Make({{0, 10}})).edges.empty());
  CHECK(BuildOverlapGraph(Timeline({}, 10, 100.0)).num_vertices == 0);
  // Touching intervals do not overlap.
  CHECK(BuildOverlapGraph(Make({{0, 10}, {10, 20}})).edges.empty());
}

TEST_CASE("overlap graph matches the pairwise oracle") {
  Engine eng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const Timeline tl = testing::RandomTimeline(eng, 100, 5000, 300);
    CHECK(BuildOverlapGraph(tl).edges == testing::PairwiseEdges(tl));
  }
}

TEST_CASE("overlap graph is invariant under relabeling") {
  Engine eng(12);
  for (int trial = 0; trial < 30; ++trial) {
    const Timeline tl = testing::RandomTimeline(eng, 30, 1000, 120);
    std::vector<int> perm(tl.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), eng);
    // Utterance i gets new id perm[i] + 1.
    std::vector<Utterance> relabeled;
    for (std::size_t i = 0; i < tl.size(); ++i) {
      Utterance u = tl[i];
      u.id = perm[i] + 1;
      relabeled.push_back(u);
    }
    const OverlapGraph g = BuildOverlapGraph(tl);
    const OverlapGraph h =
        BuildOverlapGraph(Timeline(relabeled, tl.total_frames(), tl.frame_rate()));
    std::vector<std::pair<int, int>> mapped;
    for (auto [a, b] : g.edges)
      mapped.emplace_back(std::min(perm[a], perm[b]), std::max(perm[a], perm[b]));
    std::sort(mapped.begin(), mapped.end());
    CHECK(h.edges == mapped);
  }
}

TEST_CASE("assignment validity") {
  const OverlapGraph g = BuildOverlapGraph(Make({{0, 10}, {5, 15}}));
  CHECK(IsValidAssignment(g, {{0, 1}, 2}));
  CHECK_FALSE(IsValidAssignment(g, {{0, 0}, 2}));
  CHECK_THROWS_AS(IsValidAssignment(g, {{0}, 2}), InvalidInput);
  CHECK_THROWS_AS(IsValidAssignment(g, {{0, 2}, 2}), InvalidInput);

  Engine eng(13);
  for (int trial = 0; trial < 200; ++trial) {
    const Timeline tl = testing::RandomTimeline(eng, 12, 300, 60);
    std::vector<int> ch(tl.size());
    for (int &c : ch) c = testing::RandInt(eng, 0, 2);
    CHECK(IsValidAssignment(BuildOverlapGraph(tl), {ch, 3}) ==
          testing::ProperColoring(tl, ch));
  }
}

TEST_CASE("max concurrency") {
  CHECK(MaxConcurrency(Make({{0, 10}, {5, 15}, {12, 20}})) == 2);
  CHECK(MaxConcurrency(ChainMeeting()) == 2);
  CHECK(MaxConcurrency(Timeline({}, 10, 100.0)) == 0);
  Engine eng(14);
  for (int trial = 0; trial < 100; ++trial) {
    const Timeline tl = testing::RandomTimeline(eng, 20, 400, 80);
    const int k = MaxConcurrency(tl);
    CHECK(k == FrameCountConcurrency(tl));
    const auto clique = MaxClique(tl);
    CHECK(static_cast<int>(clique.size()) == k);
    for (std::size_t i = 0; i < clique.size(); ++i)
      for (std::size_t j = i + 1; j < clique.size(); ++j)
        CHECK(testing::PairOverlaps(tl[clique[i]], tl[clique[j]]));
  }
}

TEST_CASE("rendering references") {
  const Timeline disjoint = Make({{0, 3}, {5, 8}}, 10);
  Matrix<uint8_t> one = RenderReference(disjoint, {{0, 0}, 1}, LabelKind::kVad);
  CHECK(one.cols() == 1);
  CHECK(std::accumulate(one.data().begin(), one.data().end(), 0) == 6);
  CHECK(one(4, 0) == 0);
  Matrix<uint8_t> ubd = RenderReference(disjoint, {{0, 0}, 1}, LabelKind::kUbd);
  CHECK(ubd(0, 0) == 1);
  CHECK(ubd(5, 0) == 1);
  CHECK(std::accumulate(ubd.data().begin(), ubd.data().end(), 0) == 2);

  const Timeline pair = Make({{0, 6}, {4, 10}}, 10);
  CHECK_THROWS_AS(RenderReference(pair, {{0, 0}, 2}, LabelKind::kVad),
                  ConstraintViolation);
  Matrix<uint8_t> two = RenderReference(pair, {{0, 1}, 2}, LabelKind::kVad);
  CHECK(two(5, 0) == 1);
  CHECK(two(5, 1) == 1);
  CHECK(two(7, 0) == 0);
}

TEST_CASE("rendering equals the label-matrix product") {
  Engine eng(15);
  for (int trial = 0; trial < 100; ++trial) {
    const Timeline tl = testing::RandomCappedTimeline(eng, 10, 200, 40, 3);
    const Assignment a = FirstFitAssignment(tl, 3);
    for (LabelKind kind : {LabelKind::kVad, LabelKind::kUbd}) {
      const LabelMatrix y = MakeLabels(tl, kind);
      Matrix<int> product(tl.total_frames(), 3, 0);
      for (int64_t t = 0; t < tl.total_frames(); ++t)
        for (std::size_t u = 0; u < tl.size(); ++u)
          product(t, a.channel_of[u]) += y.values(t, u);
      const Matrix<uint8_t> grid = RenderReference(tl, a, kind);
      bool same = true;
      for (std::size_t i = 0; i < grid.data().size(); ++i) {
        same = same && product.data()[i] == grid.data()[i];
        CHECK(grid.data()[i] <= 1);
      }
      CHECK(same);
    }
    // An invalid assignment stacks two utterances somewhere.
    const OverlapGraph g = BuildOverlapGraph(tl);
    if (!g.edges.empty()) {
      Assignment bad = a;
      auto [u, v] = g.edges.front();
      bad.channel_of[v] = bad.channel_of[u];
      const LabelMatrix y = MakeLabels(tl, LabelKind::kVad);
      int peak = 0;
      for (int64_t t = 0; t < tl.total_frames(); ++t) {
        std::vector<int> col(3, 0);
        for (std::size_t w = 0; w < tl.size(); ++w) col[bad.channel_of[w]] += y.values(t, w);
        peak = std::max(peak, *std::max_element(col.begin(), col.end()));
      }
      CHECK(peak >= 2);
    }
  }
}

TEST_CASE("a proper coloring exists exactly when concurrency fits") {
  Engine eng(16);
  for (int trial = 0; trial < 150; ++trial) {
    const int n = testing::RandInt(eng, 1, 8);
    const Timeline tl = testing::RandomTimeline(eng, n, 100, 40);
    for (int c = 1; c <= 3; ++c) {
      bool exists = false;
      testing::ForEachChannelVector(tl.size(), c, [&](const std::vector<int> &v) {
        exists = exists || testing::ProperColoring(tl, v);
      });
      CHECK(exists == (MaxConcurrency(tl) <= c));
      if (exists) {
        CHECK(IsValidAssignment(BuildOverlapGraph(tl), FirstFitAssignment(tl, c)));
      } else {
        CHECK_THROWS_AS(FirstFitAssignment(tl, c), Infeasible);
      }
    }
  }
}

TEST_CASE("overlap ratio") {
  CHECK(OverlapRatio(Make({{0, 10}})) == 0.0);
  CHECK(OverlapRatio(Timeline({}, 10, 100.0)) == 0.0);
  // Speech [0,15), overlapped [5,10).
  CHECK(OverlapRatio(Make({{0, 10}, {5, 15}})) == doctest::Approx(5.0 / 15.0));
}

TEST_CASE("timeline json round trip") {
  Engine eng(17);
  const Timeline tl = testing::RandomTimeline(eng, 25, 900, 100);
  CHECK(TimelineFromJson(TimelineToJson(tl)) == tl);
  const auto j = nlohmann::json::parse(
      R"({"total_frames": 20, "frame_rate": 50, "utterances": [{"id":1,"start":2,"end":7,"speaker":"spk1"}]})");
  const Timeline parsed = TimelineFromJson(j);
  CHECK(parsed.frame_rate() == 50.0);
  CHECK(parsed[0].speaker == std::optional<std::string>("spk1"));
  CHECK_THROWS(TimelineFromJson(nlohmann::json::parse(R"({"utterances": 3})")));
  CHECK(LabelKindFromString("ubd") == LabelKind::kUbd);
  CHECK_THROWS_AS(LabelKindFromString("x"), InvalidInput);
}

}  // namespace
}  // namespace uttdiar
