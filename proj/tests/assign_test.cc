// assign_test.cc

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
#include <cmath>
#include <limits>
#include <numeric>

#include "doctest.h"
#include "test_util.h"
#include "uttdiar/assign.h"

namespace uttdiar {
namespace {

using testing::Engine;

// Independent minimum: enumerate all C^U vectors, filter proper colorings
// pairwise, evaluate the full BCE. Returns (cost, first minimizer).
std::pair<double, std::vector<int>> Exhaustive(const Timeline &tl,
                                               const ScoreMatrix &scores, int C) {
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> arg;
  testing::ForEachChannelVector(tl.size(), C, [&](const std::vector<int> &v) {
    if (!testing::ProperColoring(tl, v)) return;
    const double cost = testing::FullBce(tl, v, scores);
    if (cost < best - 1e-9) {
      best = cost;
      arg = v;
    }
  });
  return {best, arg};
}

TEST_CASE("clamping and elementwise bce") {
  CHECK(ClampProbability(0.0) == kClampEpsilon);
  CHECK(ClampProbability(1.0) == 1.0 - kClampEpsilon);
  CHECK(ClampProbability(0.3) == 0.3);
  CHECK(Bce(1.0, 0.5) == doctest::Approx(std::log(2.0)));
  CHECK(std::isfinite(Bce(1.0, 0.0)));
}

TEST_CASE("score csv round trip and errors") {
  Engine eng(21);
  const ScoreMatrix s = testing::RandomScores(eng, 17, 3);
  const ScoreMatrix back = ParseScoreCsv(FormatScoreCsv(s), LabelKind::kVad, 100.0);
  CHECK(back.values == s.values);
  CHECK(ScoreMatrixFromJson(ScoreMatrixToJson(s)).values == s.values);
  try {
    ParseScoreCsv("0.1,0.2\n0.3\n", LabelKind::kVad, 100.0);
    FAIL("expected a parse error");
  } catch (const ParseError &e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(ParseScoreCsv("0.1,abc\n", LabelKind::kVad, 100.0), ParseError);
}

TEST_CASE("cost matrix small cases") {
  const Timeline tl({{1, 0, 4, {}}, {2, 2, 6, {}}}, 8, 100.0);
  ScoreMatrix half{LabelKind::kVad, 100.0, Matrix<double>(8, 2, 0.5)};
  const CostMatrix flat = ComputeCostMatrix(tl, half);
  for (double d : flat.delta.data()) CHECK(std::abs(d) < 1e-12);
  CHECK(flat.baseline == doctest::Approx(16 * std::log(2.0)));

  // Posteriors matching assignment (0, 1) at 0.99 / 0.01.
  const Matrix<uint8_t> ref = RenderReference(tl, {{0, 1}, 2}, LabelKind::kVad);
  ScoreMatrix match{LabelKind::kVad, 100.0, Matrix<double>(8, 2)};
  for (std::size_t i = 0; i < ref.data().size(); ++i)
    match.values.data()[i] = ref.data()[i] ? 0.99 : 0.01;
  const CostMatrix cm = ComputeCostMatrix(tl, match);
  CHECK(cm.delta(0, 0) < 0);
  CHECK(cm.delta(0, 1) > 0);
  CHECK(cm.delta(1, 1) < 0);
  CHECK(cm.delta(1, 0) > 0);

  ScoreMatrix wrong{LabelKind::kVad, 100.0, Matrix<double>(7, 2, 0.5)};
  CHECK_THROWS_AS(ComputeCostMatrix(tl, wrong), InvalidInput);
}

TEST_CASE("decomposition equals full bce for valid assignments") {
  Engine eng(22);
  for (int trial = 0; trial < 50; ++trial) {
    const int C = testing::RandInt(eng, 2, 3);
    const Timeline tl = testing::RandomCappedTimeline(eng, 8, 120, 40, C);
    const ScoreMatrix s = testing::RandomScores(eng, 120, C);
    const CostMatrix grid_cost = ComputeCostMatrix(MakeLabels(tl, LabelKind::kVad), s);
    const CostMatrix span_cost = ComputeCostMatrix(tl, s);
    CHECK(grid_cost.baseline == doctest::Approx(span_cost.baseline).epsilon(1e-12));
    int sampled = 0;
    testing::ForEachChannelVector(tl.size(), C, [&](const std::vector<int> &v) {
      if (sampled >= 50 || !testing::ProperColoring(tl, v)) return;
      ++sampled;
      const double full = testing::FullBce(tl, v, s);
      CHECK(std::abs(grid_cost.Evaluate({v, C}) - full) < 1e-9);
      CHECK(std::abs(span_cost.Evaluate({v, C}) - full) < 1e-9);
    });
  }
}

TEST_CASE("brute force basics") {
  const Timeline pair({{1, 0, 4, {}}, {2, 2, 6, {}}}, 8, 100.0);
  ScoreMatrix half{LabelKind::kVad, 100.0, Matrix<double>(8, 2, 0.5)};
  const CostMatrix cm = ComputeCostMatrix(pair, half);
  const OverlapGraph g = BuildOverlapGraph(pair);
  CHECK(SolveBruteForce(g, cm, 2).assignment.channel_of == std::vector<int>{0, 1});
  CHECK(SolveDp(g, cm, pair, 2).assignment.channel_of == std::vector<int>{0, 1});

  const Timeline triple({{1, 0, 6, {}}, {2, 1, 6, {}}, {3, 2, 6, {}}}, 8, 100.0);
  const CostMatrix tc = ComputeCostMatrix(triple, half);
  const OverlapGraph tg = BuildOverlapGraph(triple);
  CHECK_THROWS_AS(SolveBruteForce(tg, tc, 2), Infeasible);
  try {
    SolveDp(tg, tc, triple, 2);
    FAIL("expected infeasible");
  } catch (const Infeasible &e) {
    CHECK(e.clique() == std::vector<int>{0, 1, 2});
  }

  Engine eng(23);
  const Timeline big = testing::RandomTimeline(eng, 13, 500, 10);
  const ScoreMatrix s = testing::RandomScores(eng, 500, 2);
  CHECK_THROWS_AS(SolveBruteForce(BuildOverlapGraph(big), ComputeCostMatrix(big, s), 2),
                  InvalidInput);
}

TEST_CASE("solvers match the independent exhaustive oracle") {
  Engine eng(24);
  for (int trial = 0; trial < 80; ++trial) {
    const int C = testing::RandInt(eng, 2, 3);
    const int n = testing::RandInt(eng, 1, 8);
    const Timeline tl = testing::RandomCappedTimeline(eng, n, 80, 30, C);
    const ScoreMatrix s = testing::RandomScores(eng, 80, C);
    const auto [best, arg] = Exhaustive(tl, s, C);
    const CostMatrix cm = ComputeCostMatrix(tl, s);
    const OverlapGraph g = BuildOverlapGraph(tl);
    const AssignmentResult bf = SolveBruteForce(g, cm, C);
    const AssignmentResult dp = SolveDp(g, cm, tl, C);
    CHECK(std::abs(bf.cost - best) < 1e-9);
    CHECK(std::abs(dp.cost - best) < 1e-9);
    CHECK(std::abs(dp.loss - bf.loss) < 1e-9);
    CHECK(bf.loss == doctest::Approx(bf.cost / (80.0 * C)));
    CHECK(testing::ProperColoring(tl, dp.assignment.channel_of));
    CHECK(testing::ProperColoring(tl, bf.assignment.channel_of));
  }
}

TEST_CASE("ties resolve to the lexicographically smallest vector") {
  // Uniform posteriors make every proper coloring optimal.
  Engine eng(25);
  for (int trial = 0; trial < 40; ++trial) {
    const int C = testing::RandInt(eng, 2, 3);
    const Timeline tl = testing::RandomCappedTimeline(eng, 7, 60, 25, C);
    ScoreMatrix s{LabelKind::kVad, 100.0, Matrix<double>(60, C, 0.5)};
    std::vector<int> first;
    testing::ForEachChannelVector(tl.size(), C, [&](const std::vector<int> &v) {
      if (first.empty() && testing::ProperColoring(tl, v)) first = v;
    });
    const CostMatrix cm = ComputeCostMatrix(tl, s);
    const OverlapGraph g = BuildOverlapGraph(tl);
    CHECK(SolveBruteForce(g, cm, C).assignment.channel_of == first);
    CHECK(SolveDp(g, cm, tl, C).assignment.channel_of == first);
  }
}

TEST_CASE("chain of consecutive overlaps") {
  std::vector<Utterance> utts;
  for (int i = 0; i < 20; ++i) utts.push_back({i + 1, i * 10, i * 10 + 15, {}});
  const Timeline chain(utts, 220, 100.0);
  Engine eng(26);
  const ScoreMatrix s = testing::RandomScores(eng, 220, 2);
  const CostMatrix cm = ComputeCostMatrix(chain, s);
  const AssignmentResult dp = SolveDp(BuildOverlapGraph(chain), cm, chain, 2);
  CHECK(testing::ProperColoring(chain, dp.assignment.channel_of));
  for (int n = 1; n <= 12; ++n) {
    const Timeline prefix(std::vector<Utterance>(utts.begin(), utts.begin() + n), 220,
                          100.0);
    const CostMatrix pc = ComputeCostMatrix(prefix, s);
    const OverlapGraph pg = BuildOverlapGraph(prefix);
    CHECK(std::abs(SolveDp(pg, pc, prefix, 2).cost -
                   SolveBruteForce(pg, pc, 2).cost) < 1e-9);
  }
}

TEST_CASE("single utterance takes the cheapest channel") {
  const Timeline one({{1, 3, 9, {}}}, 12, 100.0);
  Engine eng(27);
  const ScoreMatrix s = testing::RandomScores(eng, 12, 3);
  const CostMatrix cm = ComputeCostMatrix(one, s);
  int arg = 0;
  for (int c = 1; c < 3; ++c)
    if (cm.delta(0, c) < cm.delta(0, arg)) arg = c;
  CHECK(SolveDp(BuildOverlapGraph(one), cm, one, 3).assignment.channel_of[0] == arg);
}

TEST_CASE("channel permutation equivariance") {
  Engine eng(28);
  for (int trial = 0; trial < 40; ++trial) {
    const int C = 3;
    const Timeline tl = testing::RandomCappedTimeline(eng, 8, 90, 30, C);
    const ScoreMatrix s = testing::RandomScores(eng, 90, C);
    std::vector<int> perm = {0, 1, 2};
    std::shuffle(perm.begin(), perm.end(), eng);
    // Column c of the permuted matrix is column perm[c] of the original.
    ScoreMatrix p = s;
    for (std::size_t t = 0; t < 90; ++t)
      for (int c = 0; c < C; ++c) p.values(t, c) = s.values(t, perm[c]);
    const OverlapGraph g = BuildOverlapGraph(tl);
    const AssignmentResult a = SolveDp(g, ComputeCostMatrix(tl, s), tl, C);
    const AssignmentResult b = SolveDp(g, ComputeCostMatrix(tl, p), tl, C);
    CHECK(a.cost == doctest::Approx(b.cost).epsilon(1e-12));
    // Identical intervals may swap channels, so compare rendered references.
    const Matrix<uint8_t> ra = RenderReference(tl, a.assignment, LabelKind::kVad);
    const Matrix<uint8_t> rb = RenderReference(tl, b.assignment, LabelKind::kVad);
    bool same = true;
    for (std::size_t t = 0; t < 90; ++t)
      for (int c = 0; c < C; ++c) same = same && rb(t, c) == ra(t, perm[c]);
    CHECK(same);
  }
}

TEST_CASE("adding a channel never hurts beyond its baseline") {
  Engine eng(29);
  for (int trial = 0; trial < 40; ++trial) {
    const Timeline tl = testing::RandomCappedTimeline(eng, 8, 90, 30, 2);
    const ScoreMatrix s3 = testing::RandomScores(eng, 90, 3);
    ScoreMatrix s2{LabelKind::kVad, 100.0, Matrix<double>(90, 2)};
    double extra_baseline = 0.0;
    for (std::size_t t = 0; t < 90; ++t) {
      s2.values(t, 0) = s3.values(t, 0);
      s2.values(t, 1) = s3.values(t, 1);
      extra_baseline += Bce(0.0, s3.values(t, 2));
    }
    const OverlapGraph g = BuildOverlapGraph(tl);
    const double c2 = SolveDp(g, ComputeCostMatrix(tl, s2), tl, 2).cost;
    const double c3 = SolveDp(g, ComputeCostMatrix(tl, s3), tl, 3).cost;
    CHECK(c3 <= c2 + extra_baseline + 1e-9);
  }
}

TEST_CASE("graph pit vad loss") {
  Engine eng(30);
  const Timeline tl = testing::RandomCappedTimeline(eng, 8, 100, 30, 2);
  const LabelMatrix y = MakeLabels(tl, LabelKind::kVad);

  ScoreMatrix half{LabelKind::kVad, 100.0, Matrix<double>(100, 2, 0.5)};
  CHECK(std::abs(GraphPitVadLoss(y, half, tl, 2).loss - std::log(2.0)) < 1e-12);

  const Assignment truth = FirstFitAssignment(tl, 2);
  const Matrix<uint8_t> ref = RenderReference(tl, truth, LabelKind::kVad);
  ScoreMatrix sat{LabelKind::kVad, 100.0, Matrix<double>(100, 2)};
  for (std::size_t i = 0; i < ref.data().size(); ++i)
    sat.values.data()[i] = ref.data()[i] ? 1.0 - kClampEpsilon : kClampEpsilon;
  const VadLossResult perfect = GraphPitVadLoss(y, sat, tl, 2);
  CHECK(perfect.loss == doctest::Approx(-std::log(1.0 - kClampEpsilon)).epsilon(1e-6));
  CHECK(RenderReference(tl, perfect.optimal, LabelKind::kVad) == ref);

  for (int trial = 0; trial < 30; ++trial) {
    const Timeline r = testing::RandomCappedTimeline(eng, 7, 70, 30, 3);
    const ScoreMatrix s = testing::RandomScores(eng, 70, 3);
    const auto [best, arg] = Exhaustive(r, s, 3);
    const LabelMatrix ry = MakeLabels(r, LabelKind::kVad);
    const double oracle = best / (70.0 * 3);
    CHECK(std::abs(GraphPitVadLoss(ry, s, r, 3, Solver::kBruteForce).loss - oracle) < 1e-12);
    CHECK(std::abs(GraphPitVadLoss(ry, s, r, 3, Solver::kDp).loss - oracle) < 1e-12);
  }
  CHECK(SolverFromString("brute") == Solver::kBruteForce);
  CHECK_THROWS_AS(SolverFromString("greedy"), InvalidInput);
}

TEST_CASE("dp keeps the state space small on long sparse meetings") {
  Engine eng(31);
  std::vector<Utterance> utts;
  int64_t clock = 0;
  for (int i = 0; i < 300; ++i) {
    const int64_t len = testing::RandInt(eng, 50, 300);
    utts.push_back({i + 1, clock, clock + len, {}});
    clock += testing::RandInt(eng, 100, 300);  // <= 3 starts per 300 frames
  }
  const Timeline tl(utts, clock + 400, 100.0);
  REQUIRE(MaxConcurrency(tl) <= 3);
  const ScoreMatrix s = testing::RandomScores(eng, clock + 400, 3);
  const AssignmentResult dp = SolveDp(BuildOverlapGraph(tl), ComputeCostMatrix(tl, s), tl, 3);
  CHECK(testing::ProperColoring(tl, dp.assignment.channel_of));
  // Per step at most C! orderings times the tail combinations of U-1 earlier
  // utterances; in practice far fewer.
  CHECK(dp.explored_states < 300 * 6 * 50);
}

}  // namespace
}  // namespace uttdiar
