// decoder_test.cc

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

#include "doctest.h"
#include "test_util.h"
#include "uttdiar/decoder.h"

namespace uttdiar {
namespace {

using testing::Engine;

ScoreMatrix Column(std::vector<double> values, LabelKind kind = LabelKind::kVad) {
  ScoreMatrix s{kind, 100.0, Matrix<double>(values.size(), 1)};
  s.values.data() = std::move(values);
  return s;
}

ScoreMatrix Saturated(const Matrix<uint8_t> &grid, LabelKind kind) {
  ScoreMatrix s{kind, 100.0, Matrix<double>(grid.rows(), grid.cols())};
  for (std::size_t i = 0; i < grid.data().size(); ++i)
    s.values.data()[i] = grid.data()[i] ? 1.0 - kClampEpsilon : kClampEpsilon;
  return s;
}

// Timeline whose utterances all exceed the decoder's resolution: >= 11
// frames, so neither the median filter nor peak suppression can drop one.
Timeline DecodableTimeline(Engine &eng, int n, int64_t total, int C) {
  while (true) {
    std::vector<Utterance> utts;
    for (int i = 0; i < n; ++i) {
      const int64_t len = testing::RandInt(eng, 11, 80);
      const int64_t start = testing::RandInt(eng, 0, static_cast<int>(total - len));
      utts.push_back({i + 1, start, start + len, {}});
    }
    Timeline tl(utts, total, 100.0);
    if (MaxConcurrency(tl) <= C) return tl;
  }
}

// Median with edge replication, computed by sorting each window.
Matrix<uint8_t> NaiveBinarize(const ScoreMatrix &s, double thr, int w) {
  const int64_t T = static_cast<int64_t>(s.num_frames());
  Matrix<uint8_t> out(s.num_frames(), s.num_channels(), 0);
  for (std::size_t c = 0; c < s.num_channels(); ++c)
    for (int64_t t = 0; t < T; ++t) {
      std::vector<double> win;
      for (int64_t k = t - w / 2; k <= t + w / 2; ++k)
        win.push_back(s.values(std::min(std::max<int64_t>(k, 0), T - 1), c));
      std::sort(win.begin(), win.end());
      out(t, c) = win[w / 2] >= thr;
    }
  return out;
}

TEST_CASE("binarization") {
  CHECK(BinarizeVad(Column(std::vector<double>(9, 0.9)), 0.5, 3) ==
        Matrix<uint8_t>(9, 1, 1));
  std::vector<double> spike(20, 0.1);
  spike[10] = 0.9;
  CHECK(BinarizeVad(Column(spike), 0.5, 5) == Matrix<uint8_t>(20, 1, 0));
  CHECK_THROWS_AS(BinarizeVad(Column(spike), 0.5, 4), InvalidInput);
  CHECK_THROWS_AS(BinarizeVad(Column(spike), 1.0, 5), InvalidInput);
  // Threshold is inclusive.
  CHECK(BinarizeVad(Column({0.5, 0.5}), 0.5, 1) == Matrix<uint8_t>(2, 1, 1));

  Engine eng(51);
  for (int trial = 0; trial < 40; ++trial) {
    const ScoreMatrix s = testing::RandomScores(eng, 70, 2);
    const int w = 2 * testing::RandInt(eng, 0, 6) + 1;
    const double thr = testing::RandUniform(eng, 0.1, 0.9);
    CHECK(BinarizeVad(s, thr, w) == NaiveBinarize(s, thr, w));
  }
}

TEST_CASE("splitting runs at ubd peaks") {
  Matrix<uint8_t> run(120, 1, 0);
  for (int t = 0; t < 100; ++t) run(t, 0) = 1;
  std::vector<double> z(120, 0.0);
  z[40] = 0.9;
  auto out = SplitOnUbd(run, Column(z, LabelKind::kUbd), 0.3, 5);
  REQUIRE(out.size() == 2);
  CHECK(out[0].start == 0);
  CHECK(out[0].end == 40);
  CHECK(out[1].start == 40);
  CHECK(out[1].end == 100);

  out = SplitOnUbd(run, Column(std::vector<double>(120, 0.0), LabelKind::kUbd), 0.3, 5);
  REQUIRE(out.size() == 1);
  CHECK(out[0].end == 100);

  // Peaks closer than min_gap: the higher one survives.
  z.assign(120, 0.0);
  z[30] = 0.6;
  z[33] = 0.8;
  out = SplitOnUbd(run, Column(z, LabelKind::kUbd), 0.3, 5);
  REQUIRE(out.size() == 2);
  CHECK(out[1].start == 33);

  // A peak on the run's first frame is not a split.
  z.assign(120, 0.0);
  z[0] = 1.0;
  CHECK(SplitOnUbd(run, Column(z, LabelKind::kUbd), 0.3, 5).size() == 1);
}

TEST_CASE("peak picking matches an exhaustive scan") {
  // For min_gap larger than the run, exactly the highest interior local max
  // (earliest on ties) splits the run.
  Engine eng(52);
  for (int trial = 0; trial < 100; ++trial) {
    Matrix<uint8_t> run(40, 1, 1);
    std::vector<double> z(40);
    for (double &v : z) v = testing::RandUniform(eng);
    int64_t best = -1;
    for (int64_t t = 1; t < 40; ++t) {
      const bool local = z[t] >= z[t - 1] && (t + 1 == 40 || z[t] >= z[t + 1]);
      if (local && z[t] >= 0.3 && (best < 0 || z[t] > z[best])) best = t;
    }
    auto out = SplitOnUbd(run, Column(z, LabelKind::kUbd), 0.3, 100);
    if (best < 0) {
      CHECK(out.size() == 1);
    } else {
      REQUIRE(out.size() == 2);
      CHECK(out[1].start == best);
    }
  }
}

TEST_CASE("decoding oracle posteriors recovers the timeline") {
  CHECK(Decode(Column(std::vector<double>(50, 0.0)),
               Column(std::vector<double>(50, 0.0), LabelKind::kUbd))
            .empty());

  // Two abutting utterances on one channel split exactly at the junction.
  const Assignment one{{0, 0}, 1};
  for (int64_t gap : {0, 1, 3, 5}) {
    const Timeline pair({{1, 10, 60, {}}, {2, 60 + gap, 130, {}}}, 200, 100.0);
    auto out = Decode(Saturated(RenderReference(pair, one, LabelKind::kVad), LabelKind::kVad),
                      Saturated(RenderReference(pair, one, LabelKind::kUbd), LabelKind::kUbd));
    REQUIRE(out.size() == 2);
    CHECK(out[0].start == 10);
    CHECK(out[0].end == 60);
    CHECK(out[1].start == 60 + gap);
    CHECK(out[1].end == 130);
  }

  Engine eng(53);
  for (int trial = 0; trial < 100; ++trial) {
    const int C = testing::RandInt(eng, 1, 3);
    const Timeline tl = DecodableTimeline(eng, testing::RandInt(eng, 1, 3 * C), 600, C);
    const Assignment a = FirstFitAssignment(tl, C);
    const auto decoded =
        Decode(Saturated(RenderReference(tl, a, LabelKind::kVad), LabelKind::kVad),
               Saturated(RenderReference(tl, a, LabelKind::kUbd), LabelKind::kUbd));
    std::vector<std::tuple<int64_t, int64_t, int>> want, got;
    for (std::size_t u = 0; u < tl.size(); ++u)
      want.emplace_back(tl[u].start, tl[u].end, a.channel_of[u]);
    for (const auto &d : decoded) got.emplace_back(d.start, d.end, d.channel);
    std::sort(want.begin(), want.end());
    std::sort(got.begin(), got.end());
    CHECK(got == want);
  }
}

TEST_CASE("decoded utterances never overlap within a channel") {
  Engine eng(54);
  for (int trial = 0; trial < 50; ++trial) {
    const ScoreMatrix vad = testing::RandomScores(eng, 300, 3);
    const ScoreMatrix ubd = testing::RandomScores(eng, 300, 3, LabelKind::kUbd);
    DecodeConfig cfg;
    cfg.median_window = 3;
    cfg.min_duration = 1;
    const auto out = Decode(vad, ubd, cfg);
    CHECK(out == Decode(vad, ubd, cfg));
    for (std::size_t i = 0; i < out.size(); ++i) {
      CHECK(out[i].end > out[i].start);
      CHECK(out[i].id == static_cast<int>(i) + 1);
      for (std::size_t j = i + 1; j < out.size(); ++j)
        if (out[i].channel == out[j].channel)
          CHECK_FALSE(testing::PairOverlaps({0, out[i].start, out[i].end, {}},
                                            {0, out[j].start, out[j].end, {}}));
    }
  }
}

TEST_CASE("short pieces are dropped and confidence is the mean posterior") {
  std::vector<double> v(40, 0.0);
  for (int t = 5; t < 8; ++t) v[t] = 1.0;     // 3 frames, dropped
  for (int t = 20; t < 30; ++t) v[t] = 0.8;   // kept
  DecodeConfig cfg;
  cfg.median_window = 1;
  const auto out = Decode(Column(v), Column(std::vector<double>(40, 0.0), LabelKind::kUbd), cfg);
  REQUIRE(out.size() == 1);
  CHECK(out[0].start == 20);
  CHECK(out[0].confidence == doctest::Approx(0.8));
  const auto j = DecodedToJson(out, 40, 100.0);
  CHECK(j.at("utterances")[0].at("channel").get<int>() == 1);
}

}  // namespace
}  // namespace uttdiar
