// simulator.cc

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

#include "uttdiar/simulator.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <queue>
#include <tuple>

namespace uttdiar {

double Rng::Uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

int Rng::UniformInt(int lo, int hi) {
  const double span = static_cast<double>(hi - lo + 1);
  return lo + std::min(hi - lo, static_cast<int>(Uniform() * span));
}

double Rng::Exponential(double mean) { return -mean * std::log1p(-Uniform()); }

double Rng::Normal() {
  if (spare_) {
    const double v = *spare_;
    spare_.reset();
    return v;
  }
  const double u1 = 1.0 - Uniform();  // (0, 1]
  const double u2 = Uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
  return r * std::cos(2.0 * std::numbers::pi * u2);
}

uint64_t DeriveSeed(uint64_t seed, uint64_t stream) {
  // splitmix64 finalizer
  uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

int64_t SimConfig::TotalFrames() const {
  return target_frames ? *target_frames
                       : static_cast<int64_t>(std::llround(3.3 * 60.0 * frame_rate));
}

void SimConfig::Validate() const {
  if (min_speakers < 1 || max_speakers < min_speakers)
    throw InvalidInput("speaker range must be non-empty and >= 1");
  if (!(beta > 0)) throw InvalidInput("beta must be positive");
  if (!(min_utterance_s > 0) || max_utterance_s < min_utterance_s)
    throw InvalidInput("utterance duration range must be non-empty and positive");
  if (!(frame_rate > 0)) throw InvalidInput("frame_rate must be positive");
  if (TotalFrames() < 1) throw InvalidInput("target_frames must be >= 1");
  if (max_concurrency_cap && *max_concurrency_cap < 1)
    throw InvalidInput("max_concurrency_cap must be >= 1");
  if (posterior_noise < 0 || embedding_noise < 0)
    throw InvalidInput("noise levels must be >= 0");
  if (embedding_dim < 1) throw InvalidInput("embedding_dim must be >= 1");
  if (num_channels < 1) throw InvalidInput("num_channels must be >= 1");
}

Timeline SimulateTimeline(const SimConfig &config,
                          std::vector<DroppedUtterance> *dropped) {
  config.Validate();
  Rng rng(config.seed);
  const int64_t total = config.TotalFrames();
  const double fr = config.frame_rate;
  const int num_speakers = rng.UniformInt(config.min_speakers, config.max_speakers);

  auto draw_duration = [&] {
    return std::max<int64_t>(
        1, std::llround(rng.Uniform(config.min_utterance_s, config.max_utterance_s) * fr));
  };
  auto draw_pause = [&] {
    return static_cast<int64_t>(std::llround(rng.Exponential(config.beta) * fr));
  };

  // (tentative start, speaker, duration), earliest first.
  using Pending = std::tuple<int64_t, int, int64_t>;
  std::priority_queue<Pending, std::vector<Pending>, std::greater<>> queue;
  for (int k = 0; k < num_speakers; ++k) {
    const int64_t pause = draw_pause();
    queue.emplace(pause, k, draw_duration());
  }

  std::vector<int> occupancy(total, 0);
  std::vector<std::tuple<int64_t, int, int64_t>> placed;  // start, speaker, end
  std::vector<DroppedUtterance> lost;
  const int cap = config.max_concurrency_cap.value_or(0);

  while (!queue.empty()) {
    auto [tentative, speaker, duration] = queue.top();
    queue.pop();
    if (tentative + duration > total) continue;  // the meeting is over
    int64_t start = tentative;
    if (cap > 0) {
      while (start + duration <= total) {
        int64_t blocked = -1;
        for (int64_t t = start; t < start + duration; ++t)
          if (occupancy[t] >= cap) {
            blocked = t;
            break;
          }
        if (blocked < 0) break;
        start = blocked + 1;
      }
      if (start + duration > total) {
        lost.push_back({"spk" + std::to_string(speaker + 1), tentative, duration});
        continue;
      }
    }
    for (int64_t t = start; t < start + duration; ++t) ++occupancy[t];
    placed.emplace_back(start, speaker, start + duration);
    queue.emplace(start + duration + draw_pause(), speaker, draw_duration());
  }

  if (!lost.empty() && config.strict_placement) {
    std::string what = "concurrency cap leaves " + std::to_string(lost.size()) +
                       " utterance(s) unplaced:";
    for (const auto &d : lost)
      what += " " + d.speaker + "@" + std::to_string(d.tentative_start);
    throw PlacementError(what, lost);
  }
  if (dropped) *dropped = std::move(lost);

  std::sort(placed.begin(), placed.end());
  std::vector<Utterance> utts;
  for (const auto &[start, speaker, end] : placed)
    utts.push_back({static_cast<int>(utts.size()) + 1, start, end,
                    "spk" + std::to_string(speaker + 1)});
  return Timeline(std::move(utts), total, fr);
}

namespace {

double Logit(double p) { return std::log(p / (1.0 - p)); }
double Sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

ScoreMatrix Saturate(const Matrix<uint8_t> &grid, LabelKind kind,
                     double frame_rate, double noise, Rng &rng) {
  ScoreMatrix s{kind, frame_rate, Matrix<double>(grid.rows(), grid.cols())};
  const double hi = 1.0 - kClampEpsilon, lo = kClampEpsilon;
  for (std::size_t i = 0; i < grid.data().size(); ++i) {
    const double p = grid.data()[i] ? hi : lo;
    s.values.data()[i] = noise > 0 ? Sigmoid(Logit(p) + noise * rng.Normal()) : p;
  }
  return s;
}

}  // namespace

SimPosteriors SynthesizePosteriors(const Timeline &timeline, int num_channels,
                                   double noise, uint64_t seed) {
  if (noise < 0) throw InvalidInput("noise must be >= 0");
  SimPosteriors out;
  out.assignment = FirstFitAssignment(timeline, num_channels);
  Rng rng(seed);
  out.vad = Saturate(RenderReference(timeline, out.assignment, LabelKind::kVad),
                     LabelKind::kVad, timeline.frame_rate(), noise, rng);
  out.ubd = Saturate(RenderReference(timeline, out.assignment, LabelKind::kUbd),
                     LabelKind::kUbd, timeline.frame_rate(), noise, rng);
  return out;
}

FrameEmbeddings SynthesizeEmbeddings(const Timeline &timeline,
                                     const Assignment &assignment, int dim,
                                     double noise, uint64_t seed) {
  if (dim < 1) throw InvalidInput("embedding dim must be >= 1");
  if (assignment.channel_of.size() != timeline.size())
    throw InvalidInput("assignment does not match timeline");
  Rng rng(seed);
  const std::vector<std::string> speakers = timeline.speakers();
  // Random orthonormal centroids (Gram-Schmidt on Gaussian draws) while
  // there are at most `dim` speakers; independent random directions beyond.
  std::map<std::string, std::vector<double>> centroid;
  std::vector<std::vector<double>> basis;
  for (const auto &spk : speakers) {
    std::vector<double> v(dim);
    double norm = 0.0;
    do {
      for (double &x : v) x = rng.Normal();
      if (basis.size() < static_cast<std::size_t>(dim)) {
        for (const auto &b : basis) {
          double dot = 0.0;
          for (int l = 0; l < dim; ++l) dot += v[l] * b[l];
          for (int l = 0; l < dim; ++l) v[l] -= dot * b[l];
        }
      }
      norm = 0.0;
      for (double x : v) norm += x * x;
    } while (norm < 1e-12);
    norm = std::sqrt(norm);
    for (double &x : v) x /= norm;
    if (basis.size() < static_cast<std::size_t>(dim)) basis.push_back(v);
    centroid[spk] = std::move(v);
  }

  const std::size_t T = static_cast<std::size_t>(timeline.total_frames());
  const std::size_t C = static_cast<std::size_t>(assignment.num_channels);
  // owner(t, c) = utterance index active on channel c at frame t, or -1.
  std::vector<int> owner(T * C, -1);
  for (std::size_t u = 0; u < timeline.size(); ++u)
    for (int64_t t = timeline[u].start; t < timeline[u].end; ++t)
      owner[assignment.channel_of[u] * T + t] = static_cast<int>(u);

  FrameEmbeddings emb(T, C, dim);
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t t = 0; t < T; ++t) {
      auto e = emb.at(t, c);
      const int u = owner[c * T + t];
      if (u >= 0 && timeline[u].speaker) {
        const auto &mu = centroid[*timeline[u].speaker];
        double norm = 0.0;
        for (int l = 0; l < dim; ++l) {
          e[l] = mu[l] + noise * rng.Normal();
          norm += e[l] * e[l];
        }
        norm = std::sqrt(norm);
        if (norm > 0)
          for (double &x : e) x /= norm;
      } else {
        for (double &x : e) x = noise * rng.Normal();
      }
    }
  }
  return emb;
}

Diarization ReferenceDiarization(const Timeline &timeline,
                                 const std::string &recording_id) {
  Diarization d(recording_id);
  for (const auto &u : timeline.utterances())
    d.Add(u.speaker.value_or("spk" + std::to_string(u.id)),
          {FrameToMillis(u.start, timeline.frame_rate()),
           FrameToMillis(u.end, timeline.frame_rate())});
  return d;
}

std::string MeetingId(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "meeting_%04zu", index);
  return buf;
}

Meeting SimulateMeeting(const SimConfig &config, std::size_t index) {
  SimConfig cfg = config;
  cfg.seed = DeriveSeed(config.seed, 3 * index);
  Meeting m;
  m.id = MeetingId(index);
  m.timeline = SimulateTimeline(cfg, &m.dropped);
  m.posteriors = SynthesizePosteriors(m.timeline, cfg.num_channels,
                                      cfg.posterior_noise,
                                      DeriveSeed(config.seed, 3 * index + 1));
  m.embeddings = SynthesizeEmbeddings(m.timeline, m.posteriors.assignment,
                                      cfg.embedding_dim, cfg.embedding_noise,
                                      DeriveSeed(config.seed, 3 * index + 2));
  m.reference = ReferenceDiarization(m.timeline, m.id);
  m.overlap_ratio = OverlapRatio(m.timeline);
  return m;
}

void WriteMeeting(const std::string &dir, const Meeting &meeting) {
  std::filesystem::create_directories(dir);
  WriteTimeline(dir + "/timeline.json", meeting.timeline);
  WriteScoreCsv(dir + "/vad.csv", meeting.posteriors.vad);
  WriteScoreCsv(dir + "/ubd.csv", meeting.posteriors.ubd);
  WriteFrameEmbeddings(dir + "/emb.csv", dir + "/emb.json", meeting.embeddings);
  WriteRttmFile(dir + "/ref.rttm", {meeting.reference});
}

void CorpusStats::Add(const Meeting &meeting) {
  const double r = meeting.overlap_ratio;
  if (num_meetings == 0) {
    min_overlap_ratio = max_overlap_ratio = r;
  } else {
    min_overlap_ratio = std::min(min_overlap_ratio, r);
    max_overlap_ratio = std::max(max_overlap_ratio, r);
  }
  ++num_meetings;
  ratio_sum_ += r;
  max_concurrency = std::max(max_concurrency, MaxConcurrency(meeting.timeline));
  dropped_utterances += meeting.dropped.size();
  ++speaker_histogram[static_cast<int>(meeting.timeline.speakers().size())];
}

void CorpusStats::Finish() {
  mean_overlap_ratio = num_meetings ? ratio_sum_ / num_meetings : 0.0;
}

std::string CorpusStats::Format() const {
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "meetings=%zu mean_overlap_ratio=%.4f min=%.4f max=%.4f "
                "max_concurrency=%d dropped=%zu speakers:",
                num_meetings, mean_overlap_ratio, min_overlap_ratio,
                max_overlap_ratio, max_concurrency, dropped_utterances);
  std::string out = buf;
  for (const auto &[k, n] : speaker_histogram)
    out += " " + std::to_string(k) + "=" + std::to_string(n);
  return out;
}

}  // namespace uttdiar
