// pipeline.cc

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

#include "uttdiar/pipeline.h"

#include <algorithm>
#include <initializer_list>
#include <string_view>

#include "csv_util.h"

namespace uttdiar {

namespace {

using nlohmann::json;

void RejectUnknown(const json &j, std::string_view where,
                   std::initializer_list<std::string_view> allowed) {
  if (!j.is_object())
    throw InvalidInput("config section '" + std::string(where) +
                       "' must be an object");
  for (const auto &[key, value] : j.items())
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw InvalidInput("unknown config key '" + std::string(where) + "." +
                         key + "'");
}

template <typename T>
void Read(const json &j, const char *key, T &out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

template <typename T>
void ReadOptional(const json &j, const char *key, std::optional<T> &out) {
  if (!j.contains(key)) return;
  if (j.at(key).is_null())
    out.reset();
  else
    out = j.at(key).get<T>();
}

template <typename T>
json OptionalToJson(const std::optional<T> &v) {
  return v ? json(*v) : json(nullptr);
}

}  // namespace

PipelineConfig PipelineConfigFromJson(const json &j) {
  PipelineConfig cfg;
  try {
    RejectUnknown(j, "root",
                  {"frame_rate", "channels", "solver", "decoder", "losses",
                   "cluster", "scoring", "simulator"});
    Read(j, "frame_rate", cfg.frame_rate);
    Read(j, "channels", cfg.channels);
    if (j.contains("solver"))
      cfg.solver = SolverFromString(j.at("solver").get<std::string>());
    if (j.contains("decoder")) {
      const json &d = j.at("decoder");
      RejectUnknown(d, "decoder",
                    {"threshold", "median_window", "peak_threshold", "min_gap",
                     "min_duration"});
      Read(d, "threshold", cfg.decoder.threshold);
      Read(d, "median_window", cfg.decoder.median_window);
      Read(d, "peak_threshold", cfg.decoder.peak_threshold);
      Read(d, "min_gap", cfg.decoder.min_gap);
      Read(d, "min_duration", cfg.decoder.min_duration);
    }
    if (j.contains("losses")) {
      const json &l = j.at("losses");
      RejectUnknown(l, "losses", {"alpha", "gamma", "lambda", "ubd_width", "margin"});
      Read(l, "alpha", cfg.weights.alpha);
      Read(l, "gamma", cfg.weights.gamma);
      Read(l, "lambda", cfg.weights.lambda);
      Read(l, "ubd_width", cfg.ubd_width);
      Read(l, "margin", cfg.margin);
    }
    if (j.contains("cluster")) {
      const json &c = j.at("cluster");
      RejectUnknown(c, "cluster", {"num_speakers", "stop_threshold"});
      ReadOptional(c, "num_speakers", cfg.cluster.num_speakers);
      Read(c, "stop_threshold", cfg.cluster.stop_threshold);
    }
    if (j.contains("scoring")) {
      const json &s = j.at("scoring");
      RejectUnknown(s, "scoring", {"collar"});
      Read(s, "collar", cfg.collar);
    }
    if (j.contains("simulator")) {
      const json &s = j.at("simulator");
      RejectUnknown(s, "simulator",
                    {"min_speakers", "max_speakers", "beta", "min_utterance_s",
                     "max_utterance_s", "target_frames", "max_concurrency_cap",
                     "seed", "posterior_noise", "embedding_noise",
                     "embedding_dim", "strict_placement"});
      SimConfig &sim = cfg.simulator;
      Read(s, "min_speakers", sim.min_speakers);
      Read(s, "max_speakers", sim.max_speakers);
      Read(s, "beta", sim.beta);
      Read(s, "min_utterance_s", sim.min_utterance_s);
      Read(s, "max_utterance_s", sim.max_utterance_s);
      ReadOptional(s, "target_frames", sim.target_frames);
      ReadOptional(s, "max_concurrency_cap", sim.max_concurrency_cap);
      Read(s, "seed", sim.seed);
      Read(s, "posterior_noise", sim.posterior_noise);
      Read(s, "embedding_noise", sim.embedding_noise);
      Read(s, "embedding_dim", sim.embedding_dim);
      Read(s, "strict_placement", sim.strict_placement);
    }
  } catch (const json::exception &e) {
    throw InvalidInput(std::string("config: ") + e.what());
  }
  cfg.simulator.frame_rate = cfg.frame_rate;
  cfg.simulator.num_channels = cfg.channels;
  if (!(cfg.frame_rate > 0)) throw InvalidInput("frame_rate must be positive");
  if (cfg.channels < 1) throw InvalidInput("channels must be >= 1");
  return cfg;
}

json PipelineConfigToJson(const PipelineConfig &cfg) {
  const SimConfig &sim = cfg.simulator;
  return {
      {"frame_rate", cfg.frame_rate},
      {"channels", cfg.channels},
      {"solver", cfg.solver == Solver::kDp ? "dp" : "brute"},
      {"decoder",
       {{"threshold", cfg.decoder.threshold},
        {"median_window", cfg.decoder.median_window},
        {"peak_threshold", cfg.decoder.peak_threshold},
        {"min_gap", cfg.decoder.min_gap},
        {"min_duration", cfg.decoder.min_duration}}},
      {"losses",
       {{"alpha", cfg.weights.alpha},
        {"gamma", cfg.weights.gamma},
        {"lambda", cfg.weights.lambda},
        {"ubd_width", cfg.ubd_width},
        {"margin", cfg.margin}}},
      {"cluster",
       {{"num_speakers", OptionalToJson(cfg.cluster.num_speakers)},
        {"stop_threshold", cfg.cluster.stop_threshold}}},
      {"scoring", {{"collar", cfg.collar}}},
      {"simulator",
       {{"min_speakers", sim.min_speakers},
        {"max_speakers", sim.max_speakers},
        {"beta", sim.beta},
        {"min_utterance_s", sim.min_utterance_s},
        {"max_utterance_s", sim.max_utterance_s},
        {"target_frames", OptionalToJson(sim.target_frames)},
        {"max_concurrency_cap", OptionalToJson(sim.max_concurrency_cap)},
        {"seed", sim.seed},
        {"posterior_noise", sim.posterior_noise},
        {"embedding_noise", sim.embedding_noise},
        {"embedding_dim", sim.embedding_dim},
        {"strict_placement", sim.strict_placement}}},
  };
}

PipelineConfig ReadPipelineConfig(const std::string &path) {
  json j;
  try {
    j = json::parse(internal::ReadFile(path));
  } catch (const json::exception &e) {
    throw ParseError(path + ": " + e.what());
  }
  return PipelineConfigFromJson(j);
}

LossBreakdown ComputeLosses(const Timeline &timeline, const ScoreMatrix &vad,
                            const ScoreMatrix &ubd,
                            const FrameEmbeddings &embeddings,
                            const PipelineConfig &config) {
  if (ubd.num_frames() != vad.num_frames() ||
      ubd.num_channels() != vad.num_channels())
    throw InvalidInput("VAD and UBD score matrices differ in shape");
  const int num_channels = static_cast<int>(vad.num_channels());
  const VadLossResult vad_loss =
      GraphPitVadLoss(MakeLabels(timeline, LabelKind::kVad), vad, timeline,
                      num_channels, config.solver);
  const Matrix<uint8_t> ubd_ref =
      RenderReference(timeline, vad_loss.optimal, LabelKind::kUbd);
  const double ubd_loss = UbdLoss(ubd_ref, ubd, config.ubd_width);

  double emb_loss = 0.0;
  if (timeline.size() >= 2) {
    std::vector<LabeledEmbedding> labeled;
    for (std::size_t u = 0; u < timeline.size(); ++u) {
      const Utterance &utt = timeline[u];
      const DecodedUtterance span{utt.id, utt.start, utt.end,
                                  vad_loss.optimal.channel_of[u], 0.0};
      labeled.push_back(
          {AggregateEmbedding(embeddings, vad, span).vector,
           utt.speaker.value_or("utt" + std::to_string(utt.id))});
    }
    emb_loss = EmbeddingLoss(labeled, config.margin);
  }
  return Combine(vad_loss.loss, ubd_loss, emb_loss, config.weights);
}

DiarizeResult Diarize(const ScoreMatrix &vad, const ScoreMatrix &ubd,
                      const FrameEmbeddings &embeddings,
                      const PipelineConfig &config,
                      const std::string &recording_id) {
  DiarizeResult result;
  result.diarization = Diarization(recording_id);
  std::vector<UtteranceEmbedding> vectors;
  for (const DecodedUtterance &u : Decode(vad, ubd, config.decoder)) {
    try {
      vectors.push_back(AggregateEmbedding(embeddings, vad, u));
    } catch (const DegenerateEmbedding &) {
      continue;  // carries no speaker evidence
    }
    result.utterances.push_back(u);
  }
  if (result.utterances.empty()) return result;
  result.cannot_links = DeriveCannotLinks(result.utterances);
  result.clusters = Cluster(vectors, result.cannot_links, config.cluster);
  result.diarization = AssembleDiarization(
      result.utterances, result.clusters.labels, config.frame_rate, recording_id);
  return result;
}

}  // namespace uttdiar
