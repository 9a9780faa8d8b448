// uttdiar/pipeline.h

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

// Pipeline configuration and the end-to-end stages used by the CLI.

#ifndef UTTDIAR_PIPELINE_H_
#define UTTDIAR_PIPELINE_H_

#include <string>
#include <vector>

#include "json.hpp"
#include "uttdiar/assign.h"
#include "uttdiar/cluster.h"
#include "uttdiar/decoder.h"
#include "uttdiar/losses.h"
#include "uttdiar/scoring.h"
#include "uttdiar/simulator.h"

namespace uttdiar {

struct PipelineConfig {
  double frame_rate = 100.0;
  int channels = 2;
  Solver solver = Solver::kDp;
  DecodeConfig decoder;
  MultiTaskWeights weights;
  int ubd_width = 2;
  double margin = 1.0;
  ClusterConfig cluster;
  double collar = 0.25;
  SimConfig simulator;
};

// Every key is optional; unknown keys raise InvalidInput.
PipelineConfig PipelineConfigFromJson(const nlohmann::json &j);
nlohmann::json PipelineConfigToJson(const PipelineConfig &config);
PipelineConfig ReadPipelineConfig(const std::string &path);

/// Graph-PIT VAD loss -> Z via P* -> UBD loss -> embedding loss -> combine.
/// Embeddings are aggregated over ground-truth spans on the P* channel.
LossBreakdown ComputeLosses(const Timeline &timeline, const ScoreMatrix &vad,
                            const ScoreMatrix &ubd,
                            const FrameEmbeddings &embeddings,
                            const PipelineConfig &config);

struct DiarizeResult {
  std::vector<DecodedUtterance> utterances;
  CannotLinkSet cannot_links;
  ClusterResult clusters;
  Diarization diarization;
};

/// decode -> aggregate embeddings -> cannot-links -> cluster -> assemble.
DiarizeResult Diarize(const ScoreMatrix &vad, const ScoreMatrix &ubd,
                      const FrameEmbeddings &embeddings,
                      const PipelineConfig &config,
                      const std::string &recording_id);

}  // namespace uttdiar

#endif  // UTTDIAR_PIPELINE_H_
