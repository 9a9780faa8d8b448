// tools/uttdiar.cc

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

// Command-line front end: simulate | loss | assign | diarize | score | pipeline.
// Exit codes: 0 success, 1 I/O or parse error, 2 infeasibility.

#include <atomic>
#include <exception>
#include <filesystem>
#include <functional>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "uttdiar/assign.h"
#include "uttdiar/pipeline.h"
#include "uttdiar/scoring.h"
#include "uttdiar/simulator.h"

namespace {

using namespace uttdiar;
using nlohmann::json;
namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitInfeasible = 2;

// Runs fn(0..n-1) on up to `jobs` threads. The first exception is rethrown.
void ParallelFor(std::size_t n, int jobs, const std::function<void(std::size_t)> &fn) {
  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(n, jobs > 0 ? jobs : 1));
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex mu;
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!error) error = std::current_exception();
        next = n;
      }
    }
  };
  std::vector<std::thread> threads;
  for (std::size_t w = 1; w < workers; ++w) threads.emplace_back(work);
  work();
  for (auto &t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

std::string CliqueMessage(const Infeasible &e, int channels) {
  std::string msg = std::string("infeasible: ") + e.what();
  if (!e.clique().empty()) {
    msg += "; utterances";
    for (int u : e.clique()) msg += " " + std::to_string(u + 1);
    msg += " are simultaneously active (" + std::to_string(e.clique().size()) +
           " > " + std::to_string(channels) + " channels)";
  }
  return msg;
}

struct CommonOptions {
  std::string config_path;
  std::optional<double> frame_rate;
  std::optional<int> channels;
  std::optional<double> collar;
  std::optional<int> num_speakers;
  std::optional<double> stop_threshold;
  std::optional<std::string> solver;
  std::optional<uint64_t> seed;
  std::optional<double> posterior_noise;
  std::optional<double> embedding_noise;
  std::optional<int> cap;

  PipelineConfig Load() const {
    PipelineConfig cfg = config_path.empty() ? PipelineConfigFromJson(json::object())
                                             : ReadPipelineConfig(config_path);
    if (frame_rate) cfg.frame_rate = cfg.simulator.frame_rate = *frame_rate;
    if (channels) cfg.channels = cfg.simulator.num_channels = *channels;
    if (collar) cfg.collar = *collar;
    if (num_speakers) cfg.cluster.num_speakers = *num_speakers;
    if (stop_threshold) cfg.cluster.stop_threshold = *stop_threshold;
    if (solver) cfg.solver = SolverFromString(*solver);
    if (seed) cfg.simulator.seed = *seed;
    if (posterior_noise) cfg.simulator.posterior_noise = *posterior_noise;
    if (embedding_noise) cfg.simulator.embedding_noise = *embedding_noise;
    if (cap) cfg.simulator.max_concurrency_cap = *cap > 0 ? std::optional<int>(*cap)
                                                           : std::nullopt;
    return cfg;
  }
};

void AddConfig(CLI::App *cmd, CommonOptions &opt) {
  cmd->add_option("--config", opt.config_path, "Pipeline config JSON");
  cmd->add_option("--frame-rate", opt.frame_rate, "Frames per second");
}

void AddSimOptions(CLI::App *cmd, CommonOptions &opt) {
  cmd->add_option("--seed", opt.seed, "Corpus seed");
  cmd->add_option("--posterior-noise", opt.posterior_noise, "Logit jitter std");
  cmd->add_option("--embedding-noise", opt.embedding_noise, "Embedding noise std");
  cmd->add_option("--cap", opt.cap, "Max concurrency cap (0 disables)");
  cmd->add_option("--channels", opt.channels, "Output channels C");
}

int RunSimulate(const CommonOptions &opt, const std::string &out_dir,
                std::size_t count, int jobs) {
  const PipelineConfig cfg = opt.Load();
  cfg.simulator.Validate();
  fs::create_directories(out_dir);
  std::vector<Meeting> meetings(count);
  ParallelFor(count, jobs, [&](std::size_t i) {
    Meeting m = SimulateMeeting(cfg.simulator, i);
    WriteMeeting((fs::path(out_dir) / m.id).string(), m);
    m.posteriors = {};
    m.embeddings = {};
    meetings[i] = std::move(m);
  });
  CorpusStats stats;
  for (const auto &m : meetings) stats.Add(m);
  stats.Finish();
  std::cout << stats.Format() << "\n";
  return kExitOk;
}

int RunLoss(const CommonOptions &opt, const std::string &timeline_path,
            const std::string &vad_path, const std::string &ubd_path,
            const std::string &emb_path) {
  const PipelineConfig cfg = opt.Load();
  const Timeline timeline = ReadTimeline(timeline_path);
  const ScoreMatrix vad = ReadScoreCsv(vad_path, LabelKind::kVad, timeline.frame_rate());
  const ScoreMatrix ubd = ReadScoreCsv(ubd_path, LabelKind::kUbd, timeline.frame_rate());
  const FrameEmbeddings emb = ReadFrameEmbeddings(emb_path, SidecarPath(emb_path));
  try {
    const LossBreakdown losses = ComputeLosses(timeline, vad, ubd, emb, cfg);
    std::cout << LossBreakdownToJson(losses).dump(2) << "\n";
  } catch (const Infeasible &e) {
    std::cerr << CliqueMessage(e, static_cast<int>(vad.num_channels())) << "\n";
    return kExitInfeasible;
  }
  return kExitOk;
}

int RunAssign(const CommonOptions &opt, const std::string &timeline_path,
              const std::string &vad_path) {
  const PipelineConfig cfg = opt.Load();
  const Timeline timeline = ReadTimeline(timeline_path);
  const ScoreMatrix vad = ReadScoreCsv(vad_path, LabelKind::kVad, timeline.frame_rate());
  const int channels = opt.channels.value_or(static_cast<int>(vad.num_channels()));
  if (channels != static_cast<int>(vad.num_channels()))
    throw InvalidInput("--channels " + std::to_string(channels) + " but " +
                       vad_path + " has " + std::to_string(vad.num_channels()) +
                       " columns");
  const CostMatrix cost = ComputeCostMatrix(timeline, vad);
  const OverlapGraph graph = BuildOverlapGraph(timeline);
  AssignmentResult result;
  try {
    if (cfg.solver == Solver::kDp) {
      result = SolveDp(graph, cost, timeline, channels);
    } else {
      try {
        result = SolveBruteForce(graph, cost, channels);
      } catch (const Infeasible &e) {
        throw Infeasible(e.what(), MaxClique(timeline));
      }
    }
  } catch (const Infeasible &e) {
    std::cerr << CliqueMessage(e, channels) << "\n";
    return kExitInfeasible;
  }
  std::vector<int> one_based;
  for (int c : result.assignment.channel_of) one_based.push_back(c + 1);
  const json out = {{"solver", cfg.solver == Solver::kDp ? "dp" : "brute"},
                    {"num_channels", channels},
                    {"channels", one_based},
                    {"loss", result.loss},
                    {"cost", result.cost},
                    {"explored_states", result.explored_states}};
  std::cout << out.dump(2) << "\n";
  return kExitOk;
}

int RunDiarize(const CommonOptions &opt, const std::string &vad_path,
               const std::string &ubd_path, const std::string &emb_path,
               const std::string &out_path, std::string recording_id) {
  const PipelineConfig cfg = opt.Load();
  const ScoreMatrix vad = ReadScoreCsv(vad_path, LabelKind::kVad, cfg.frame_rate);
  const ScoreMatrix ubd = ReadScoreCsv(ubd_path, LabelKind::kUbd, cfg.frame_rate);
  const FrameEmbeddings emb = ReadFrameEmbeddings(emb_path, SidecarPath(emb_path));
  if (recording_id.empty()) {
    recording_id = fs::absolute(vad_path).parent_path().filename().string();
    if (recording_id.empty()) recording_id = "recording";
  }
  const DiarizeResult result = Diarize(vad, ubd, emb, cfg, recording_id);
  if (result.clusters.constraint_limited)
    std::cerr << "warning: cannot-link constraints kept "
              << result.clusters.num_clusters << " clusters\n";
  const std::string rttm = WriteRttm(result.diarization);
  if (out_path.empty() || out_path == "-") {
    std::cout << rttm;
  } else {
    WriteRttmFile(out_path, {result.diarization});
  }
  return kExitOk;
}

// Scores every reference recording; a missing hypothesis counts as all miss.
std::vector<DerReport> ScoreCorpus(const std::vector<Diarization> &refs,
                                   const std::vector<Diarization> &hyps,
                                   double collar) {
  std::map<std::string, const Diarization *> hyp_by_id;
  for (const auto &h : hyps) hyp_by_id[h.recording_id()] = &h;
  std::vector<DerReport> reports;
  for (const auto &ref : refs) {
    auto it = hyp_by_id.find(ref.recording_id());
    Diarization empty(ref.recording_id());
    if (it == hyp_by_id.end())
      std::cerr << "warning: no hypothesis for recording '" << ref.recording_id()
                << "', scored as all miss\n";
    const Diarization &hyp = it == hyp_by_id.end() ? empty : *it->second;
    try {
      reports.push_back(ScoreDer(ref, hyp, collar));
    } catch (const UndefinedDer &e) {
      std::cerr << "warning: " << e.what() << ", skipped\n";
    }
    if (it != hyp_by_id.end()) hyp_by_id.erase(it);
  }
  for (const auto &[id, h] : hyp_by_id)
    std::cerr << "warning: hypothesis recording '" << id
              << "' has no reference, ignored\n";
  return reports;
}

void PrintReports(const std::vector<DerReport> &reports, bool table,
                  json extra = json::object()) {
  const DerReport total = AggregateReports(reports);
  if (table) {
    std::cout << FormatDerTable(reports, total);
    return;
  }
  json per = json::array();
  for (const auto &r : reports) per.push_back(DerReportToJson(r));
  extra["recordings"] = std::move(per);
  extra["corpus"] = DerReportToJson(total);
  std::cout << extra.dump(2) << "\n";
}

int RunScore(const CommonOptions &opt, const std::string &ref_path,
             const std::string &hyp_path, bool table) {
  const PipelineConfig cfg = opt.Load();
  const auto refs = ReadRttmFile(ref_path);
  const auto hyps = ReadRttmFile(hyp_path);
  PrintReports(ScoreCorpus(refs, hyps, cfg.collar), table);
  return kExitOk;
}

int RunPipeline(const CommonOptions &opt, const std::string &out_dir,
                std::size_t count, int jobs, bool table) {
  const PipelineConfig cfg = opt.Load();
  cfg.simulator.Validate();
  fs::create_directories(out_dir);
  std::vector<Meeting> meetings(count);
  std::vector<Diarization> hyps(count);
  ParallelFor(count, jobs, [&](std::size_t i) {
    Meeting m = SimulateMeeting(cfg.simulator, i);
    const std::string dir = (fs::path(out_dir) / m.id).string();
    WriteMeeting(dir, m);
    // Re-read from disk so the pipeline exercises the file formats.
    const ScoreMatrix vad = ReadScoreCsv(dir + "/vad.csv", LabelKind::kVad, cfg.frame_rate);
    const ScoreMatrix ubd = ReadScoreCsv(dir + "/ubd.csv", LabelKind::kUbd, cfg.frame_rate);
    const FrameEmbeddings emb = ReadFrameEmbeddings(dir + "/emb.csv", dir + "/emb.json");
    hyps[i] = Diarize(vad, ubd, emb, cfg, m.id).diarization;
    WriteRttmFile(dir + "/hyp.rttm", {hyps[i]});
    m.posteriors = {};
    m.embeddings = {};
    meetings[i] = std::move(m);
  });
  std::vector<Diarization> refs;
  CorpusStats stats;
  for (const auto &m : meetings) {
    refs.push_back(m.reference);
    stats.Add(m);
  }
  stats.Finish();
  std::cerr << stats.Format() << "\n";
  PrintReports(ScoreCorpus(refs, hyps, cfg.collar), table,
               {{"meetings", count}, {"mean_overlap_ratio", stats.mean_overlap_ratio}});
  return kExitOk;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Utterance-by-utterance overlap-aware diarization toolkit"};
  app.require_subcommand(1);

  CommonOptions opt;
  std::string out_dir, timeline_path, vad_path, ubd_path, emb_path, ref_path,
      hyp_path, out_path, recording_id;
  std::size_t count = 1;
  int jobs = 1;
  bool table = false;

  auto *simulate = app.add_subcommand("simulate", "Generate a simulated corpus");
  AddConfig(simulate, opt);
  AddSimOptions(simulate, opt);
  simulate->add_option("--out", out_dir, "Output directory")->required();
  simulate->add_option("--count", count, "Number of meetings");
  simulate->add_option("--jobs", jobs, "Parallel meetings");

  auto *loss = app.add_subcommand("loss", "Multi-task loss for one meeting");
  AddConfig(loss, opt);
  loss->add_option("--timeline", timeline_path)->required();
  loss->add_option("--vad", vad_path)->required();
  loss->add_option("--ubd", ubd_path)->required();
  loss->add_option("--emb", emb_path, "Frame embeddings CSV (sidecar .json next to it)")
      ->required();
  loss->add_option("--solver", opt.solver, "dp or brute");

  auto *assign = app.add_subcommand("assign", "Optimal utterance-to-channel assignment");
  AddConfig(assign, opt);
  assign->add_option("--timeline", timeline_path)->required();
  assign->add_option("--vad", vad_path)->required();
  assign->add_option("--channels", opt.channels, "Number of output channels");
  assign->add_option("--solver", opt.solver, "dp or brute");

  auto *diarize = app.add_subcommand("diarize", "Posteriors + embeddings -> RTTM");
  AddConfig(diarize, opt);
  diarize->add_option("--vad", vad_path)->required();
  diarize->add_option("--ubd", ubd_path)->required();
  diarize->add_option("--emb", emb_path)->required();
  diarize->add_option("--out", out_path, "Output RTTM (default stdout)");
  diarize->add_option("--recording-id", recording_id);
  diarize->add_option("--num-speakers", opt.num_speakers);
  diarize->add_option("--stop-threshold", opt.stop_threshold);

  auto *score = app.add_subcommand("score", "DER with collar");
  AddConfig(score, opt);
  score->add_option("--ref", ref_path)->required();
  score->add_option("--hyp", hyp_path)->required();
  score->add_option("--collar", opt.collar, "Collar in seconds (default 0.25)");
  score->add_flag("--table", table, "Print an aligned table instead of JSON");

  auto *pipeline = app.add_subcommand("pipeline", "simulate -> diarize -> score");
  AddConfig(pipeline, opt);
  AddSimOptions(pipeline, opt);
  pipeline->add_option("--out", out_dir, "Working directory")->required();
  pipeline->add_option("--count", count, "Number of meetings");
  pipeline->add_option("--jobs", jobs, "Parallel meetings");
  pipeline->add_option("--collar", opt.collar);
  pipeline->add_option("--num-speakers", opt.num_speakers);
  pipeline->add_flag("--table", table, "Print an aligned table instead of JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    if (*simulate) return RunSimulate(opt, out_dir, count, jobs);
    if (*loss) return RunLoss(opt, timeline_path, vad_path, ubd_path, emb_path);
    if (*assign) return RunAssign(opt, timeline_path, vad_path);
    if (*diarize)
      return RunDiarize(opt, vad_path, ubd_path, emb_path, out_path, recording_id);
    if (*score) return RunScore(opt, ref_path, hyp_path, table);
    if (*pipeline) return RunPipeline(opt, out_dir, count, jobs, table);
  } catch (const Infeasible &e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const ConstraintViolation &e) {
    std::cerr << "constraint violation: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const PlacementError &e) {
    std::cerr << "placement error: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
