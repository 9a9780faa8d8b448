// _uttdiar.cc

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


// Python bindings. Arrays cross the boundary as float64 numpy arrays laid out
// (frames, channels); channels are 0-based on the Python side.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "uttdiar/pipeline.h"

namespace py = pybind11;

namespace uttdiar {
namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

ScoreMatrix ToScores(const Array &a, LabelKind kind, double frame_rate) {
  if (a.ndim() != 2) throw InvalidInput("score array must be 2-D (frames, channels)");
  ScoreMatrix s;
  s.kind = kind;
  s.frame_rate = frame_rate;
  s.values = Matrix<double>(a.shape(0), a.shape(1));
  std::copy(a.data(), a.data() + a.size(), s.values.data().begin());
  return s;
}

Array FromMatrix(const Matrix<double> &m) {
  Array out({m.rows(), m.cols()});
  std::copy(m.data().begin(), m.data().end(), out.mutable_data());
  return out;
}

FrameEmbeddings ToEmbeddings(const Array &a) {
  if (a.ndim() != 3)
    throw InvalidInput("embedding array must be 3-D (frames, channels, dim)");
  FrameEmbeddings e(a.shape(0), a.shape(1), a.shape(2));
  auto r = a.unchecked<3>();
  for (py::ssize_t t = 0; t < r.shape(0); ++t)
    for (py::ssize_t c = 0; c < r.shape(1); ++c) {
      auto dst = e.at(t, c);
      for (py::ssize_t l = 0; l < r.shape(2); ++l) dst[l] = r(t, c, l);
    }
  return e;
}

Array FromEmbeddings(const FrameEmbeddings &e) {
  Array out({e.num_frames(), e.num_channels(), e.dim()});
  auto w = out.mutable_unchecked<3>();
  for (std::size_t t = 0; t < e.num_frames(); ++t)
    for (std::size_t c = 0; c < e.num_channels(); ++c) {
      auto src = e.at(t, c);
      for (std::size_t l = 0; l < e.dim(); ++l) w(t, c, l) = src[l];
    }
  return out;
}

PipelineConfig ToConfig(const py::object &config) {
  if (config.is_none()) return {};
  const std::string text = py::module_::import("json").attr("dumps")(config).cast<std::string>();
  return PipelineConfigFromJson(nlohmann::json::parse(text));
}

py::object ToPython(const nlohmann::json &j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

Timeline MakeTimeline(const std::vector<py::tuple> &spans, int64_t total_frames,
                      double frame_rate) {
  std::vector<Utterance> utts;
  for (std::size_t i = 0; i < spans.size(); ++i) {
    const py::tuple &s = spans[i];
    if (s.size() < 2 || s.size() > 3)
      throw InvalidInput("utterances are (start, end) or (start, end, speaker)");
    Utterance u{static_cast<int>(i) + 1, s[0].cast<int64_t>(), s[1].cast<int64_t>(), {}};
    if (s.size() == 3 && !s[2].is_none()) u.speaker = s[2].cast<std::string>();
    utts.push_back(std::move(u));
  }
  return Timeline(std::move(utts), total_frames, frame_rate);
}

Assignment ToAssignment(const std::vector<int> &channels, int num_channels) {
  return {channels, num_channels};
}

py::dict AssignmentDict(const AssignmentResult &r) {
  py::dict d;
  d["channels"] = r.assignment.channel_of;
  d["cost"] = r.cost;
  d["loss"] = r.loss;
  d["explored_states"] = r.explored_states;
  return d;
}

py::dict DerDict(const DerReport &r) {
  py::dict d;
  d["recording_id"] = r.recording_id;
  d["der"] = r.der;
  d["miss"] = r.miss;
  d["false_alarm"] = r.false_alarm;
  d["confusion"] = r.confusion;
  d["scored_time"] = r.scored_time;
  return d;
}

Diarization SingleRecording(const std::string &rttm) {
  std::vector<Diarization> all = ParseRttm(rttm);
  if (all.size() > 1) throw InvalidInput("expected a single recording in RTTM text");
  return all.empty() ? Diarization() : all.front();
}

}  // namespace
}  // namespace uttdiar

PYBIND11_MODULE(_uttdiar, m) {
  using namespace uttdiar;
  m.doc() = "Utterance-by-utterance overlap-aware diarization";

  static py::exception<Error> error(m, "Error", PyExc_RuntimeError);
  static py::exception<InvalidInput> invalid(m, "InvalidInput", error.ptr());
  static py::exception<ParseError> parse(m, "ParseError", error.ptr());
  static py::exception<Infeasible> infeasible(m, "Infeasible", error.ptr());
  static py::exception<ConstraintViolation> constraint(m, "ConstraintViolation",
                                                       error.ptr());
  static py::exception<DegenerateEmbedding> degenerate(m, "DegenerateEmbedding",
                                                       error.ptr());
  static py::exception<UndefinedDer> undefined(m, "UndefinedDer", error.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const InvalidInput &e) {
      py::set_error(invalid, e.what());
    } catch (const ParseError &e) {
      py::set_error(parse, e.what());
    } catch (const Infeasible &e) {
      py::set_error(infeasible, e.what());
    } catch (const ConstraintViolation &e) {
      py::set_error(constraint, e.what());
    } catch (const DegenerateEmbedding &e) {
      py::set_error(degenerate, e.what());
    } catch (const UndefinedDer &e) {
      py::set_error(undefined, e.what());
    } catch (const Error &e) {
      py::set_error(error, e.what());
    }
  });

  py::class_<Timeline>(m, "Timeline")
      .def(py::init(&MakeTimeline), py::arg("utterances"), py::arg("total_frames"),
           py::arg("frame_rate") = 100.0,
           "Utterances as (start, end) or (start, end, speaker) frame spans.")
      .def_static("from_json", [](const std::string &text) {
        return TimelineFromJson(nlohmann::json::parse(text));
      })
      .def("to_json", [](const Timeline &t) { return TimelineToJson(t).dump(); })
      .def_property_readonly("total_frames", &Timeline::total_frames)
      .def_property_readonly("frame_rate", &Timeline::frame_rate)
      .def_property_readonly("utterances",
                             [](const Timeline &t) {
                               py::list out;
                               for (const auto &u : t.utterances())
                                 out.append(py::make_tuple(u.start, u.end, u.speaker));
                               return out;
                             })
      .def("__len__", &Timeline::size)
      .def("overlap_edges", [](const Timeline &t) { return BuildOverlapGraph(t).edges; })
      .def("max_concurrency", &MaxConcurrency)
      .def("overlap_ratio", &OverlapRatio)
      .def("first_fit", [](const Timeline &t, int c) { return FirstFitAssignment(t, c).channel_of; },
           py::arg("num_channels"))
      .def("render",
           [](const Timeline &t, const std::vector<int> &channels, int c, const std::string &kind) {
             const auto grid = RenderReference(t, ToAssignment(channels, c),
                                               LabelKindFromString(kind));
             py::array_t<uint8_t> out({grid.rows(), grid.cols()});
             std::copy(grid.data().begin(), grid.data().end(), out.mutable_data());
             return out;
           },
           py::arg("channels"), py::arg("num_channels"), py::arg("kind") = "vad");

  m.def("assign",
        [](const Timeline &t, const Array &vad, const std::string &solver) {
          const ScoreMatrix s = ToScores(vad, LabelKind::kVad, t.frame_rate());
          const int c = static_cast<int>(s.num_channels());
          const OverlapGraph g = BuildOverlapGraph(t);
          const CostMatrix cm = ComputeCostMatrix(t, s);
          return AssignmentDict(SolverFromString(solver) == Solver::kDp
                                    ? SolveDp(g, cm, t, c)
                                    : SolveBruteForce(g, cm, c));
        },
        py::arg("timeline"), py::arg("vad"), py::arg("solver") = "dp",
        "Loss-minimizing utterance-to-channel assignment.");

  m.def("assignment_loss",
        [](const Timeline &t, const Array &vad, const std::vector<int> &channels) {
          const ScoreMatrix s = ToScores(vad, LabelKind::kVad, t.frame_rate());
          return ComputeCostMatrix(t, s).Evaluate(
                     ToAssignment(channels, static_cast<int>(s.num_channels()))) /
                 static_cast<double>(s.num_frames() * s.num_channels());
        },
        py::arg("timeline"), py::arg("vad"), py::arg("channels"),
        "Mean BCE of the VAD targets rendered from a fixed assignment.");

  m.def("widen_ubd",
        [](const py::array_t<uint8_t, py::array::c_style | py::array::forcecast> &grid,
           int width) {
          if (grid.ndim() != 2) throw InvalidInput("grid must be 2-D");
          Matrix<uint8_t> g(grid.shape(0), grid.shape(1));
          std::copy(grid.data(), grid.data() + grid.size(), g.data().begin());
          return FromMatrix(WidenUbdLabels(g, width));
        },
        py::arg("grid"), py::arg("width"));

  m.def("embedding_loss",
        [](const Array &vectors, const std::vector<std::string> &speakers, double margin) {
          if (vectors.ndim() != 2 || static_cast<std::size_t>(vectors.shape(0)) != speakers.size())
            throw InvalidInput("need one speaker per embedding row");
          std::vector<LabeledEmbedding> e(speakers.size());
          for (std::size_t i = 0; i < e.size(); ++i) {
            e[i].vector.assign(vectors.data(i, 0), vectors.data(i, 0) + vectors.shape(1));
            e[i].speaker = speakers[i];
          }
          return EmbeddingLoss(e, margin);
        },
        py::arg("embeddings"), py::arg("speakers"), py::arg("margin") = 1.0);

  m.def("compute_losses",
        [](const Timeline &t, const Array &vad, const Array &ubd, const Array &emb,
           const py::object &config) {
          const PipelineConfig cfg = ToConfig(config);
          const LossBreakdown l =
              ComputeLosses(t, ToScores(vad, LabelKind::kVad, t.frame_rate()),
                            ToScores(ubd, LabelKind::kUbd, t.frame_rate()),
                            ToEmbeddings(emb), cfg);
          return ToPython(LossBreakdownToJson(l));
        },
        py::arg("timeline"), py::arg("vad"), py::arg("ubd"), py::arg("embeddings"),
        py::arg("config") = py::none(),
        "VAD, UBD, embedding and weighted total loss for one meeting.");

  m.def("decode",
        [](const Array &vad, const Array &ubd, const py::object &config) {
          const PipelineConfig cfg = ToConfig(config);
          const auto utts = Decode(ToScores(vad, LabelKind::kVad, cfg.frame_rate),
                                   ToScores(ubd, LabelKind::kUbd, cfg.frame_rate),
                                   cfg.decoder);
          py::list out;
          for (const auto &u : utts) {
            py::dict d;
            d["id"] = u.id;
            d["start"] = u.start;
            d["end"] = u.end;
            d["channel"] = u.channel;
            d["confidence"] = u.confidence;
            out.append(d);
          }
          return out;
        },
        py::arg("vad"), py::arg("ubd"), py::arg("config") = py::none());

  m.def("cluster",
        [](const Array &vectors, const std::set<std::pair<int, int>> &cannot_links,
           std::optional<int> num_speakers, double stop_threshold) {
          if (vectors.ndim() != 2) throw InvalidInput("embeddings must be 2-D");
          std::vector<UtteranceEmbedding> e(vectors.shape(0));
          for (std::size_t i = 0; i < e.size(); ++i) {
            e[i].utterance_id = static_cast<int>(i);
            e[i].vector.assign(vectors.data(i, 0), vectors.data(i, 0) + vectors.shape(1));
          }
          const ClusterResult r = Cluster(e, cannot_links, {num_speakers, stop_threshold});
          py::dict d;
          d["labels"] = r.labels;
          d["num_clusters"] = r.num_clusters;
          d["constraint_limited"] = r.constraint_limited;
          return d;
        },
        py::arg("embeddings"), py::arg("cannot_links") = std::set<std::pair<int, int>>{},
        py::arg("num_speakers") = py::none(), py::arg("stop_threshold") = 1.0,
        "Constrained average-linkage clustering; cannot_links index embedding rows.");

  m.def("diarize",
        [](const Array &vad, const Array &ubd, const Array &emb, const py::object &config,
           const std::string &recording_id) {
          const PipelineConfig cfg = ToConfig(config);
          const DiarizeResult r = Diarize(ToScores(vad, LabelKind::kVad, cfg.frame_rate),
                                          ToScores(ubd, LabelKind::kUbd, cfg.frame_rate),
                                          ToEmbeddings(emb), cfg, recording_id);
          return WriteRttm(r.diarization);
        },
        py::arg("vad"), py::arg("ubd"), py::arg("embeddings"), py::arg("config") = py::none(),
        py::arg("recording_id") = "rec", "Posteriors and embeddings to RTTM text.");

  m.def("score",
        [](const std::string &ref, const std::string &hyp, double collar) {
          return DerDict(ScoreDer(SingleRecording(ref), SingleRecording(hyp), collar));
        },
        py::arg("reference"), py::arg("hypothesis"), py::arg("collar") = 0.25,
        "DER of one recording given as RTTM text; values are percentages.");

  m.def("simulate",
        [](std::size_t index, const py::object &config) {
          const PipelineConfig cfg = ToConfig(config);
          const Meeting mt = SimulateMeeting(cfg.simulator, index);
          py::dict d;
          d["id"] = mt.id;
          d["timeline"] = mt.timeline;
          d["vad"] = FromMatrix(mt.posteriors.vad.values);
          d["ubd"] = FromMatrix(mt.posteriors.ubd.values);
          d["channels"] = mt.posteriors.assignment.channel_of;
          d["embeddings"] = FromEmbeddings(mt.embeddings);
          d["reference"] = WriteRttm(mt.reference);
          d["overlap_ratio"] = mt.overlap_ratio;
          d["dropped"] = mt.dropped.size();
          return d;
        },
        py::arg("index") = 0, py::arg("config") = py::none(),
        "Meeting `index` of the simulated corpus defined by config.");

  m.def("default_config", [] { return ToPython(PipelineConfigToJson({})); });
}
