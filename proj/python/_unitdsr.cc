// python/_unitdsr.cc

// Copyright 2026  The unitdsr Authors

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

// Python bindings for the main operations.

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "unitdsr/checkpoint.h"
#include "unitdsr/codec.h"
#include "unitdsr/ctc.h"
#include "unitdsr/dsp.h"
#include "unitdsr/errors.h"
#include "unitdsr/eval.h"
#include "unitdsr/log.h"
#include "unitdsr/normalizer.h"
#include "unitdsr/pipeline.h"
#include "unitdsr/toy_corpus.h"
#include "unitdsr/vocoder.h"

namespace py = pybind11;
using namespace unitdsr;

namespace {

Waveform MakeWave(std::vector<double> samples, int rate) {
  Waveform w;
  w.samples = std::move(samples);
  w.sample_rate_hz = rate;
  return w;
}

FrameFeatures MakeFeatures(const Matrix& frames) {
  FrameFeatures f;
  f.frames = frames;
  return f;
}

PipelineConfig ConfigFrom(const std::map<std::string, std::string>& overrides, bool toy) {
  PipelineConfig cfg = toy ? ToyPipelineConfig() : DefaultPipelineConfig();
  for (const auto& [k, v] : overrides) SetConfigValue(&cfg, k, v);
  return cfg;
}

py::dict WerDict(const WerResult& r) {
  py::dict d;
  d["wer"] = r.wer;
  d["substitutions"] = r.counts.substitutions;
  d["insertions"] = r.counts.insertions;
  d["deletions"] = r.counts.deletions;
  d["ref_words"] = r.ref_words;
  return d;
}

}  // namespace

PYBIND11_MODULE(_unitdsr, m) {
  m.doc() = "Unit-based dysarthric speech reconstruction toolkit";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
#define UNITDSR_EXC(Name) py::register_exception<Name>(m, #Name, base.ptr())
  UNITDSR_EXC(AllSilentError);
  UNITDSR_EXC(DomainError);
  UNITDSR_EXC(ZeroSignalError);
  UNITDSR_EXC(TooShortError);
  UNITDSR_EXC(InsufficientDataError);
  UNITDSR_EXC(DimensionMismatchError);
  UNITDSR_EXC(EmptySequenceError);
  UNITDSR_EXC(EmptyReferenceError);
  UNITDSR_EXC(UnitRangeError);
  UNITDSR_EXC(EmptyDatasetError);
  UNITDSR_EXC(DivisionDomainError);
  UNITDSR_EXC(EmptyCollectionError);
  UNITDSR_EXC(IoError);
  UNITDSR_EXC(FieldCountError);
  UNITDSR_EXC(DuplicateIdError);
  UNITDSR_EXC(ManifestError);
  UNITDSR_EXC(ConfigError);
  UNITDSR_EXC(MissingPrerequisiteError);
  UNITDSR_EXC(ConfigMismatchError);
  UNITDSR_EXC(VersionError);
  UNITDSR_EXC(CorruptFileError);
#undef UNITDSR_EXC

  m.def("set_verbose", [](bool on) { SetLogLevel(on ? LogLevel::kInfo : LogLevel::kWarning); });

  // dsp
  m.def("read_wav", [](const std::string& p) {
    const Waveform w = ReadWav(p);
    return py::make_tuple(w.samples, w.sample_rate_hz);
  }, py::arg("path"), "Returns (samples, sample_rate).");
  m.def("write_wav", [](const std::string& p, std::vector<double> s, int rate) {
    WriteWav(p, MakeWave(std::move(s), rate));
  }, py::arg("path"), py::arg("samples"), py::arg("sample_rate") = kCanonicalSampleRate);
  m.def("trim_silence", [](std::vector<double> s, int rate) {
    return TrimSilence(MakeWave(std::move(s), rate)).samples;
  }, py::arg("samples"), py::arg("sample_rate") = kCanonicalSampleRate);
  m.def("speed_perturb", [](std::vector<double> s, double ratio, int rate) {
    return SpeedPerturb(MakeWave(std::move(s), rate), ratio).samples;
  }, py::arg("samples"), py::arg("ratio"), py::arg("sample_rate") = kCanonicalSampleRate);
  m.def("add_noise_at_snr", [](std::vector<double> s, double snr, std::uint64_t seed, int rate) {
    return AddNoiseAtSnr(MakeWave(std::move(s), rate), snr, seed).samples;
  }, py::arg("samples"), py::arg("snr_db"), py::arg("seed"),
     py::arg("sample_rate") = kCanonicalSampleRate);
  m.def("extract_features", [](std::vector<double> s, int rate) {
    return ExtractFeatures(MakeWave(std::move(s), rate), FeatureConfig{}).frames;
  }, py::arg("samples"), py::arg("sample_rate") = kCanonicalSampleRate,
     "Stand-in log-mel frames, T x 80.");

  // codec
  m.def("fit_kmeans", [](const Matrix& points, int k, std::uint64_t seed, int max_iter) {
    KMeansOptions o;
    o.k = k;
    o.seed = seed;
    o.max_iter = max_iter;
    const UnitCodebook cb = FitKMeans(points, o);
    return py::make_tuple(cb.centroids, cb.meta.inertia_trace);
  }, py::arg("points"), py::arg("k"), py::arg("seed") = 0, py::arg("max_iter") = 100,
     "Returns (centroids, inertia_trace).");
  m.def("quantize", [](const Matrix& frames, const Matrix& centroids) {
    return NearestCentroids(frames, centroids);
  }, py::arg("frames"), py::arg("centroids"));
  m.def("dedup", [](const std::vector<int>& u) { return Dedup(u).units(); });
  m.def("run_length_encode", [](const std::vector<int>& u) {
    UnitSequence s;
    s.units = u;
    const RunLengthEncoding r = RunLengthEncode(s);
    return py::make_tuple(r.units.units(), r.durations.durations);
  });
  m.def("expand_runs", [](const std::vector<int>& u, const std::vector<int>& d) {
    DurationSequence ds;
    ds.durations = d;
    return ExpandRuns(NormUnitSequence(u), ds).units;
  });
  m.def("unit_error_rate", [](const std::vector<int>& hyp, const std::vector<int>& ref) {
    return UnitErrorRate(Dedup(hyp), Dedup(ref));
  });

  // ctc
  m.def("ctc_loss", [](const Matrix& logits, const std::vector<int>& target) {
    const CtcResult r = CtcForwardBackward(logits, target);
    return py::make_tuple(r.loss, r.grad);
  }, py::arg("logits"), py::arg("target"), "Returns (loss, d loss / d logits).");
  m.def("ctc_greedy_decode", [](const Matrix& logits) { return CtcGreedyDecode(logits).units(); });

  // eval
  m.def("word_error_rate", [](const std::string& h, const std::string& r) {
    return WerDict(WordErrorRate(h, r));
  }, py::arg("hyp"), py::arg("ref"));
  m.def("relative_reduction", &RelativeReduction, py::arg("wer_system"), py::arg("wer_original"));
  m.def("aggregate_deltas", [](const std::vector<double>& deltas) {
    std::vector<EvalRecord> recs(deltas.size());
    for (std::size_t i = 0; i < deltas.size(); ++i) recs[i].delta = deltas[i];
    return AggregateDeltas(recs);
  });
  m.def("format_one_decimal", &FormatOneDecimal);
  m.def("check_reported_row", [](const std::string& spk, double orig, double sys, double delta) {
    const RowConsistency c = CheckReportedRow({spk, orig, sys, delta});
    py::dict d;
    d["computed_delta"] = c.computed_delta;
    d["consistent"] = c.consistent;
    d["backsolved_original"] = c.backsolved_original;
    return d;
  });

  // models
  py::class_<NormalizerModel>(m, "Normalizer")
      .def_static("load", [](const std::string& p) {
        return NormalizerModel::FromCheckpoint(LoadCheckpoint(p));
      })
      .def_property_readonly("num_units", [](const NormalizerModel& n) { return n.config().num_units; })
      .def_property_readonly("last_stage", [](const NormalizerModel& n) { return n.last_stage; })
      .def("logits", [](const NormalizerModel& n, const Matrix& frames) {
        return n.ForwardLogits(MakeFeatures(frames));
      })
      .def("normalize", [](const NormalizerModel& n, std::vector<double> s, int rate) {
        return Normalize(n, MakeWave(std::move(s), rate), FeatureConfig{}).units();
      }, py::arg("samples"), py::arg("sample_rate") = kCanonicalSampleRate);

  py::class_<UnitVocoder>(m, "Vocoder")
      .def_static("load", [](const std::string& p) {
        return UnitVocoder::FromCheckpoint(LoadCheckpoint(p));
      })
      .def_property_readonly("speakers", &UnitVocoder::speakers)
      .def("predict_durations", [](const UnitVocoder& v, const std::vector<int>& u) {
        return v.PredictDurations(NormUnitSequence(u));
      })
      .def("synthesize", [](const UnitVocoder& v, const std::vector<int>& u,
                            const std::string& spk,
                            std::optional<std::vector<int>> durations) {
        return v.GenerateWaveform(NormUnitSequence(u), spk, durations).samples;
      }, py::arg("units"), py::arg("speaker"), py::arg("durations") = py::none());

  // pipeline
  m.def("make_toy_corpus", [](const std::string& dir, int words, std::uint64_t seed) {
    ToyCorpusOptions o;
    o.num_words = words;
    o.seed = seed;
    return WriteToyCorpus(MakeToyCorpus(o), dir);
  }, py::arg("out_dir"), py::arg("words") = 20, py::arg("seed") = 7,
     "Writes wavs and a manifest; returns the manifest path.");
  m.def("parse_manifest", [](const std::string& p) {
    py::list out;
    for (const auto& r : ParseManifest(p)) {
      py::dict d;
      d["utterance_id"] = r.utterance_id;
      d["audio_path"] = r.audio_path;
      d["speaker_id"] = r.speaker_id;
      d["transcript"] = r.transcript;
      d["block"] = r.block_tag;
      d["health"] = ToString(r.health_tag);
      out.append(d);
    }
    return out;
  });
  m.def("config_keys", &ConfigKeys);
  m.def("dump_config", [](const std::map<std::string, std::string>& o, bool toy) {
    return DumpConfig(ConfigFrom(o, toy));
  }, py::arg("overrides") = std::map<std::string, std::string>{}, py::arg("toy") = true);
  m.def("run_pipeline", [](const std::map<std::string, std::string>& o,
                           const std::vector<int>& stages, bool toy) {
    PipelineResult r;
    {
      py::gil_scoped_release release;
      r = RunPipeline(ConfigFrom(o, toy), stages);
    }
    py::dict d;
    d["label"] = r.label;
    d["run_dir"] = r.run_dir;
    d["summary"] = r.summary_path;
    d["train_uer"] = r.train_uer;
    d["test_uer"] = r.test_uer;
    d["artifacts"] = r.artifacts;
    d["seeds"] = r.seeds;
    py::list stages_out;
    for (const auto& s : r.stage_runs) {
      py::dict sd;
      sd["stage"] = s.stage;
      sd["label"] = s.label;
      sd["checkpoint"] = s.checkpoint;
      sd["reused"] = s.reused;
      sd["init_checksum"] = s.init_checksum;
      sd["final_checksum"] = s.final_checksum;
      stages_out.append(sd);
    }
    d["stages"] = stages_out;
    return d;
  }, py::arg("overrides"), py::arg("stages") = std::vector<int>{1, 2, 3}, py::arg("toy") = true,
     "overrides maps config keys to values, e.g. {'manifest': ..., 'output_dir': ...}.");
}
