// Copyright 2026 The weakbound Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Python bindings for the main operations. Images cross the boundary as
// C-contiguous numpy arrays: (H, W, 3) uint8 for colour, (H, W) otherwise.
// Tri-state masks use their on-disk codes 0 / 128 / 255.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstring>

#include "weakbound/annotate.hpp"
#include "weakbound/bench.hpp"
#include "weakbound/fuse.hpp"
#include "weakbound/forest.hpp"
#include "weakbound/grabcut.hpp"
#include "weakbound/maxflow.hpp"
#include "weakbound/pipeline.hpp"
#include "weakbound/segment.hpp"
#include "weakbound/synth.hpp"

namespace py = pybind11;
using namespace weakbound;

namespace {

template <typename T>
using Array = py::array_t<T, py::array::c_style | py::array::forcecast>;

template <typename Out, typename In>
Raster<Out> to_raster(const Array<In>& a) {
  if (a.ndim() != 2) throw ParameterError("expected a 2-D array");
  const int h = static_cast<int>(a.shape(0)), w = static_cast<int>(a.shape(1));
  Raster<Out> r(w, h);
  const In* src = a.data();
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = static_cast<Out>(src[i]);
  return r;
}

template <typename Out, typename In>
py::array_t<Out> to_array(const Raster<In>& r) {
  py::array_t<Out> a({r.height(), r.width()});
  Out* dst = a.mutable_data();
  for (std::size_t i = 0; i < r.size(); ++i) dst[i] = static_cast<Out>(r[i]);
  return a;
}

RgbImage to_rgb(const Array<std::uint8_t>& a) {
  if (a.ndim() != 3 || a.shape(2) != 3) throw ParameterError("expected an (H, W, 3) array");
  RgbImage img(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
  std::memcpy(img.pixels().data(), a.data(), img.size() * 3);
  return img;
}

py::array_t<std::uint8_t> from_rgb(const RgbImage& img) {
  py::array_t<std::uint8_t> a({img.height(), img.width(), 3});
  std::memcpy(a.mutable_data(), img.pixels().data(), img.size() * 3);
  return a;
}

TriStateMask to_tri(const Array<std::uint8_t>& a) {
  TriStateMask m = to_raster<Tri>(a);
  for (auto v : m.pixels())
    if (v != Tri::Negative && v != Tri::Ignore && v != Tri::Positive)
      throw ParameterError("tri-state values must be 0, 128 or 255");
  return m;
}

py::array_t<std::uint8_t> from_tri(const TriStateMask& m) {
  py::array_t<std::uint8_t> a({m.height(), m.width()});
  std::memcpy(a.mutable_data(), m.pixels().data(), m.size());
  return a;
}

Rect to_rect(const std::array<int, 4>& b) { return {b[0], b[1], b[2], b[3]}; }

std::vector<DetectionBox> to_boxes(const std::vector<py::tuple>& dets) {
  std::vector<DetectionBox> out;
  for (const auto& t : dets) {
    if (t.size() != 3) throw ParameterError("detections are (class, score, (x0, y0, x1, y1)) tuples");
    out.push_back({t[0].cast<int>(), t[1].cast<double>(), to_rect(t[2].cast<std::array<int, 4>>())});
  }
  return out;
}

py::dict summary_dict(const PrSummary& s) {
  py::dict d;
  d["ods"] = s.ods_f;
  d["ois"] = s.ois_f;
  d["ap"] = s.ap;
  d["ods_threshold"] = s.ods_threshold;
  std::vector<std::array<double, 3>> pts;
  for (const auto& p : s.points) pts.push_back({p.precision, p.recall, p.f});
  d["points"] = pts;
  d["thresholds"] = s.thresholds;
  return d;
}

}  // namespace

PYBIND11_MODULE(_weakbound, m) {
  m.doc() = "Weakly supervised boundary detection";

  // Translators are tried newest first, so the base class goes first.
  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ParameterError>(m, "ParameterError", PyExc_ValueError);
  py::register_exception<VersionError>(m, "VersionError", PyExc_RuntimeError);
  py::register_exception<DataError>(m, "DataError", PyExc_OSError);

  m.def(
      "fh_segment",
      [](const Array<std::uint8_t>& image, double k, double sigma, int min_size) {
        FhParams p;
        p.k = k;
        p.sigma = sigma;
        p.min_size = min_size;
        return to_array<std::int32_t>(fh_segment(to_rgb(image), p).labels);
      },
      py::arg("image"), py::arg("k") = 300.0, py::arg("sigma") = 0.8, py::arg("min_size") = 100);

  m.def(
      "grabcut",
      [](const Array<std::uint8_t>& image, std::array<int, 4> box, int iterations) {
        const GrabCutResult r = grabcut(to_rgb(image), to_rect(box), iterations);
        return py::make_tuple(to_array<std::uint8_t>(r.mask), r.energy_trace);
      },
      py::arg("image"), py::arg("box"), py::arg("iterations") = 5,
      "Returns (mask, energy_trace) for a box (x0, y0, x1, y1).");

  m.def(
      "label_boundaries", [](const Array<std::int32_t>& labels) {
        return to_array<std::uint8_t>(label_boundaries(to_raster<std::int32_t>(labels)));
      },
      py::arg("labels"));

  m.def(
      "quantile_mask", [](const Array<float>& prob, double q) { return from_tri(quantile_mask(to_raster<float>(prob), q)); },
      py::arg("prob"), py::arg("q") = 0.15);

  m.def(
      "intersect_sources",
      [](const std::vector<Array<std::uint8_t>>& sources, int tol) {
        std::vector<BinaryMap> maps;
        for (const auto& s : sources) maps.push_back(to_raster<std::uint8_t>(s));
        return from_tri(intersect_sources(maps, tol));
      },
      py::arg("sources"), py::arg("tol") = 1);

  m.def(
      "objectness",
      [](const std::vector<py::tuple>& dets, int width, int height, float floor) {
        return to_array<float>(objectness(to_boxes(dets), width, height, floor));
      },
      py::arg("detections"), py::arg("width"), py::arg("height"), py::arg("floor") = 0.0f);

  m.def(
      "fuse", [](const Array<float>& b, const Array<float>& o) {
        return to_array<float>(fuse(to_raster<float>(b), to_raster<float>(o)));
      },
      py::arg("boundary"), py::arg("objectness"));

  m.def(
      "nms_thin", [](const Array<float>& prob) { return to_array<float>(nms_thin(to_raster<float>(prob))); },
      py::arg("prob"));

  m.def(
      "correspond",
      [](const Array<std::uint8_t>& cand, const std::vector<Array<std::uint8_t>>& gts, double max_dist) {
        std::vector<BinaryMap> g;
        for (const auto& a : gts) g.push_back(to_raster<std::uint8_t>(a));
        const MatchCounts c = correspond(to_raster<std::uint8_t>(cand), g, max_dist);
        py::dict d;
        d["tp"] = c.tp;
        d["fp"] = c.fp;
        d["sum_r_tp"] = c.sum_r_tp;
        d["sum_r_total"] = c.sum_r_total;
        return d;
      },
      py::arg("candidate"), py::arg("gts"), py::arg("max_dist") = 0.01);

  m.def(
      "evaluate",
      [](const std::vector<Array<float>>& probs, const std::vector<std::vector<Array<std::uint8_t>>>& gts, int n_thresh,
         double max_dist, bool relative) {
        if (probs.size() != gts.size()) throw ParameterError("evaluate: one GT list per prediction");
        std::vector<EvalItem> items;
        for (std::size_t i = 0; i < probs.size(); ++i) {
          EvalItem it{std::to_string(i), to_raster<float>(probs[i]), {}};
          for (const auto& g : gts[i]) it.gts.push_back(to_raster<std::uint8_t>(g));
          items.push_back(std::move(it));
        }
        PrOptions o;
        o.n_thresh = n_thresh;
        o.max_dist = max_dist;
        o.mode = relative ? ThresholdMode::Relative : ThresholdMode::Absolute;
        return summary_dict(pr_curve(items, o));
      },
      py::arg("probs"), py::arg("gts"), py::arg("n_thresh") = 99, py::arg("max_dist") = 0.01,
      py::arg("relative") = true);

  py::class_<MaxFlowGraph>(m, "MaxFlowGraph")
      .def(py::init<int>(), py::arg("num_nodes") = 0)
      .def("add_node", &MaxFlowGraph::add_node)
      .def("add_terminal", &MaxFlowGraph::add_terminal, py::arg("node"), py::arg("cap_source"), py::arg("cap_sink"))
      .def("add_edge", &MaxFlowGraph::add_edge, py::arg("a"), py::arg("b"), py::arg("cap_ab"), py::arg("cap_ba"))
      .def("solve", &MaxFlowGraph::solve)
      .def("in_source_segment", &MaxFlowGraph::in_source_segment, py::arg("node"));

  py::class_<EdgeForest>(m, "EdgeForest")
      .def_property_readonly("num_trees", [](const EdgeForest& f) { return f.trees.size(); })
      .def_readonly("seed", &EdgeForest::seed)
      .def("header", &forest_header_json)
      .def("serialize", [](const EdgeForest& f) { return py::bytes(serialize_forest(f)); })
      .def("save", [](const EdgeForest& f, const std::filesystem::path& p) { save_forest(p, f); }, py::arg("path"))
      .def_static("load", &load_forest, py::arg("path"));

  m.def(
      "train_forest",
      [](const std::vector<Array<std::uint8_t>>& images, const std::vector<Array<std::uint8_t>>& annotations, int n_trees,
         int n_pos, int n_neg, std::uint64_t seed, int jobs) {
        if (images.size() != annotations.size()) throw ParameterError("train_forest: one annotation per image");
        std::vector<FeatureChannels> ch;
        std::vector<TriStateMask> an;
        for (std::size_t i = 0; i < images.size(); ++i) {
          ch.push_back(compute_channels(to_rgb(images[i])));
          an.push_back(to_tri(annotations[i]));
        }
        ForestParams p;
        p.n_trees = n_trees;
        p.sampling.n_pos = n_pos;
        p.sampling.n_neg = n_neg;
        p.seed = seed;
        py::gil_scoped_release release;
        return train_forest(ch, an, p, jobs);
      },
      py::arg("images"), py::arg("annotations"), py::arg("n_trees") = 8, py::arg("n_pos") = 500, py::arg("n_neg") = 500,
      py::arg("seed") = 1, py::arg("jobs") = 1);

  m.def(
      "predict",
      [](const EdgeForest& f, const Array<std::uint8_t>& image, int stride, int jobs) {
        const RgbImage img = to_rgb(image);
        ProbMap out;
        {
          py::gil_scoped_release release;
          out = predict(f, img, stride, jobs);
        }
        return to_array<float>(out);
      },
      py::arg("forest"), py::arg("image"), py::arg("stride") = 2, py::arg("jobs") = 1);

  m.def(
      "synth_sample",
      [](int width, int height, std::uint64_t seed, std::size_t index) {
        SynthParams p;
        p.width = width;
        p.height = height;
        const SynthSample s = synth_sample(p, seed, index);
        std::vector<py::tuple> dets;
        for (const auto& d : s.detections)
          dets.push_back(py::make_tuple(d.class_id, d.score,
                                        py::make_tuple(d.rect.x0, d.rect.y0, d.rect.x1, d.rect.y1)));
        py::dict out;
        out["id"] = s.id;
        out["image"] = from_rgb(s.image);
        out["instances"] = to_array<std::int32_t>(s.instances);
        out["detections"] = dets;
        out["annotation"] = from_tri(boundary_annotation(s.instances));
        return out;
      },
      py::arg("width") = 128, py::arg("height") = 128, py::arg("seed") = 1, py::arg("index") = 0);

  m.def(
      "run_stage",
      [](const std::string& stage, const std::filesystem::path& config) {
        const PipelineConfig cfg = load_config(config);
        py::gil_scoped_release release;
        StageResult r;
        if (stage == "annotate") r = cmd_annotate(cfg);
        else if (stage == "train") r = cmd_train(cfg);
        else if (stage == "predict") r = cmd_predict(cfg);
        else if (stage == "fuse") r = cmd_fuse(cfg);
        else if (stage == "eval") r = cmd_eval(cfg);
        else if (stage == "report") r = cmd_report(cfg);
        else if (stage == "synth") r = cmd_synth(cfg, cfg.dataset.root.empty() ? cfg.output : cfg.dataset.root);
        else throw ConfigError("unknown stage: " + stage);
        return r.dir;
      },
      py::arg("stage"), py::arg("config"), "Runs one pipeline stage and returns its output directory.");
}
