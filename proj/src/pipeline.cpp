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

#include "weakbound/pipeline.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>

#include <json.hpp>

#include "weakbound/detections.hpp"
#include "weakbound/fuse.hpp"
#include "weakbound/image_io.hpp"
#include "weakbound/parallel.hpp"

namespace weakbound {
namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

// Typed, strict view of one JSON object: every key must be consumed.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + " must be a JSON object");
  }
  ~Section() = default;

  template <typename T>
  void read(const std::string& key, T& out) {
    const auto it = j_.find(key);
    if (it == j_.end()) return;
    used_.insert(key);
    const json& v = *it;
    const std::string where = path_ + "." + key;
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError(where + " must be a boolean");
      out = v.get<bool>();
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError(where + " must be a string");
      out = v.get<std::string>();
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw ConfigError(where + " must be an integer");
      if constexpr (std::is_unsigned_v<T>) {
        if (v.get<std::int64_t>() < 0 && !v.is_number_unsigned()) throw ConfigError(where + " must be >= 0");
        out = static_cast<T>(v.get<std::uint64_t>());
      } else {
        out = static_cast<T>(v.get<std::int64_t>());
      }
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw ConfigError(where + " must be a number");
      out = static_cast<T>(v.get<double>());
    } else {
      static_assert(sizeof(T) == 0, "unsupported config type");
    }
  }

  std::optional<Section> child(const std::string& key) {
    const auto it = j_.find(key);
    if (it == j_.end() || it->is_null()) {
      if (it != j_.end()) used_.insert(key);
      return std::nullopt;
    }
    used_.insert(key);
    return Section(*it, path_ + "." + key);
  }

  const json* raw(const std::string& key) {
    const auto it = j_.find(key);
    if (it == j_.end()) return nullptr;
    used_.insert(key);
    return &*it;
  }

  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!used_.count(k)) throw ConfigError("unknown key '" + k + "' in " + path_);
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

void require_unit(double v, const std::string& what) {
  if (!(v >= 0 && v <= 1)) throw ConfigError(what + " must lie in [0,1]");
}

fs::path resolve(const fs::path& base, const fs::path& p) { return p.is_absolute() ? p : base / p; }

std::string to_lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

void write_text_atomic(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::string file_sha1(const fs::path& p) { return sha1_hex(read_file(p)); }

fs::path dataset_path(const PipelineConfig& cfg, const std::string& sub) { return cfg.dataset.root / sub; }

void require_root(const PipelineConfig& cfg) {
  if (cfg.dataset.root.empty()) throw ConfigError("dataset.root is required");
  if (!fs::is_directory(cfg.dataset.root))
    throw ConfigError("dataset root does not exist: " + cfg.dataset.root.string());
}

std::map<std::string, std::vector<DetectionBox>> detections_by_image(const PipelineConfig& cfg, bool required) {
  const fs::path p = dataset_path(cfg, cfg.dataset.detections);
  if (!fs::exists(p)) {
    if (required) throw DataError("detections file not found: " + p.string());
    return {};
  }
  return group_by_image(load_detections(p));
}

// Per-image result slot filled by parallel workers.
struct Entry {
  std::string id;
  std::string file;
  std::string sha1;
  std::string skip_reason;
};

std::string manifest_json(const std::string& stage, const PipelineConfig& cfg, const std::vector<Entry>& entries,
                          ojson extra = ojson::object()) {
  ojson j;
  j["stage"] = stage;
  j["config_sha1"] = sha1_hex(cfg.canonical);
  j["seed"] = cfg.seed;
  ojson list = ojson::array(), skipped = ojson::array();
  for (const auto& e : entries) {
    if (!e.skip_reason.empty())
      skipped.push_back({{"id", e.id}, {"reason", e.skip_reason}});
    else
      list.push_back({{"id", e.id}, {"file", e.file}, {"sha1", e.sha1}});
  }
  j["entries"] = list;
  j["skipped"] = skipped;
  for (auto& [k, v] : extra.items()) j[k] = v;
  return j.dump(2) + "\n";
}

StageResult finish_stage(const fs::path& dir, const std::vector<Entry>& entries) {
  StageResult r;
  r.dir = dir;
  for (const auto& e : entries) {
    if (e.skip_reason.empty())
      ++r.written;
    else
      r.skipped.push_back(e.id);
  }
  return r;
}

std::string canonical_json(const PipelineConfig& c) {
  const auto& t = c.recipe.thresholds;
  const auto& f = c.train.forest;
  ojson j;
  j["seed"] = c.seed;
  j["annotation"] = {{"variant", std::string(variant_name(c.recipe.variant))},
                     {"score_min", t.score_min},
                     {"iou_grabcut", t.iou_grabcut},
                     {"iou_proposal", t.iou_proposal},
                     {"agreement", t.agreement},
                     {"quantile", t.quantile},
                     {"containment", t.containment},
                     {"consensus_tol", t.consensus_tol},
                     {"max_proposals", c.recipe.max_proposals},
                     {"fh", {{"k", c.recipe.fh.k}, {"sigma", c.recipe.fh.sigma}, {"min_size", c.recipe.fh.min_size}}},
                     {"grabcut",
                      {{"iterations", c.recipe.grabcut.iterations},
                       {"components", c.recipe.grabcut.components},
                       {"gamma", c.recipe.grabcut.gamma},
                       {"crop_padding", c.recipe.grabcut.crop_padding}}}};
  j["train"] = {{"annotations", c.train.annotations == "recipe" || c.train.annotations == "gt" ? c.train.annotations
                                                                                                  : std::string("dir")},
                {"n_trees", f.n_trees},
                {"max_depth", f.tree.max_depth},
                {"min_leaf", f.tree.min_leaf},
                {"features_per_node", f.tree.features_per_node},
                {"pixel_pairs", f.tree.pixel_pairs},
                {"histogram_bins", f.tree.histogram_bins},
                {"n_pos", f.sampling.n_pos},
                {"n_neg", f.sampling.n_neg},
                {"negative_margin", f.sampling.negative_margin}};
  j["predict"] = {{"stride", c.predict.stride}, {"split", c.predict.split}};
  j["fuse"] = {{"floor", c.fuse.floor}};
  j["eval"] = {{"max_dist", c.eval.pr.max_dist},
               {"n_thresh", c.eval.pr.n_thresh},
               {"threshold_mode", c.eval.pr.mode == ThresholdMode::Relative ? "relative" : "absolute"},
               {"thin", c.eval.pr.thin},
               {"nms", c.eval.nms},
               {"input", c.eval.input},
               {"sbd", c.eval.sbd}};
  j["dataset"] = {{"min_object_size", c.dataset.min_object_size},
                  {"min_object_mode", c.dataset.min_object_mode == SizeFilter::Area ? "area" : "side"}};
  return j.dump();
}

TriStateMask load_training_annotation(const PipelineConfig& cfg, const std::string& id) {
  if (cfg.train.annotations == "gt") return boundary_annotation(load_instances(cfg, id));
  const fs::path dir = cfg.train.annotations == "recipe"
                           ? cfg.output / "annotations" / std::string(variant_name(cfg.recipe.variant))
                           : fs::path(cfg.train.annotations);
  return load_tristate(dir / (id + ".pgm"));
}

fs::path model_path(const PipelineConfig& cfg) {
  return cfg.predict.model.empty() ? cfg.output / "model" / "forest.sedf" : fs::path(cfg.predict.model);
}

std::vector<std::string> read_id_list(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw DataError("cannot open split file " + p.string());
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (!line.empty()) ids.push_back(line);
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

}  // namespace

std::string sha1_hex(std::span<const std::uint8_t> bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha1(), nullptr) != 1) throw Error("SHA-1 failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 15]);
  }
  return out;
}

std::string sha1_hex(const std::string& text) {
  return sha1_hex(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

PipelineConfig parse_config(const std::string& text, const fs::path& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  PipelineConfig c;
  Section root(doc, "config");
  int version = 1;
  root.read("version", version);
  if (version != 1) throw ConfigError("unsupported config version " + std::to_string(version));
  root.read("seed", c.seed);
  root.read("jobs", c.jobs);
  std::string output = "out";
  root.read("output", output);
  c.output = resolve(base_dir, output);

  if (auto d = root.child("dataset")) {
    std::string r;
    d->read("root", r);
    if (!r.empty()) c.dataset.root = resolve(base_dir, r);
    d->read("images", c.dataset.images);
    d->read("gt", c.dataset.gt);
    d->read("detections", c.dataset.detections);
    d->read("train_split", c.dataset.train_split);
    d->read("test_split", c.dataset.test_split);
    d->read("proposals", c.dataset.proposals);
    d->read("se_probability", c.dataset.se_probability);
    d->read("instance_classes", c.dataset.instance_classes);
    d->read("min_object_size", c.dataset.min_object_size);
    std::string mode = "area";
    d->read("min_object_mode", mode);
    mode = to_lower(mode);
    if (mode == "area")
      c.dataset.min_object_mode = SizeFilter::Area;
    else if (mode == "side")
      c.dataset.min_object_mode = SizeFilter::Side;
    else
      throw ConfigError("dataset.min_object_mode must be 'area' or 'side'");
    d->finish();
  }

  if (auto a = root.child("annotation")) {
    std::string variant = std::string(variant_name(c.recipe.variant));
    a->read("variant", variant);
    c.recipe.variant = parse_variant(variant);
    auto& t = c.recipe.thresholds;
    a->read("score_min", t.score_min);
    a->read("iou_grabcut", t.iou_grabcut);
    a->read("iou_proposal", t.iou_proposal);
    a->read("agreement", t.agreement);
    a->read("quantile", t.quantile);
    a->read("containment", t.containment);
    a->read("consensus_tol", t.consensus_tol);
    a->read("max_proposals", c.recipe.max_proposals);
    if (auto fh = a->child("fh")) {
      fh->read("k", c.recipe.fh.k);
      fh->read("sigma", c.recipe.fh.sigma);
      fh->read("min_size", c.recipe.fh.min_size);
      fh->finish();
    }
    if (auto g = a->child("grabcut")) {
      g->read("iterations", c.recipe.grabcut.iterations);
      g->read("components", c.recipe.grabcut.components);
      g->read("gamma", c.recipe.grabcut.gamma);
      g->read("crop_padding", c.recipe.grabcut.crop_padding);
      g->finish();
    }
    a->finish();
    for (auto [v, name] : {std::pair{t.score_min, "score_min"}, {t.iou_grabcut, "iou_grabcut"},
                           {t.iou_proposal, "iou_proposal"}, {t.agreement, "agreement"}, {t.containment, "containment"}})
      require_unit(v, std::string("annotation.") + name);
    if (!(t.quantile > 0 && t.quantile < 1)) throw ConfigError("annotation.quantile must lie in (0,1)");
    if (t.consensus_tol < 0) throw ConfigError("annotation.consensus_tol must be >= 0");
    if (c.recipe.fh.k <= 0 || c.recipe.fh.min_size < 0) throw ConfigError("annotation.fh parameters out of range");
    if (c.recipe.grabcut.iterations < 1 || c.recipe.grabcut.components < 1)
      throw ConfigError("annotation.grabcut parameters out of range");
  }

  if (auto t = root.child("train")) {
    t->read("annotations", c.train.annotations);
    auto& f = c.train.forest;
    t->read("n_trees", f.n_trees);
    t->read("max_depth", f.tree.max_depth);
    t->read("min_leaf", f.tree.min_leaf);
    t->read("features_per_node", f.tree.features_per_node);
    t->read("pixel_pairs", f.tree.pixel_pairs);
    t->read("histogram_bins", f.tree.histogram_bins);
    t->read("n_pos", f.sampling.n_pos);
    t->read("n_neg", f.sampling.n_neg);
    t->read("negative_margin", f.sampling.negative_margin);
    t->finish();
    if (f.n_trees < 1 || f.tree.max_depth < 0 || f.tree.min_leaf < 1 || f.tree.features_per_node < 1 ||
        f.tree.pixel_pairs < 1 || f.tree.histogram_bins < 2 || f.sampling.n_pos < 0 || f.sampling.n_neg < 0 ||
        f.sampling.negative_margin < 0)
      throw ConfigError("train parameters out of range");
    if (c.train.annotations != "recipe" && c.train.annotations != "gt")
      c.train.annotations = resolve(base_dir, c.train.annotations).string();
  }
  c.train.forest.seed = c.seed;

  if (auto p = root.child("predict")) {
    p->read("stride", c.predict.stride);
    p->read("model", c.predict.model);
    p->read("split", c.predict.split);
    p->finish();
    if (c.predict.stride < 1) throw ConfigError("predict.stride must be >= 1");
    if (!c.predict.model.empty()) c.predict.model = resolve(base_dir, c.predict.model).string();
    if (c.predict.split != "train" && c.predict.split != "test" && c.predict.split != "all")
      throw ConfigError("predict.split must be train, test or all");
  }

  if (auto f = root.child("fuse")) {
    f->read("floor", c.fuse.floor);
    f->finish();
    require_unit(c.fuse.floor, "fuse.floor");
  }

  if (auto e = root.child("eval")) {
    e->read("max_dist", c.eval.pr.max_dist);
    e->read("n_thresh", c.eval.pr.n_thresh);
    std::string mode = "relative";
    e->read("threshold_mode", mode);
    mode = to_lower(mode);
    if (mode == "relative")
      c.eval.pr.mode = ThresholdMode::Relative;
    else if (mode == "absolute")
      c.eval.pr.mode = ThresholdMode::Absolute;
    else
      throw ConfigError("eval.threshold_mode must be 'relative' or 'absolute'");
    e->read("thin", c.eval.pr.thin);
    e->read("nms", c.eval.nms);
    e->read("input", c.eval.input);
    e->read("sbd", c.eval.sbd);
    e->finish();
    if (!(c.eval.pr.max_dist > 0 && c.eval.pr.max_dist < 1)) throw ConfigError("eval.max_dist must lie in (0,1)");
    if (c.eval.pr.n_thresh < 1) throw ConfigError("eval.n_thresh must be >= 1");
    if (c.eval.input != "predictions" && c.eval.input != "fused")
      throw ConfigError("eval.input must be 'predictions' or 'fused'");
  }

  if (const json* methods = root.raw("report")) {
    if (!methods->is_object()) throw ConfigError("config.report must be an object");
    Section rs(*methods, "config.report");
    if (const json* list = rs.raw("methods")) {
      if (!list->is_array()) throw ConfigError("report.methods must be an array");
      for (const auto& m : *list) {
        Section ms(m, "config.report.methods[]");
        ReportMethod rm;
        std::string dir;
        ms.read("name", rm.name);
        ms.read("eval_dir", dir);
        ms.finish();
        if (rm.name.empty() || dir.empty()) throw ConfigError("report methods need 'name' and 'eval_dir'");
        if (rm.name.find_first_of("/\\") != std::string::npos) throw ConfigError("report method names must not contain '/'");
        rm.eval_dir = resolve(base_dir, dir);
        c.report.push_back(std::move(rm));
      }
    }
    rs.finish();
  }

  if (auto s = root.child("synth")) {
    s->read("n_images", c.synth.n_images);
    s->read("n_train", c.synth.n_train);
    s->read("width", c.synth.params.width);
    s->read("height", c.synth.params.height);
    s->read("min_shapes", c.synth.params.min_shapes);
    s->read("max_shapes", c.synth.params.max_shapes);
    s->read("min_radius", c.synth.params.min_radius);
    s->read("max_radius", c.synth.params.max_radius);
    if (auto n = s->child("noise")) {
      n->read("jitter_sigma", c.synth.noise.jitter_sigma);
      n->read("drop_rate", c.synth.noise.drop_rate);
      n->read("spurious_rate", c.synth.noise.spurious_rate);
      n->finish();
    }
    s->finish();
    if (c.synth.n_images < 1) throw ConfigError("synth.n_images must be >= 1");
    if (c.synth.n_train > c.synth.n_images) throw ConfigError("synth.n_train exceeds synth.n_images");
    if (c.synth.params.width < 8 || c.synth.params.height < 8) throw ConfigError("synth images must be >= 8x8");
    if (c.synth.params.min_shapes < 1 || c.synth.params.max_shapes < c.synth.params.min_shapes)
      throw ConfigError("synth shape count range invalid");
    require_unit(c.synth.noise.drop_rate, "synth.noise.drop_rate");
    require_unit(c.synth.noise.spurious_rate, "synth.noise.spurious_rate");
    if (c.synth.noise.jitter_sigma < 0) throw ConfigError("synth.noise.jitter_sigma must be >= 0");
  }
  root.finish();
  c.canonical = canonical_json(c);
  return c;
}

std::string canonical_config(const PipelineConfig& cfg) { return canonical_json(cfg); }

PipelineConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), fs::absolute(path).parent_path());
}

std::vector<std::string> dataset_ids(const PipelineConfig& cfg, const std::string& split) {
  require_root(cfg);
  const fs::path images = dataset_path(cfg, cfg.dataset.images);
  if (split != "all") {
    const std::string& configured = split == "train" ? cfg.dataset.train_split : cfg.dataset.test_split;
    const fs::path list = configured.empty() ? cfg.dataset.root / "splits" / (split + ".txt")
                                             : cfg.dataset.root / configured;
    if (fs::exists(list)) return read_id_list(list);
    if (!configured.empty()) throw DataError("split file not found: " + list.string());
  }
  if (!fs::is_directory(images)) throw DataError("image directory not found: " + images.string());
  std::vector<std::string> ids;
  for (const auto& e : fs::directory_iterator(images))
    if (e.is_regular_file() && e.path().extension() == ".ppm") ids.push_back(e.path().stem().string());
  std::sort(ids.begin(), ids.end());
  return ids;
}

LabelMap filter_small_instances(const LabelMap& labels, int min_size, SizeFilter mode) {
  if (min_size <= 0) return labels;
  struct Extent {
    std::int64_t area = 0;
    int x0 = INT32_MAX, y0 = INT32_MAX, x1 = -1, y1 = -1;
  };
  std::map<std::int32_t, Extent> ext;
  for (int y = 0; y < labels.height(); ++y)
    for (int x = 0; x < labels.width(); ++x) {
      const auto l = labels(x, y);
      if (l <= 0) continue;
      auto& e = ext[l];
      ++e.area;
      e.x0 = std::min(e.x0, x);
      e.y0 = std::min(e.y0, y);
      e.x1 = std::max(e.x1, x);
      e.y1 = std::max(e.y1, y);
    }
  LabelMap out = labels;
  for (auto& v : out.pixels()) {
    if (v <= 0) continue;
    const auto& e = ext[v];
    const bool big = mode == SizeFilter::Area ? e.area > min_size
                                              : std::max(e.x1 - e.x0 + 1, e.y1 - e.y0 + 1) > min_size;
    if (!big) v = 0;
  }
  return out;
}

LabelMap load_instances(const PipelineConfig& cfg, const std::string& id) {
  const Gray16Image g = load_gray16(dataset_path(cfg, cfg.dataset.gt) / (id + ".pgm"));
  LabelMap labels(g.width(), g.height());
  for (std::size_t i = 0; i < g.size(); ++i) labels[i] = g[i];
  return filter_small_instances(labels, cfg.dataset.min_object_size, cfg.dataset.min_object_mode);
}

StageResult cmd_annotate(const PipelineConfig& cfg) {
  require_root(cfg);
  const Variant v = cfg.recipe.variant;
  const bool needs_proposals = v == Variant::McgBbs || v == Variant::ConsMcgBbs || v == Variant::ConsAllBbs;
  const bool needs_se = v == Variant::ConsSgBbs || v == Variant::SeQuantile;
  if (needs_proposals && cfg.dataset.proposals.empty())
    throw ConfigError(std::string(variant_name(v)) + " requires dataset.proposals (external proposal files)");
  if (needs_se && cfg.dataset.se_probability.empty())
    throw ConfigError(std::string(variant_name(v)) + " requires dataset.se_probability (SE probability maps)");
  if (needs_proposals && !fs::is_directory(dataset_path(cfg, cfg.dataset.proposals)))
    throw ConfigError("proposal directory not found: " + dataset_path(cfg, cfg.dataset.proposals).string());
  if (needs_se && !fs::is_directory(dataset_path(cfg, cfg.dataset.se_probability)))
    throw ConfigError("SE probability directory not found: " + dataset_path(cfg, cfg.dataset.se_probability).string());

  const auto ids = dataset_ids(cfg, "train");
  const auto dets = detections_by_image(cfg, true);
  const fs::path dir = cfg.output / "annotations" / std::string(variant_name(v));
  fs::create_directories(dir);
  std::vector<Entry> entries(ids.size());
  parallel_for(ids.size(), cfg.jobs, [&](std::size_t i) {
    Entry& e = entries[i];
    e.id = ids[i];
    const auto it = dets.find(e.id);
    if (it == dets.end()) {
      e.skip_reason = "no detections";
      return;
    }
    const RgbImage image = load_rgb(dataset_path(cfg, cfg.dataset.images) / (e.id + ".ppm"));
    ExternalInputs ext;
    if (needs_proposals) {
      const fs::path p = dataset_path(cfg, cfg.dataset.proposals) / (e.id + ".jsonl");
      if (!fs::exists(p)) {
        e.skip_reason = "no external proposals";
        return;
      }
      ext.proposals = load_proposals(p, e.id, image.width(), image.height());
    }
    if (needs_se) {
      const fs::path p = dataset_path(cfg, cfg.dataset.se_probability) / (e.id + ".pgm");
      if (!fs::exists(p)) {
        e.skip_reason = "no SE probability map";
        return;
      }
      ext.se_probability = load_prob_map(p);
    }
    const TriStateMask mask = build_annotation(cfg.recipe, image, it->second, ext);
    e.file = e.id + ".pgm";
    save_tristate(mask, dir / e.file);
    e.sha1 = file_sha1(dir / e.file);
  });
  write_text_atomic(dir / "manifest.json",
                    manifest_json("annotate", cfg, entries, {{"variant", std::string(variant_name(v))}}));
  return finish_stage(dir, entries);
}

StageResult cmd_train(const PipelineConfig& cfg) {
  require_root(cfg);
  const auto ids = dataset_ids(cfg, "train");
  std::vector<Entry> entries(ids.size());
  std::vector<std::optional<TriStateMask>> annots(ids.size());
  parallel_for(ids.size(), cfg.jobs, [&](std::size_t i) {
    entries[i].id = ids[i];
    try {
      annots[i] = load_training_annotation(cfg, ids[i]);
    } catch (const DataError&) {
      entries[i].skip_reason = "no annotation";
    }
  });
  std::vector<std::size_t> used;
  for (std::size_t i = 0; i < ids.size(); ++i)
    if (annots[i]) used.push_back(i);
  if (used.empty()) throw DataError("no training annotations found");

  std::vector<FeatureChannels> channels(used.size());
  std::vector<TriStateMask> masks(used.size());
  parallel_for(used.size(), cfg.jobs, [&](std::size_t k) {
    const auto& id = ids[used[k]];
    const RgbImage image = load_rgb(dataset_path(cfg, cfg.dataset.images) / (id + ".ppm"));
    if (image.width() != annots[used[k]]->width() || image.height() != annots[used[k]]->height())
      throw DataError("annotation size differs from image for " + id);
    channels[k] = compute_channels(image);
    masks[k] = std::move(*annots[used[k]]);
  });

  std::string digest_input = cfg.canonical;
  for (std::size_t k = 0; k < used.size(); ++k) {
    const auto bytes = encode_pnm([&] {
      GrayImage g(masks[k].width(), masks[k].height());
      for (std::size_t p = 0; p < g.size(); ++p) g[p] = static_cast<std::uint8_t>(masks[k][p]);
      return g;
    }());
    digest_input += ids[used[k]] + ":" + sha1_hex(bytes) + "\n";
  }

  SamplingReport report;
  EdgeForest forest = train_forest(channels, masks, cfg.train.forest, cfg.jobs, &report);
  forest.recipe_hash = sha1_hex(digest_input);

  const fs::path dir = cfg.output / "model";
  fs::create_directories(dir);
  save_forest(dir / "forest.sedf", forest);
  Entry model{"forest", "forest.sedf", file_sha1(dir / "forest.sedf"), ""};
  std::vector<Entry> listed{model};
  for (const auto& e : entries)
    if (!e.skip_reason.empty()) listed.push_back(e);
  ojson extra;
  extra["training_images"] = used.size();
  extra["samples_tree0"] = {{"positives", report.positives},
                            {"negatives", report.negatives},
                            {"positive_shortfall", report.positive_shortfall},
                            {"negative_shortfall", report.negative_shortfall}};
  extra["header"] = ojson::parse(forest_header_json(forest));
  write_text_atomic(dir / "manifest.json", manifest_json("train", cfg, listed, extra));
  StageResult r;
  r.dir = dir;
  r.written = 1;
  for (const auto& e : entries)
    if (!e.skip_reason.empty()) r.skipped.push_back(e.id);
  return r;
}

StageResult cmd_predict(const PipelineConfig& cfg) {
  require_root(cfg);
  const EdgeForest forest = load_forest(model_path(cfg));
  const auto ids = dataset_ids(cfg, cfg.predict.split);
  const fs::path dir = cfg.output / "predictions";
  fs::create_directories(dir);
  std::vector<Entry> entries(ids.size());
  parallel_for(ids.size(), cfg.jobs, [&](std::size_t i) {
    Entry& e = entries[i];
    e.id = ids[i];
    const RgbImage image = load_rgb(dataset_path(cfg, cfg.dataset.images) / (e.id + ".ppm"));
    e.file = e.id + ".pgm";
    save_prob_map(predict(forest, image, cfg.predict.stride, 1), dir / e.file);
    e.sha1 = file_sha1(dir / e.file);
  });
  write_text_atomic(dir / "manifest.json", manifest_json("predict", cfg, entries));
  return finish_stage(dir, entries);
}

StageResult cmd_fuse(const PipelineConfig& cfg) {
  require_root(cfg);
  const auto ids = dataset_ids(cfg, cfg.predict.split);
  const auto dets = detections_by_image(cfg, false);
  const fs::path in_dir = cfg.output / "predictions";
  const fs::path dir = cfg.output / "fused";
  fs::create_directories(dir);
  std::vector<Entry> entries(ids.size());
  parallel_for(ids.size(), cfg.jobs, [&](std::size_t i) {
    Entry& e = entries[i];
    e.id = ids[i];
    const fs::path src = in_dir / (e.id + ".pgm");
    if (!fs::exists(src)) {
      e.skip_reason = "no prediction";
      return;
    }
    const ProbMap boundary = load_prob_map(src);
    std::vector<DetectionBox> boxes;
    if (const auto it = dets.find(e.id); it != dets.end())
      boxes = filter_by_score(it->second, cfg.recipe.thresholds.score_min);
    const ProbMap obj = objectness(boxes, boundary.width(), boundary.height(), cfg.fuse.floor);
    e.file = e.id + ".pgm";
    save_prob_map(fuse(boundary, obj), dir / e.file);
    e.sha1 = file_sha1(dir / e.file);
  });
  write_text_atomic(dir / "manifest.json", manifest_json("fuse", cfg, entries));
  return finish_stage(dir, entries);
}

StageResult cmd_eval(const PipelineConfig& cfg) {
  require_root(cfg);
  const auto ids = dataset_ids(cfg, cfg.predict.split);
  const fs::path in_dir = cfg.output / cfg.eval.input;
  std::vector<std::optional<EvalItem>> slots(ids.size());
  std::vector<LabelMap> instances(ids.size());
  parallel_for(ids.size(), cfg.jobs, [&](std::size_t i) {
    const fs::path src = in_dir / (ids[i] + ".pgm");
    if (!fs::exists(src)) return;
    ProbMap prob = load_prob_map(src);
    if (cfg.eval.nms) prob = nms_thin(prob);
    instances[i] = load_instances(cfg, ids[i]);
    if (!instances[i].same_shape(prob)) throw DataError("GT size differs from prediction for " + ids[i]);
    slots[i] = EvalItem{ids[i], std::move(prob), {label_boundaries(instances[i])}};
  });
  std::vector<EvalItem> items;
  std::vector<std::size_t> index;
  StageResult r;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (slots[i]) {
      items.push_back(std::move(*slots[i]));
      index.push_back(i);
    } else {
      r.skipped.push_back(ids[i]);
    }
  }
  if (items.empty()) throw DataError("no prediction maps found in " + in_dir.string());
  const PrSummary s = pr_curve(items, cfg.eval.pr, cfg.jobs);
  ojson summary = ojson::parse(summary_json(s));

  if (cfg.eval.sbd) {
    const fs::path cls_path = dataset_path(cfg, cfg.dataset.instance_classes);
    if (!fs::exists(cls_path)) throw DataError("SBD evaluation needs " + cls_path.string());
    std::ifstream in(cls_path);
    json classes;
    try {
      classes = json::parse(in);
    } catch (const json::exception& e) {
      throw DataError(std::string("bad instance class file: ") + e.what());
    }
    std::map<int, std::vector<ClassImage>> per;
    std::set<int> all_classes;
    for (const auto& [id, list] : classes.items())
      for (const auto& c : list) all_classes.insert(c.get<int>());
    for (std::size_t k = 0; k < items.size(); ++k) {
      const auto& id = items[k].id;
      const LabelMap& inst = instances[index[k]];
      const auto it = classes.find(id);
      for (int c : all_classes) {
        LabelMap m(inst.width(), inst.height(), 0);
        if (it != classes.end())
          for (std::size_t p = 0; p < m.size(); ++p) {
            const auto l = inst[p];
            if (l > 0 && static_cast<std::size_t>(l) <= it->size() && (*it)[l - 1].get<int>() == c) m[p] = l;
          }
        per[c].push_back({id, items[k].prob, std::move(m)});
      }
    }
    std::vector<std::pair<int, std::vector<ClassImage>>> flat(per.begin(), per.end());
    PrOptions opt = cfg.eval.pr;
    const SbdResult sbd = sbd_eval(flat, opt, cfg.jobs);
    ojson pc = ojson::array();
    for (const auto& cr : sbd.classes) {
      ojson e = {{"class", cr.class_id}, {"present", cr.present}};
      if (cr.present) {
        e["ods"] = cr.summary.ods_f;
        e["ap"] = cr.summary.ap;
      }
      pc.push_back(e);
    }
    summary["per_class"] = pc;
    summary["mean_ods"] = sbd.mean_ods_f;
    summary["mean_ap"] = sbd.mean_ap;
  }

  const fs::path dir = cfg.output / "eval";
  fs::create_directories(dir);
  write_text_atomic(dir / "summary.json", summary.dump(2) + "\n");
  std::ostringstream counts, pr;
  write_counts_csv(counts, s);
  write_pr_points_csv(pr, s);
  write_text_atomic(dir / "counts.csv", counts.str());
  write_text_atomic(dir / "pr.csv", pr.str());
  r.dir = dir;
  r.written = items.size();
  return r;
}

StageResult cmd_report(const PipelineConfig& cfg) {
  std::vector<ReportMethod> methods = cfg.report;
  if (methods.empty()) methods.push_back({"current", cfg.output / "eval"});
  const fs::path dir = cfg.output / "report";
  fs::create_directories(dir);
  std::string table = "method,ods,ois,ap\n";
  for (const auto& m : methods) {
    const fs::path sp = m.eval_dir / "summary.json";
    if (!fs::exists(sp)) throw DataError("missing eval summary for method " + m.name + ": " + sp.string());
    std::ifstream in(sp);
    json j;
    try {
      j = json::parse(in);
    } catch (const json::exception& e) {
      throw DataError("bad summary " + sp.string() + ": " + e.what());
    }
    table += m.name + "," + fixed6(j.at("ods").get<double>()) + "," + fixed6(j.at("ois").get<double>()) + "," +
             fixed6(j.at("ap").get<double>()) + "\n";
    const auto pr = read_file(m.eval_dir / "pr.csv");
    write_file_atomic(dir / ("pr_" + m.name + ".csv"), pr);
  }
  write_text_atomic(dir / "comparison.csv", table);
  StageResult r;
  r.dir = dir;
  r.written = methods.size();
  return r;
}

StageResult cmd_synth(const PipelineConfig& cfg, const fs::path& root) {
  const auto& sc = cfg.synth;
  const std::size_t n = sc.n_images;
  const std::size_t n_train = sc.n_train ? sc.n_train : std::max<std::size_t>(1, n * 4 / 5);
  for (const char* sub : {"images", "gt", "splits", "annotations/clean", "annotations/noisy"})
    fs::create_directories(root / sub);

  std::vector<std::vector<ImageDetection>> dets(n);
  std::vector<std::string> ids(n);
  std::vector<std::vector<int>> classes(n);
  std::vector<Entry> entries(n);
  parallel_for(n, cfg.jobs, [&](std::size_t i) {
    const SynthSample s = synth_sample(sc.params, cfg.seed, i);
    ids[i] = s.id;
    save_image(s.image, root / "images" / (s.id + ".ppm"));
    Gray16Image gt(s.instances.width(), s.instances.height());
    for (std::size_t p = 0; p < gt.size(); ++p) gt[p] = static_cast<std::uint16_t>(s.instances[p]);
    save_image(gt, root / "gt" / (s.id + ".pgm"));
    save_tristate(boundary_annotation(s.instances), root / "annotations" / "clean" / (s.id + ".pgm"));
    save_tristate(corrupt_annotation(s, sc.noise, cfg.seed), root / "annotations" / "noisy" / (s.id + ".pgm"));
    for (const auto& d : s.detections) dets[i].push_back({s.id, d});
    for (const auto& sh : s.shapes) classes[i].push_back(sh.kind == ShapeKind::Polygon ? 0 : 1);
    entries[i] = {s.id, "images/" + s.id + ".ppm", file_sha1(root / "images" / (s.id + ".ppm")), ""};
  });

  std::ostringstream det_text;
  for (const auto& d : dets) write_detections(det_text, d);
  write_text_atomic(root / "detections.jsonl", det_text.str());
  std::string train, test;
  for (std::size_t i = 0; i < n; ++i) (i < n_train ? train : test) += ids[i] + "\n";
  write_text_atomic(root / "splits" / "train.txt", train);
  write_text_atomic(root / "splits" / "test.txt", test);
  ojson cls;
  for (std::size_t i = 0; i < n; ++i) cls[ids[i]] = classes[i];
  write_text_atomic(root / "instance_classes.json", cls.dump(2) + "\n");
  write_text_atomic(root / "manifest.json", manifest_json("synth", cfg, entries,
                                                          {{"n_images", n},
                                                           {"n_train", n_train},
                                                           {"noise",
                                                            {{"jitter_sigma", sc.noise.jitter_sigma},
                                                             {"drop_rate", sc.noise.drop_rate},
                                                             {"spurious_rate", sc.noise.spurious_rate}}}}));
  return finish_stage(root, entries);
}

std::string cmd_model_inspect(const PipelineConfig& cfg) { return forest_header_json(load_forest(model_path(cfg))); }

}  // namespace weakbound
