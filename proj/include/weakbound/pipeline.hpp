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

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "weakbound/annotate.hpp"
#include "weakbound/bench.hpp"
#include "weakbound/forest.hpp"
#include "weakbound/synth.hpp"

namespace weakbound {

namespace fs = std::filesystem;

enum class SizeFilter { Area, Side };

struct DatasetConfig {
  fs::path root;
  std::string images = "images";
  std::string gt = "gt";
  std::string detections = "detections.jsonl";
  std::string train_split;  // file of ids relative to root; empty = every image
  std::string test_split;
  std::string proposals;       // dir of <id>.jsonl external proposals, optional
  std::string se_probability;  // dir of <id>.pgm SE maps, optional
  std::string instance_classes = "instance_classes.json";
  int min_object_size = 0;  // GT instances below this are dropped; 0 keeps all
  SizeFilter min_object_mode = SizeFilter::Area;
};

struct TrainConfig {
  /// "recipe" (annotate output), "gt" (boundaries of GT labels), or a directory of tri-state masks.
  std::string annotations = "recipe";
  ForestParams forest;
};

struct PredictConfig {
  int stride = 2;
  std::string model;  // empty = <out>/model/forest.sedf
  std::string split = "test";
};

struct FuseConfig {
  float floor = 0.0f;
};

struct EvalConfig {
  PrOptions pr;
  bool nms = true;
  std::string input = "predictions";  // or "fused"
  bool sbd = false;
};

struct ReportMethod {
  std::string name;
  fs::path eval_dir;
};

struct SynthConfig {
  std::size_t n_images = 20;
  std::size_t n_train = 0;  // 0 = 80% of n_images
  SynthParams params;
  NoiseParams noise;
};

struct PipelineConfig {
  DatasetConfig dataset;
  fs::path output = "out";
  std::uint64_t seed = 1;
  int jobs = 0;
  AnnotationRecipe recipe;
  TrainConfig train;
  PredictConfig predict;
  FuseConfig fuse;
  EvalConfig eval;
  std::vector<ReportMethod> report;
  SynthConfig synth;
  /// Canonical serialisation of the effective configuration.
  std::string canonical;
};

/// Parses and validates a JSON configuration. Unknown keys and wrong types
/// are ConfigError. Relative paths resolve against `base_dir`.
PipelineConfig parse_config(const std::string& text, const fs::path& base_dir);
PipelineConfig load_config(const fs::path& path);

/// Parameter-only JSON of `cfg` (no paths, no job count); used for hashing.
std::string canonical_config(const PipelineConfig& cfg);

/// Lowercase hex SHA-1 digest.
std::string sha1_hex(std::span<const std::uint8_t> bytes);
std::string sha1_hex(const std::string& text);

/// Image ids of a split, sorted. `split` is "train", "test" or "all".
std::vector<std::string> dataset_ids(const PipelineConfig& cfg, const std::string& split);

/// Reads a GT instance-label PGM (8 or 16 bit), applying the size filter.
LabelMap load_instances(const PipelineConfig& cfg, const std::string& id);
LabelMap filter_small_instances(const LabelMap& labels, int min_size, SizeFilter mode);

struct StageResult {
  fs::path dir;
  std::size_t written = 0;
  std::vector<std::string> skipped;
};

StageResult cmd_annotate(const PipelineConfig& cfg);
StageResult cmd_train(const PipelineConfig& cfg);
StageResult cmd_predict(const PipelineConfig& cfg);
StageResult cmd_fuse(const PipelineConfig& cfg);
StageResult cmd_eval(const PipelineConfig& cfg);
StageResult cmd_report(const PipelineConfig& cfg);
/// Writes images, GT, detections, splits, and clean/noisy annotations under `root`.
StageResult cmd_synth(const PipelineConfig& cfg, const fs::path& root);
std::string cmd_model_inspect(const PipelineConfig& cfg);

/// Exit codes of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitConfig = 2, kExitData = 3, kExitVersion = 4 };

}  // namespace weakbound
