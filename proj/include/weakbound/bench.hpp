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
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "weakbound/raster.hpp"

namespace weakbound {

struct MatchCounts {
  std::int64_t tp = 0;           // matched candidate pixels
  std::int64_t fp = 0;           // unmatched candidate pixels
  std::int64_t sum_r_tp = 0;     // matched GT pixels, summed over GT maps
  std::int64_t sum_r_total = 0;  // GT pixels, summed over GT maps

  MatchCounts& operator+=(const MatchCounts& o) noexcept {
    tp += o.tp;
    fp += o.fp;
    sum_r_tp += o.sum_r_tp;
    sum_r_total += o.sum_r_total;
    return *this;
  }
  friend bool operator==(const MatchCounts&, const MatchCounts&) = default;
};

struct PrPoint {
  double precision = 0, recall = 0, f = 0;
};
/// F = 2PR/(P+R), 0 when P+R = 0. P is 0 when there are no candidates.
PrPoint pr_point(const MatchCounts& c) noexcept;

/// Orientation-aware non-maximum suppression. Kept pixels retain their input value.
ProbMap nms_thin(const ProbMap& prob);

/// Removes pixels of fully-set 2x2 blocks while preserving connectivity;
/// one-pixel-wide curves pass through unchanged.
BinaryMap thin_binary(const BinaryMap& mask);

/// Max-cardinality one-to-one matching of candidate to GT pixels within
/// max_dist * image diagonal. Recall is matched per GT map; a candidate is a
/// true positive if some GT map matches it.
MatchCounts correspond(const BinaryMap& cand, std::span<const BinaryMap> gts, double max_dist);

enum class ThresholdMode {
  Absolute,  // t_k
  Relative,  // t_k times the largest value over all maps
};

struct PrOptions {
  int n_thresh = 99;
  double max_dist = 0.01;
  ThresholdMode mode = ThresholdMode::Relative;
  bool thin = true;
};

struct EvalItem {
  std::string id;
  ProbMap prob;
  std::vector<BinaryMap> gts;
};

struct PrSummary {
  std::vector<double> thresholds;              // t_k before any rescaling
  std::vector<MatchCounts> totals;             // per threshold
  std::vector<PrPoint> points;                 // per threshold
  std::vector<std::vector<MatchCounts>> per_image;  // [image][threshold]
  std::vector<std::string> ids;
  double ods_f = 0, ods_precision = 0, ods_recall = 0, ods_threshold = 0;
  double ois_f = 0, ois_precision = 0, ois_recall = 0;
  double ap = 0;
};

PrSummary pr_curve(std::span<const EvalItem> items, const PrOptions& options = {}, int jobs = 1);

/// Mean over 100 recall samples r = 0.01..1 of max{P : R >= r}.
double average_precision(std::span<const PrPoint> points) noexcept;

/// Boundary of the union of a class's instances: inter-instance edges are not GT.
BinaryMap class_external_contours(const LabelMap& instances);

struct ClassImage {
  std::string id;
  ProbMap prob;
  LabelMap instances;  // 0 = background, >0 = instance of this class
};
struct ClassResult {
  int class_id = 0;
  bool present = false;  // at least one GT instance
  PrSummary summary;
};
struct SbdResult {
  std::vector<ClassResult> classes;
  double mean_ods_f = 0;
  double mean_ap = 0;
};
inline PrOptions sbd_options() {
  PrOptions o;
  o.max_dist = 0.02;
  return o;
}
SbdResult sbd_eval(std::span<const std::pair<int, std::vector<ClassImage>>> per_class,
                   const PrOptions& options = sbd_options(), int jobs = 1);

void write_counts_csv(std::ostream& out, const PrSummary& s);
void write_pr_points_csv(std::ostream& out, const PrSummary& s);
/// {"ods": .., "ois": .., "ap": .., ...}; fixed formatting so equal inputs give equal bytes.
std::string summary_json(const PrSummary& s);

}  // namespace weakbound
