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

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "weakbound/grabcut.hpp"
#include "weakbound/proposals.hpp"
#include "weakbound/raster.hpp"
#include "weakbound/segment.hpp"

namespace weakbound {

enum class Variant {
  FhBbs,       // F&H segments contained in a box
  GrabcutBbs,  // GrabCut masks accepted against their box
  SeseBbs,     // union of matched selective-search proposals
  McgBbs,      // union of matched external proposals
  ConsMcgBbs,  // consensus of matched external proposals
  ConsSgBbs,   // intersection of SE quantile, SeSe and GrabCut boundaries
  ConsAllBbs,  // intersection of external proposals, SeSe and GrabCut boundaries
  SeQuantile,  // top quantile of an SE probability map
};

std::string_view variant_name(Variant v) noexcept;
/// Accepts the names printed by variant_name (e.g. "FH_BBS").
Variant parse_variant(std::string_view name);

struct RecipeThresholds {
  double score_min = 0.8;
  double iou_grabcut = 0.7;
  double iou_proposal = 0.9;
  double agreement = 0.7;
  double quantile = 0.15;
  /// Fraction of a segment's area that must lie inside one box.
  double containment = 0.95;
  int consensus_tol = 1;
};

struct AnnotationRecipe {
  Variant variant = Variant::FhBbs;
  RecipeThresholds thresholds;
  FhParams fh;
  GrabCutParams grabcut;
  SimilarityWeights sese;
  std::size_t max_proposals = 0;
};

/// Inputs produced outside this library.
struct ExternalInputs {
  std::optional<std::vector<Proposal>> proposals;  // e.g. MCG
  std::optional<ProbMap> se_probability;           // output of a trained forest
};

/// Boundary pixels of every segment with >= `containment` of its area inside
/// a single box, restricted to that box. Boxes are used as given.
TriStateMask fh_cap_bbs(const SegmentLabeling& seg, const std::vector<DetectionBox>& detections,
                        double containment = 0.95);

/// Threshold = smallest nonzero value whose upper set holds at most a q
/// fraction of the nonzero pixels; the largest value is always kept. Pixels
/// >= threshold are Positive, zero is Negative, the rest Ignore.
TriStateMask quantile_mask(const ProbMap& prob, double q = 0.15);

/// Per detection, union of matched proposals' contours; detections without a
/// match are Ignore over their box. Positive wins over Ignore.
TriStateMask proposal_union_annotation(std::span<const Proposal> proposals, const std::vector<DetectionBox>& detections,
                                       double iou_min, int width, int height);
/// Per detection, consensus over matched proposals' contours.
TriStateMask proposal_consensus_annotation(std::span<const Proposal> proposals,
                                           const std::vector<DetectionBox>& detections, double iou_min,
                                           double agreement, int tol, int width, int height);

/// Strict intersection (with spatial tolerance) of boundary sources.
TriStateMask intersect_sources(std::span<const BinaryMap> sources, int tol);

BinaryMap positives(const TriStateMask& mask);

/// Applies the score filter, clips boxes to the image, then dispatches.
TriStateMask build_annotation(const AnnotationRecipe& recipe, const RgbImage& image,
                              const std::vector<DetectionBox>& detections, const ExternalInputs& external = {});

}  // namespace weakbound
