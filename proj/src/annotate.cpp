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

#include "weakbound/annotate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <unordered_map>

#include "weakbound/detections.hpp"

namespace weakbound {
namespace {

constexpr std::array<std::pair<Variant, std::string_view>, 8> kNames{{
    {Variant::FhBbs, "FH_BBS"},
    {Variant::GrabcutBbs, "GRABCUT_BBS"},
    {Variant::SeseBbs, "SESE_BBS"},
    {Variant::McgBbs, "MCG_BBS"},
    {Variant::ConsMcgBbs, "CONS_MCG_BBS"},
    {Variant::ConsSgBbs, "CONS_SG_BBS"},
    {Variant::ConsAllBbs, "CONS_ALL_BBS"},
    {Variant::SeQuantile, "SE_QUANTILE"},
}};

// Positive > Ignore > Negative.
void merge_into(TriStateMask& acc, const TriStateMask& m) {
  for (std::size_t i = 0; i < acc.size(); ++i) {
    if (m[i] == Tri::Positive)
      acc[i] = Tri::Positive;
    else if (m[i] == Tri::Ignore && acc[i] == Tri::Negative)
      acc[i] = Tri::Ignore;
  }
}

void fill_box(TriStateMask& m, const Rect& r, Tri v) {
  for (int y = r.y0; y < r.y1; ++y)
    for (int x = r.x0; x < r.x1; ++x) m(x, y) = v;
}

const std::vector<Proposal>& require_proposals(const ExternalInputs& ext, Variant v) {
  if (!ext.proposals)
    throw ConfigError(std::string(variant_name(v)) + " requires ingested external proposals");
  return *ext.proposals;
}

std::vector<Proposal> sese_proposals(const AnnotationRecipe& r, const RgbImage& image) {
  return selective_search(image, fh_segment(image, r.fh), r.sese, r.max_proposals);
}

}  // namespace

std::string_view variant_name(Variant v) noexcept {
  for (const auto& [k, name] : kNames)
    if (k == v) return name;
  return "?";
}

Variant parse_variant(std::string_view name) {
  for (const auto& [k, n] : kNames)
    if (n == name) return k;
  throw ConfigError("unknown annotation variant '" + std::string(name) + "'");
}

TriStateMask fh_cap_bbs(const SegmentLabeling& seg, const std::vector<DetectionBox>& detections, double containment) {
  const int w = seg.width(), h = seg.height();
  TriStateMask out(w, h, Tri::Negative);
  std::vector<std::int64_t> area(static_cast<std::size_t>(seg.num_regions), 0);
  for (auto l : seg.labels.pixels()) ++area[l];

  for (const auto& det : detections) {
    const auto box = clip(det.rect, w, h);
    if (!box) continue;
    std::unordered_map<std::int32_t, std::int64_t> inside;
    for (int y = box->y0; y < box->y1; ++y)
      for (int x = box->x0; x < box->x1; ++x) ++inside[seg.labels(x, y)];
    std::vector<bool> kept(area.size(), false);
    bool any = false;
    for (const auto& [label, n] : inside)
      if (static_cast<double>(n) >= containment * static_cast<double>(area[label])) any = kept[label] = true;
    if (!any) continue;
    for (int y = box->y0; y < box->y1; ++y)
      for (int x = box->x0; x < box->x1; ++x) {
        const auto l = seg.labels(x, y);
        if (!kept[l]) continue;
        const bool edge = (x > 0 && seg.labels(x - 1, y) != l) || (x + 1 < w && seg.labels(x + 1, y) != l) ||
                          (y > 0 && seg.labels(x, y - 1) != l) || (y + 1 < h && seg.labels(x, y + 1) != l);
        if (edge) out(x, y) = Tri::Positive;
      }
  }
  return out;
}

TriStateMask quantile_mask(const ProbMap& prob, double q) {
  if (!(q > 0 && q < 1)) throw ParameterError("quantile_mask: q must be in (0,1)");
  TriStateMask out(prob.width(), prob.height(), Tri::Negative);
  std::vector<float> nz;
  for (float v : prob.pixels())
    if (v > 0) nz.push_back(v);
  if (nz.empty()) return out;
  std::sort(nz.begin(), nz.end(), std::greater<>());
  // Smallest value whose upper set stays within q; the top tie group is kept regardless.
  const double budget = q * static_cast<double>(nz.size()) + 1e-9;
  float threshold = nz.front();
  for (std::size_t i = 0; i < nz.size();) {
    std::size_t j = i;
    while (j < nz.size() && nz[j] == nz[i]) ++j;
    if (i > 0 && static_cast<double>(j) > budget) break;
    threshold = nz[i];
    if (static_cast<double>(j) > budget) break;
    i = j;
  }
  for (std::size_t i = 0; i < prob.size(); ++i) {
    const float v = prob[i];
    if (v <= 0) continue;
    out[i] = v >= threshold ? Tri::Positive : Tri::Ignore;
  }
  return out;
}

TriStateMask proposal_union_annotation(std::span<const Proposal> proposals, const std::vector<DetectionBox>& detections,
                                       double iou_min, int width, int height) {
  TriStateMask out(width, height, Tri::Negative);
  BinaryMap pos(width, height, 0);
  const auto matches = match_proposals(proposals, detections, iou_min);
  for (std::size_t d = 0; d < detections.size(); ++d) {
    if (matches[d].empty()) {
      if (auto box = clip(detections[d].rect, width, height)) fill_box(out, *box, Tri::Ignore);
      continue;
    }
    const BinaryMap u = union_boundaries(proposals, matches[d], width, height);
    for (std::size_t i = 0; i < u.size(); ++i) pos[i] |= u[i];
  }
  for (std::size_t i = 0; i < pos.size(); ++i)
    if (pos[i]) out[i] = Tri::Positive;
  return out;
}

TriStateMask proposal_consensus_annotation(std::span<const Proposal> proposals,
                                           const std::vector<DetectionBox>& detections, double iou_min,
                                           double agreement, int tol, int width, int height) {
  TriStateMask out(width, height, Tri::Negative);
  const auto matches = match_proposals(proposals, detections, iou_min);
  for (std::size_t d = 0; d < detections.size(); ++d) {
    if (matches[d].empty()) {
      TriStateMask ign(width, height, Tri::Negative);
      if (auto box = clip(detections[d].rect, width, height)) fill_box(ign, *box, Tri::Ignore);
      merge_into(out, ign);
      continue;
    }
    std::vector<BinaryMap> maps;
    for (std::size_t k : matches[d]) maps.push_back(mask_contour(proposals[k].mask()));
    merge_into(out, consensus_boundaries(maps, agreement, tol));
  }
  return out;
}

TriStateMask intersect_sources(std::span<const BinaryMap> sources, int tol) {
  return consensus_boundaries(sources, strict_agreement(sources.size()), tol);
}

BinaryMap positives(const TriStateMask& mask) {
  BinaryMap out(mask.width(), mask.height(), 0);
  for (std::size_t i = 0; i < mask.size(); ++i) out[i] = mask[i] == Tri::Positive;
  return out;
}

TriStateMask build_annotation(const AnnotationRecipe& recipe, const RgbImage& image,
                              const std::vector<DetectionBox>& detections, const ExternalInputs& external) {
  const auto& t = recipe.thresholds;
  for (double v : {t.score_min, t.iou_grabcut, t.iou_proposal, t.agreement, t.quantile, t.containment})
    if (!(v >= 0 && v <= 1)) throw ConfigError("recipe thresholds must lie in [0,1]");
  const int w = image.width(), h = image.height();
  const auto dets = clip_to_image(filter_by_score(detections, t.score_min), w, h);

  switch (recipe.variant) {
    case Variant::FhBbs:
      return fh_cap_bbs(fh_segment(image, recipe.fh), dets, t.containment);
    case Variant::GrabcutBbs:
      return grabcut_annotation(image, dets, t.iou_grabcut, recipe.grabcut);
    case Variant::SeseBbs: {
      const auto props = sese_proposals(recipe, image);
      return proposal_union_annotation(props, dets, t.iou_proposal, w, h);
    }
    case Variant::McgBbs:
      return proposal_union_annotation(require_proposals(external, recipe.variant), dets, t.iou_proposal, w, h);
    case Variant::ConsMcgBbs:
      return proposal_consensus_annotation(require_proposals(external, recipe.variant), dets, t.iou_proposal,
                                           t.agreement, t.consensus_tol, w, h);
    case Variant::ConsSgBbs: {
      if (!external.se_probability)
        throw ConfigError("CONS_SG_BBS requires an SE probability map trained on SESE_BBS");
      if (!external.se_probability->same_shape(image)) throw ConfigError("SE probability map size differs from image");
      const auto props = sese_proposals(recipe, image);
      const std::array<BinaryMap, 3> sources{
          positives(quantile_mask(*external.se_probability, t.quantile)),
          positives(proposal_union_annotation(props, dets, t.iou_proposal, w, h)),
          grabcut_boundaries(image, dets, t.iou_grabcut, recipe.grabcut)};
      return intersect_sources(sources, t.consensus_tol);
    }
    case Variant::ConsAllBbs: {
      const auto& external_props = require_proposals(external, recipe.variant);
      const auto props = sese_proposals(recipe, image);
      const std::array<BinaryMap, 3> sources{
          positives(proposal_union_annotation(external_props, dets, t.iou_proposal, w, h)),
          positives(proposal_union_annotation(props, dets, t.iou_proposal, w, h)),
          grabcut_boundaries(image, dets, t.iou_grabcut, recipe.grabcut)};
      return intersect_sources(sources, t.consensus_tol);
    }
    case Variant::SeQuantile:
      if (!external.se_probability) throw ConfigError("SE_QUANTILE requires an SE probability map");
      if (!external.se_probability->same_shape(image)) throw ConfigError("SE probability map size differs from image");
      return quantile_mask(*external.se_probability, t.quantile);
  }
  throw ConfigError("unhandled annotation variant");
}

}  // namespace weakbound
