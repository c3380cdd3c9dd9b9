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

#include <doctest.h>

#include "oracles.hpp"
#include "weakbound/annotate.hpp"

using namespace weakbound;

namespace {

SegmentLabeling blocks() {
  // 12x12: background 0, square 1 at [3,7)x[3,7), bar 2 at [0,10)x[9,11)
  LabelMap l(12, 12, 0);
  for (int y = 3; y < 7; ++y)
    for (int x = 3; x < 7; ++x) l(x, y) = 1;
  for (int y = 9; y < 11; ++y)
    for (int x = 0; x < 10; ++x) l(x, y) = 2;
  return canonical_labeling(l);
}

}  // namespace

TEST_CASE("variant names round trip") {
  for (Variant v : {Variant::FhBbs, Variant::GrabcutBbs, Variant::SeseBbs, Variant::McgBbs, Variant::ConsMcgBbs,
                    Variant::ConsSgBbs, Variant::ConsAllBbs, Variant::SeQuantile})
    CHECK(parse_variant(variant_name(v)) == v);
  CHECK(variant_name(Variant::FhBbs) == "FH_BBS");
  CHECK_THROWS_AS(parse_variant("nope"), ConfigError);
}

TEST_CASE("fh_cap_bbs containment") {
  const SegmentLabeling seg = blocks();
  CHECK(count_equal(fh_cap_bbs(seg, {}), Tri::Negative) == seg.labels.size());

  // the square lies fully inside the box: its contour is Positive
  const TriStateMask m = fh_cap_bbs(seg, {{0, 1, {2, 2, 8, 8}}});
  const auto sq = seg.labels(4, 4);
  BinaryMap inside(12, 12, 0);
  for (std::size_t i = 0; i < inside.size(); ++i) inside[i] = seg.labels[i] == sq;
  const BinaryMap contour = mask_contour(inside);
  for (std::size_t i = 0; i < m.size(); ++i)
    if (contour[i]) CHECK(m[i] == Tri::Positive);

  // bar of 20 pixels with 8 outside (40%): not contained
  const TriStateMask bar = fh_cap_bbs(seg, {{0, 1, {0, 8, 6, 12}}});
  for (int y = 9; y < 11; ++y)
    for (int x = 0; x < 6; ++x) CHECK(bar(x, y) == Tri::Negative);
}

TEST_CASE("quantile on 1..100 keeps exactly 15") {
  ProbMap p(10, 10);
  for (int i = 0; i < 100; ++i) p[i] = static_cast<float>(i + 1) / 100.f;
  const TriStateMask m = quantile_mask(p, 0.15);
  CHECK(count_equal(m, Tri::Positive) == 15);
  for (int i = 0; i < 100; ++i) CHECK((m[i] == Tri::Positive) == (i + 1 >= 86));
  CHECK(count_equal(m, Tri::Ignore) == 85);
}

TEST_CASE("quantile degenerate maps") {
  CHECK(count_equal(quantile_mask(ProbMap(4, 4, 0.3f)), Tri::Positive) == 16);
  CHECK(count_equal(quantile_mask(ProbMap(4, 4, 0.f)), Tri::Negative) == 16);
  ProbMap one(5, 5, 0.f);
  one[7] = 0.2f;
  CHECK(count_equal(quantile_mask(one), Tri::Positive) == 1);
  CHECK_THROWS_AS(quantile_mask(one, 1.0), ParameterError);
  CHECK_THROWS_AS(quantile_mask(one, 0.0), ParameterError);
}

TEST_CASE("quantile fraction on continuous random maps") {
  Rng rng(21);
  for (int t = 0; t < 50; ++t) {
    ProbMap p(rng.between(3, 40), rng.between(3, 40), 0.f);
    for (auto& v : p.pixels())
      if (rng.uniform() < 0.7) v = static_cast<float>(rng.uniform(1e-3, 1.0));
    std::size_t nz = 0;
    for (float v : p.pixels()) nz += v > 0;
    if (nz == 0) continue;
    const double q = rng.uniform(0.05, 0.5);
    const double frac = static_cast<double>(count_equal(quantile_mask(p, q), Tri::Positive)) / static_cast<double>(nz);
    if (q * nz >= 1) {
      CHECK(frac <= q + 1e-12);
      CHECK(frac >= q - 1.0 / static_cast<double>(nz) - 1e-12);
    }
  }
}

TEST_CASE("quantile with ties never exceeds q") {
  Rng rng(23);
  for (int t = 0; t < 50; ++t) {
    ProbMap p(rng.between(4, 30), rng.between(4, 30), 0.f);
    const int levels = rng.between(2, 6);
    for (auto& v : p.pixels())
      if (rng.uniform() < 0.8) v = static_cast<float>(rng.between(1, levels)) / static_cast<float>(levels);
    std::size_t nz = 0;
    for (float v : p.pixels()) nz += v > 0;
    if (nz == 0) continue;
    const double q = rng.uniform(0.1, 0.6);
    const TriStateMask m = quantile_mask(p, q);
    float thr = 2.f;
    for (std::size_t i = 0; i < m.size(); ++i)
      if (m[i] == Tri::Positive) thr = std::min(thr, p[i]);
    const double frac = static_cast<double>(count_equal(m, Tri::Positive)) / static_cast<double>(nz);
    // mass of the first value group left out
    float next = 0.f;
    for (float v : p.pixels())
      if (v < thr) next = std::max(next, v);
    const double ties = next > 0 ? static_cast<double>(count_equal(p, next)) / static_cast<double>(nz) : 1.0;
    if (frac > q + 1e-12) {
      // only the top tie group may exceed the budget
      float top = 0.f;
      for (float v : p.pixels()) top = std::max(top, v);
      CHECK(thr == top);
    } else {
      CHECK(frac >= q - ties - 1e-12);
    }
  }
}

TEST_CASE("intersection of identical sources") {
  Rng rng(2);
  const BinaryMap m = oracle::random_binary(rng, 9, 9, 0.3);
  const std::vector<BinaryMap> three{m, m, m};
  const TriStateMask out = intersect_sources(three, 1);
  for (std::size_t i = 0; i < m.size(); ++i) CHECK(out[i] == (m[i] ? Tri::Positive : Tri::Negative));
  // a pixel in one source only is Ignore
  BinaryMap lone(9, 9, 0);
  lone(4, 4) = 1;
  const std::vector<BinaryMap> mixed{lone, BinaryMap(9, 9, 0), BinaryMap(9, 9, 0)};
  CHECK(intersect_sources(mixed, 1)(4, 4) == Tri::Ignore);
}

TEST_CASE("build_annotation dispatch") {
  RgbImage img(24, 24, Rgb{20, 20, 200});
  for (int y = 6; y < 16; ++y)
    for (int x = 6; x < 16; ++x) img(x, y) = Rgb{230, 210, 10};
  const std::vector<DetectionBox> dets{{0, 0.95, {5, 5, 17, 17}}, {0, 0.5, {0, 0, 4, 4}}};
  AnnotationRecipe r;
  r.variant = Variant::FhBbs;
  r.fh.min_size = 5;
  const TriStateMask direct = fh_cap_bbs(fh_segment(img, r.fh), {dets[0]}, r.thresholds.containment);
  CHECK(build_annotation(r, img, dets) == direct);

  r.variant = Variant::McgBbs;
  CHECK_THROWS_AS(build_annotation(r, img, dets), ConfigError);
  r.variant = Variant::SeQuantile;
  CHECK_THROWS_AS(build_annotation(r, img, dets), ConfigError);
  r.variant = Variant::ConsAllBbs;
  CHECK_THROWS_AS(build_annotation(r, img, dets), ConfigError);

  r.variant = Variant::GrabcutBbs;
  CHECK(build_annotation(r, img, {}) == TriStateMask(24, 24, Tri::Negative));
}

TEST_CASE("unmatched detections are Ignore and Positive wins") {
  Proposal p;
  p.image_width = 10;
  p.image_height = 10;
  for (int y = 2; y < 6; ++y)
    for (int x = 2; x < 6; ++x) p.pixels.push_back(static_cast<std::uint32_t>(y * 10 + x));
  p.rect = {2, 2, 6, 6};
  const std::vector<Proposal> props{p};
  const std::vector<DetectionBox> dets{{0, 1, {2, 2, 6, 6}}, {0, 1, {0, 0, 4, 4}}};
  const TriStateMask m = proposal_union_annotation(props, dets, 0.9, 10, 10);
  CHECK(m(2, 2) == Tri::Positive);  // contour inside the ignored box
  CHECK(m(0, 0) == Tri::Ignore);
  CHECK(m(3, 3) == Tri::Ignore);
  CHECK(m(4, 4) == Tri::Negative);
  CHECK(m(9, 9) == Tri::Negative);
}
