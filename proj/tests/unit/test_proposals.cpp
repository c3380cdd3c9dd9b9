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

#include <set>
#include <sstream>

#include "oracles.hpp"
#include "weakbound/proposals.hpp"

using namespace weakbound;

namespace {

// n vertical stripes of distinct colours.
std::pair<RgbImage, SegmentLabeling> stripes(int n, int stripe_w = 4, int h = 8) {
  RgbImage img(n * stripe_w, h);
  LabelMap l(n * stripe_w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < n * stripe_w; ++x) {
      const int s = x / stripe_w;
      img(x, y) = Rgb{static_cast<std::uint8_t>(s * 37 % 256), static_cast<std::uint8_t>(s * 91 % 256),
                      static_cast<std::uint8_t>(s * 53 % 256)};
      l(x, y) = s;
    }
  return {img, canonical_labeling(l)};
}

Proposal rect_proposal(const Rect& r, int w, int h) {
  Proposal p;
  p.image_width = w;
  p.image_height = h;
  for (int y = r.y0; y < r.y1; ++y)
    for (int x = r.x0; x < r.x1; ++x) p.pixels.push_back(static_cast<std::uint32_t>(y * w + x));
  p.rect = r;
  return p;
}

}  // namespace

TEST_CASE("hierarchy has 2n-1 nodes") {
  for (int n : {1, 2, 3, 5, 9}) {
    const auto [img, seg] = stripes(n);
    const auto h = selective_search_hierarchy(img, seg);
    CHECK(h.size() == static_cast<std::size_t>(2 * n - 1));
    CHECK(h.back().pixels.size() == img.size());
  }
  const auto [img, seg] = stripes(1);
  const auto one = selective_search(img, seg);
  REQUIRE(one.size() == 1);
  CHECK(one[0].rect == Rect{0, 0, img.width(), img.height()});
}

TEST_CASE("hierarchy over FH regions of a random image") {
  Rng rng(3);
  RgbImage img(24, 24);
  for (auto& p : img.pixels()) p = Rgb{static_cast<std::uint8_t>(rng.below(256)), 0, static_cast<std::uint8_t>(rng.below(256))};
  FhParams fp;
  fp.min_size = 10;
  const SegmentLabeling seg = fh_segment(img, fp);
  const auto h = selective_search_hierarchy(img, seg);
  CHECK(h.size() == static_cast<std::size_t>(2 * seg.num_regions - 1));
  const auto d = selective_search(img, seg);
  std::set<std::uint64_t> hashes;
  for (const auto& p : d) hashes.insert(p.hash());
  CHECK(hashes.size() == d.size());
  CHECK(selective_search(img, seg, {}, 3).size() == std::min<std::size_t>(3, d.size()));
}

TEST_CASE("dedup removes repeated pixel sets") {
  const Proposal a = rect_proposal({0, 0, 2, 2}, 4, 4), b = rect_proposal({1, 1, 3, 3}, 4, 4);
  CHECK(dedup_proposals({a, b, a, b, a}).size() == 2);
}

TEST_CASE("matching by rect IoU") {
  const int w = 40, h = 40;
  const std::vector<Proposal> props{rect_proposal({0, 0, 10, 10}, w, h), rect_proposal({0, 0, 10, 20}, w, h)};
  // second proposal against box (0,0,10,17): IoU = 170/200 = 0.85
  const std::vector<DetectionBox> dets{{0, 1, {0, 0, 10, 10}}, {0, 1, {0, 0, 10, 17}}};
  const auto m = match_proposals(props, dets, 0.9);
  CHECK(m[0] == std::vector<std::size_t>{0});
  CHECK(m[1].empty());
  const auto none = match_proposals({}, dets, 0.9);
  CHECK(none.size() == 2);
  CHECK(none[0].empty());
}

TEST_CASE("union boundaries") {
  const int w = 8, h = 8;
  const Proposal outer = rect_proposal({0, 0, 8, 8}, w, h), inner = rect_proposal({2, 2, 6, 6}, w, h);
  const BinaryMap one = union_boundaries(std::span(&inner, 1), w, h);
  CHECK(one == mask_contour(inner.mask()));
  const std::vector<Proposal> twice{inner, inner};
  CHECK(union_boundaries(twice, w, h) == one);
  const std::vector<Proposal> nested{outer, inner};
  const BinaryMap u = union_boundaries(nested, w, h);
  const BinaryMap ci = mask_contour(inner.mask()), co = mask_contour(outer.mask());
  for (std::size_t i = 0; i < u.size(); ++i) CHECK(u[i] == (ci[i] | co[i]));
}

TEST_CASE("consensus arithmetic") {
  BinaryMap a(5, 5, 0), b(5, 5, 0);
  a(2, 2) = 1;
  const std::vector<BinaryMap> identical{a, a, a};
  const TriStateMask same = consensus_boundaries(identical, 0.7, 1);
  CHECK(count_equal(same, Tri::Ignore) == 0);
  CHECK(same(2, 2) == Tri::Positive);
  CHECK(count_equal(same, Tri::Positive) == 1);

  const std::vector<BinaryMap> half{a, b};
  CHECK(consensus_boundaries(half, 0.7, 1)(2, 2) == Tri::Ignore);

  std::vector<BinaryMap> ten(10, b);
  for (int i = 0; i < 8; ++i) ten[i] = a;
  CHECK(consensus_boundaries(ten, 0.7, 1)(2, 2) == Tri::Positive);
  ten[7] = b;
  CHECK(consensus_boundaries(ten, 0.7, 1)(2, 2) == Tri::Ignore);

  // tolerance: neighbour one pixel away counts as support
  BinaryMap c(5, 5, 0);
  c(3, 2) = 1;
  const std::vector<BinaryMap> shifted{a, c};
  CHECK(consensus_boundaries(shifted, 0.7, 1)(2, 2) == Tri::Positive);
  CHECK(consensus_boundaries(shifted, 0.7, 0)(2, 2) == Tri::Ignore);
  CHECK(strict_agreement(4) < 1.0);
  CHECK(strict_agreement(4) >= 0.75);
}

TEST_CASE("rle and proposal file round trips") {
  Rng rng(9);
  for (int t = 0; t < 20; ++t) {
    const BinaryMap m = oracle::random_binary(rng, rng.between(1, 9), rng.between(1, 9), 0.4);
    CHECK(rle_decode(rle_encode(m), m.width(), m.height()) == m);
  }
  const std::vector<Proposal> props{rect_proposal({1, 1, 3, 4}, 6, 5), rect_proposal({0, 0, 6, 5}, 6, 5)};
  std::stringstream s;
  write_proposals(s, "img", props);
  const auto back = read_proposals(s, "img", 6, 5);
  REQUIRE(back.size() == 2);
  CHECK(back[0].pixels == props[0].pixels);
  CHECK(back[1].rect == props[1].rect);
}
