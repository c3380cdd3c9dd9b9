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

#include <filesystem>

#include "weakbound/segment.hpp"

using namespace weakbound;

namespace {

RgbImage halves(int w, int h, Rgb left, Rgb right) {
  RgbImage img(w, h, left);
  for (int y = 0; y < h; ++y)
    for (int x = w / 2; x < w; ++x) img(x, y) = right;
  return img;
}

GrayImage step_image(int w, int h, int edge_x, std::uint8_t lo, std::uint8_t hi) {
  GrayImage g(w, h, lo);
  for (int y = 0; y < h; ++y)
    for (int x = edge_x; x < w; ++x) g(x, y) = hi;
  return g;
}

}  // namespace

TEST_CASE("uniform image is one region") {
  for (double k : {1.0, 300.0, 1e6}) {
    FhParams p;
    p.k = k;
    CHECK(fh_segment(RgbImage(9, 7, Rgb{30, 60, 90}), p).num_regions == 1);
  }
}

TEST_CASE("two flat halves give exactly two regions") {
  FhParams p;
  p.k = 1;
  p.min_size = 1;
  p.sigma = 0;
  const SegmentLabeling s = fh_segment(halves(12, 8, {0, 0, 0}, {255, 255, 255}), p);
  REQUIRE(s.num_regions == 2);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 12; ++x) CHECK(s.labels(x, y) == (x < 6 ? 0 : 1));
}

TEST_CASE("extreme checkerboard keeps every pixel apart") {
  RgbImage img(6, 5);
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 6; ++x) img(x, y) = (x + y) % 2 ? Rgb{255, 255, 255} : Rgb{0, 0, 0};
  FhParams p;
  p.k = 1e-9;
  p.sigma = 0;
  p.min_size = 1;
  CHECK(fh_segment(img, p).num_regions == 30);
}

TEST_CASE("min_size merges small regions") {
  RgbImage img(10, 10, Rgb{0, 0, 0});
  img(5, 5) = Rgb{255, 255, 255};
  FhParams p;
  p.k = 1;
  p.sigma = 0;
  p.min_size = 5;
  CHECK(fh_segment(img, p).num_regions == 1);
}

TEST_CASE("labeling boundaries and canonical relabel") {
  LabelMap l(4, 4, 9);
  for (int y = 0; y < 4; ++y)
    for (int x = 2; x < 4; ++x) l(x, y) = 3;
  const SegmentLabeling s = canonical_labeling(l);
  CHECK(s.num_regions == 2);
  CHECK(s.labels(0, 0) == 0);
  CHECK(s.labels(3, 3) == 1);
  const BinaryMap b = labeling_boundaries(s);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) CHECK(b(x, y) == (x == 1));
  CHECK(count_equal(labeling_boundaries(canonical_labeling(LabelMap(3, 3, 1))), std::uint8_t{1}) == 0);
}

TEST_CASE("labeling save and load") {
  const auto dir = std::filesystem::temp_directory_path() / "weakbound_test_segment";
  std::filesystem::create_directories(dir);
  FhParams p;
  p.k = 1;
  p.min_size = 1;
  p.sigma = 0;
  const SegmentLabeling s = fh_segment(halves(8, 4, {0, 0, 0}, {250, 10, 10}), p);
  save_labeling(s, p, dir / "seg.pgm");
  const SegmentLabeling back = load_labeling(dir / "seg.pgm");
  CHECK(back.num_regions == s.num_regions);
  CHECK(back.labels == s.labels);
}

TEST_CASE("canny on constant image is empty") {
  CHECK(count_equal(canny(GrayImage(16, 16, 77), 1.0, 10, 20), std::uint8_t{1}) == 0);
}

TEST_CASE("canny on a strong vertical step is one column wide") {
  const BinaryMap e = canny(step_image(20, 16, 10, 0, 200), 1.0, 10, 30);
  int columns_hit = 0;
  for (int x = 0; x < 20; ++x) {
    int n = 0;
    for (int y = 0; y < 16; ++y) n += e(x, y);
    if (n) {
      ++columns_hit;
      CHECK(n == 16);
    }
  }
  CHECK(columns_hit == 1);
}

TEST_CASE("weak edge below low threshold is suppressed") {
  GrayImage g = step_image(40, 12, 10, 0, 200);
  for (int y = 0; y < 12; ++y)
    for (int x = 30; x < 40; ++x) g(x, y) = 204;  // 4-level step
  const BinaryMap e = canny(g, 1.0, 10, 30);
  int strong = 0, weak = 0;
  for (int y = 0; y < 12; ++y)
    for (int x = 0; x < 40; ++x) (x < 20 ? strong : weak) += e(x, y);
  CHECK(strong == 12);
  CHECK(weak == 0);
}

TEST_CASE("hysteresis follows 8-connected chains") {
  Raster<float> m(5, 1, std::vector<float>{0, 5, 20, 5, 0});
  const BinaryMap h = hysteresis(m, 4, 10);
  CHECK(h == BinaryMap(5, 1, std::vector<std::uint8_t>{0, 1, 1, 1, 0}));
  Raster<float> lone(3, 1, std::vector<float>{5, 5, 5});
  CHECK(count_equal(hysteresis(lone, 4, 10), std::uint8_t{1}) == 0);
}
