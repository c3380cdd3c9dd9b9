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

#include "weakbound/raster.hpp"

using namespace weakbound;

TEST_CASE("iou of identical, disjoint and overlapping boxes") {
  CHECK(iou({0, 0, 10, 10}, {0, 0, 10, 10}) == 1.0);
  CHECK(iou({0, 0, 10, 10}, {20, 20, 30, 30}) == 0.0);
  // 5x5 overlap, 100 + 100 - 25 union, counted by enumeration
  int inter = 0, uni = 0;
  const Rect a{0, 0, 10, 10}, b{5, 5, 15, 15};
  for (int y = 0; y < 20; ++y)
    for (int x = 0; x < 20; ++x) {
      inter += a.contains(x, y) && b.contains(x, y);
      uni += a.contains(x, y) || b.contains(x, y);
    }
  CHECK(inter == 25);
  CHECK(uni == 175);
  CHECK(iou(a, b) == doctest::Approx(25.0 / 175.0).epsilon(1e-12));
}

TEST_CASE("clip and pad") {
  CHECK(clip({-5, -5, 3, 4}, 10, 10) == Rect{0, 0, 3, 4});
  CHECK_FALSE(clip({12, 0, 15, 3}, 10, 10).has_value());
  CHECK(pad_and_clip({4, 4, 6, 6}, 0.5, 10, 10) == Rect{3, 3, 7, 7});
  CHECK(pad_and_clip({0, 0, 10, 10}, 0.5, 10, 10) == Rect{0, 0, 10, 10});
}

TEST_CASE("raster construction rejects empty dimensions") {
  CHECK_THROWS_AS(GrayImage(0, 3), ParameterError);
  CHECK_THROWS_AS(GrayImage(2, 2, std::vector<std::uint8_t>(3)), ParameterError);
}

TEST_CASE("label boundaries") {
  LabelMap one(4, 4, 7);
  CHECK(count_equal(label_boundaries(one), std::uint8_t{1}) == 0);

  LabelMap halves(4, 4, 0);
  for (int y = 0; y < 4; ++y)
    for (int x = 2; x < 4; ++x) halves(x, y) = 1;
  const BinaryMap b = label_boundaries(halves);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) CHECK(b(x, y) == (x == 1 ? 1 : 0));

  LabelMap each(2, 2, std::vector<std::int32_t>{0, 1, 2, 3});
  CHECK(count_equal(label_boundaries(each), std::uint8_t{1}) == 3);
}

TEST_CASE("mask contour and tight rect") {
  BinaryMap m(6, 6, 0);
  for (int y = 1; y < 5; ++y)
    for (int x = 1; x < 5; ++x) m(x, y) = 1;
  const BinaryMap c = mask_contour(m);
  CHECK(count_equal(c, std::uint8_t{1}) == 12);
  CHECK(c(2, 2) == 0);
  CHECK(tight_rect(m) == Rect{1, 1, 5, 5});
  CHECK_FALSE(tight_rect(BinaryMap(3, 3, 0)).has_value());
  // image border alone is not a contour
  CHECK(count_equal(mask_contour(BinaryMap(3, 3, 1)), std::uint8_t{1}) == 0);
}

TEST_CASE("binary dilation") {
  BinaryMap m(7, 7, 0);
  m(3, 3) = 1;
  CHECK(count_equal(dilate(m, 1), std::uint8_t{1}) == 9);
  CHECK(count_equal(dilate(m, 0), std::uint8_t{1}) == 1);
  CHECK(count_equal(dilate(m, 5), std::uint8_t{1}) == 49);
}
