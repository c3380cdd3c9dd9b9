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

#include "weakbound/fuse.hpp"

using namespace weakbound;

TEST_CASE("objectness maps") {
  const ProbMap none = objectness({}, 5, 4, 0.25f);
  CHECK(count_equal(none, 0.25f) == 20);

  const ProbMap one = objectness({{0, 0.9, {1, 1, 3, 3}}}, 5, 5);
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 5; ++x) CHECK(one(x, y) == ((x >= 1 && x < 3 && y >= 1 && y < 3) ? 0.9f : 0.f));

  const ProbMap two = objectness({{0, 0.6, {0, 0, 4, 4}}, {1, 0.9, {2, 2, 6, 6}}}, 8, 8);
  CHECK(two(1, 1) == 0.6f);
  CHECK(two(3, 3) == 0.9f);
  CHECK(two(5, 5) == 0.9f);
  CHECK(two(7, 7) == 0.f);

  const ProbMap clipped = objectness({{0, 0.5, {-4, -4, 2, 2}}}, 3, 3);
  CHECK(clipped(0, 0) == 0.5f);
  CHECK(clipped(2, 2) == 0.f);
  CHECK_THROWS_AS(objectness({}, 3, 3, 1.5f), ParameterError);
}

TEST_CASE("fusion arithmetic") {
  ProbMap b(4, 4, 0.3f);
  b(1, 1) = 0.8f;
  CHECK(fuse(b, ProbMap(4, 4, 1.f)) == b);
  CHECK(count_equal(fuse(b, ProbMap(4, 4, 0.f)), 0.f) == 16);
  const ProbMap f = fuse(b, objectness({{0, 0.9, {0, 0, 2, 2}}}, 4, 4));
  CHECK(f(1, 1) == doctest::Approx(0.72).epsilon(1e-6));
  CHECK(f(3, 3) == 0.f);
  CHECK_THROWS_AS(fuse(b, ProbMap(3, 4, 1.f)), ParameterError);
}
