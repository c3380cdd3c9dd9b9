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

#include <algorithm>
#include <climits>

#include "weakbound/synth.hpp"

using namespace weakbound;

namespace {

// Mean Chebyshev distance from each Positive of `a` to the nearest Positive of `b`.
double mean_distance(const TriStateMask& a, const TriStateMask& b) {
  std::vector<std::pair<int, int>> pb;
  for (int y = 0; y < b.height(); ++y)
    for (int x = 0; x < b.width(); ++x)
      if (b(x, y) == Tri::Positive) pb.push_back({x, y});
  double sum = 0;
  std::size_t n = 0;
  for (int y = 0; y < a.height(); ++y)
    for (int x = 0; x < a.width(); ++x) {
      if (a(x, y) != Tri::Positive) continue;
      int best = INT_MAX;
      for (auto [bx, by] : pb) best = std::min(best, std::max(std::abs(bx - x), std::abs(by - y)));
      sum += best;
      ++n;
    }
  return n ? sum / static_cast<double>(n) : 0.0;
}

}  // namespace

TEST_CASE("samples are deterministic per seed and index") {
  const SynthParams p;
  const SynthSample a = synth_sample(p, 5, 3), b = synth_sample(p, 5, 3), c = synth_sample(p, 6, 3);
  CHECK(a.id == "synth_00003");
  CHECK(a.image == b.image);
  CHECK(a.instances == b.instances);
  CHECK_FALSE(a.image == c.image);
  const auto ds = synth_dataset(p, 4, 5);
  CHECK(ds[3].image == a.image);
}

TEST_CASE("detections are tight boxes around visible instances") {
  const SynthSample s = synth_sample(SynthParams{}, 1, 0);
  REQUIRE(!s.detections.empty());
  for (const auto& d : s.detections) {
    CHECK(d.score == 1.0);
    CHECK(d.rect.valid());
  }
  std::int32_t max_label = 0;
  for (auto v : s.instances.pixels()) max_label = std::max(max_label, v);
  CHECK(max_label >= 1);
  CHECK(static_cast<std::size_t>(max_label) <= s.shapes.size());
}

TEST_CASE("zero noise reproduces the clean annotation") {
  for (std::size_t i = 0; i < 5; ++i) {
    const SynthSample s = synth_sample(SynthParams{}, 9, i);
    CHECK(corrupt_annotation(s, NoiseParams{}, 1) == boundary_annotation(s.instances));
    CHECK(render_labels(s.shapes, 128, 128, 0, 0) == s.instances);
  }
}

TEST_CASE("drop rate one empties the annotation") {
  NoiseParams n;
  n.drop_rate = 1.0;
  const SynthSample s = synth_sample(SynthParams{}, 2, 1);
  CHECK(count_equal(corrupt_annotation(s, n, 3), Tri::Positive) == 0);
}

TEST_CASE("jitter sigma 2 moves the boundary by one to three pixels") {
  NoiseParams n;
  n.jitter_sigma = 2.0;
  double total = 0;
  const int count = 10;
  for (int i = 0; i < count; ++i) {
    const SynthSample s = synth_sample(SynthParams{}, 7, static_cast<std::size_t>(i));
    total += mean_distance(corrupt_annotation(s, n, 11), boundary_annotation(s.instances));
  }
  const double mean = total / count;
  CHECK(mean >= 1.0);
  CHECK(mean <= 3.0);
}

TEST_CASE("spurious contours add positives") {
  NoiseParams n;
  n.spurious_rate = 1.0;
  const SynthSample s = synth_sample(SynthParams{}, 2, 4);
  const TriStateMask clean = boundary_annotation(s.instances), noisy = corrupt_annotation(s, n, 3);
  CHECK(count_equal(noisy, Tri::Positive) >= count_equal(clean, Tri::Positive));
  for (std::size_t i = 0; i < clean.size(); ++i)
    if (clean[i] == Tri::Positive) CHECK(noisy[i] == Tri::Positive);
}
