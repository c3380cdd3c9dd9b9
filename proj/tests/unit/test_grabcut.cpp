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

#include <cmath>

#include "weakbound/grabcut.hpp"
#include "weakbound/rng.hpp"

using namespace weakbound;

namespace {

RgbImage flat_box(int w, int h, const Rect& r, Rgb in, Rgb out) {
  RgbImage img(w, h, out);
  for (int y = r.y0; y < r.y1; ++y)
    for (int x = r.x0; x < r.x1; ++x) img(x, y) = in;
  return img;
}

bool non_increasing(const std::vector<double>& t) {
  for (std::size_t i = 1; i < t.size(); ++i)
    if (t[i] > t[i - 1] + 1e-6 * std::max(1.0, std::abs(t[i - 1]))) return false;
  return true;
}

}  // namespace

TEST_CASE("flat colour box is recovered exactly") {
  const Rect r{12, 10, 30, 26};
  const RgbImage img = flat_box(48, 40, r, {220, 40, 30}, {20, 90, 200});
  const GrabCutResult g = grabcut(img, r, 5);
  for (int y = 0; y < 40; ++y)
    for (int x = 0; x < 48; ++x) CHECK(g.mask(x, y) == (r.contains(x, y) ? 1 : 0));
  CHECK(g.energy_trace.size() == 6);
  CHECK(non_increasing(g.energy_trace));
}

TEST_CASE("disk inside a loose box is recovered up to one pixel") {
  const int w = 60, h = 60;
  const double cx = 30, cy = 30, rad = 12;
  RgbImage img(w, h, Rgb{30, 30, 30});
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (std::hypot(x - cx, y - cy) <= rad) img(x, y) = Rgb{240, 230, 20};
  const GrabCutResult g = grabcut(img, Rect{14, 14, 47, 47}, 5);
  int wrong = 0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double d = std::hypot(x - cx, y - cy);
      if (d <= rad - 1 && !g.mask(x, y)) ++wrong;
      if (d > rad + 1 && g.mask(x, y)) ++wrong;
    }
  CHECK(wrong == 0);
}

TEST_CASE("uniform image stays inside the rect with a monotone trace") {
  const Rect r{5, 5, 20, 20};
  const GrabCutResult g = grabcut(RgbImage(30, 30, Rgb{100, 100, 100}), r, 5);
  for (int y = 0; y < 30; ++y)
    for (int x = 0; x < 30; ++x)
      if (g.mask(x, y)) CHECK(r.contains(x, y));
  CHECK(non_increasing(g.energy_trace));
}

TEST_CASE("energy trace is non-increasing on random images") {
  Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    RgbImage img(32, 32);
    for (auto& p : img.pixels())
      p = Rgb{static_cast<std::uint8_t>(rng.below(256)), static_cast<std::uint8_t>(rng.below(256)),
              static_cast<std::uint8_t>(rng.below(256))};
    const int x0 = rng.between(0, 15), y0 = rng.between(0, 15);
    const GrabCutResult g = grabcut(img, Rect{x0, y0, x0 + rng.between(4, 16), y0 + rng.between(4, 16)}, 4);
    CHECK(non_increasing(g.energy_trace));
  }
}

TEST_CASE("annotation marks accepted contours and ignores rejected boxes") {
  const Rect r{12, 10, 30, 26};
  const RgbImage img = flat_box(48, 40, r, {220, 40, 30}, {20, 90, 200});
  const TriStateMask m = grabcut_annotation(img, {{0, 1.0, r}});
  BinaryMap inside(48, 40, 0);
  for (int y = r.y0; y < r.y1; ++y)
    for (int x = r.x0; x < r.x1; ++x) inside(x, y) = 1;
  const BinaryMap contour = mask_contour(inside);
  for (std::size_t i = 0; i < m.size(); ++i) CHECK(m[i] == (contour[i] ? Tri::Positive : Tri::Negative));

  CHECK(count_equal(grabcut_annotation(img, {}), Tri::Negative) == img.size());
}

TEST_CASE("a box whose mask collapses becomes Ignore") {
  // rect covers uniform texture identical to its surroundings, apart from a tiny blob
  RgbImage img(40, 40, Rgb{90, 90, 90});
  img(20, 20) = Rgb{255, 0, 0};
  const Rect r{8, 8, 32, 32};
  const TriStateMask m = grabcut_annotation(img, {{0, 1.0, r}});
  for (int y = 0; y < 40; ++y)
    for (int x = 0; x < 40; ++x)
      if (r.contains(x, y)) CHECK(m(x, y) != Tri::Negative);
  CHECK(count_equal(m, Tri::Ignore) > 0);
}

TEST_CASE("GMM fit and initial clustering") {
  std::vector<std::array<double, 3>> s;
  for (int i = 0; i < 50; ++i) s.push_back({0.0 + (i % 3), 0, 0});
  for (int i = 0; i < 50; ++i) s.push_back({200.0 + (i % 3), 200, 200});
  const auto cl = GmmModel::initial_clusters(s, 2);
  CHECK(cl[0] != cl[99]);
  for (int i = 0; i < 50; ++i) CHECK(cl[i] == cl[0]);
  const GmmModel g = GmmModel::fit(s, cl, 2, 1e-3);
  double wsum = 0;
  for (const auto& c : g.components) wsum += c.weight;
  CHECK(wsum == doctest::Approx(1.0));
  CHECK(g.best_component({201, 200, 200}) == cl[99]);
}
