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

#include "weakbound/raster.hpp"

#include <algorithm>
#include <cmath>

namespace weakbound {

std::optional<Rect> intersect(const Rect& a, const Rect& b) noexcept {
  Rect r{std::max(a.x0, b.x0), std::max(a.y0, b.y0), std::min(a.x1, b.x1), std::min(a.y1, b.y1)};
  if (!r.valid()) return std::nullopt;
  return r;
}

double iou(const Rect& a, const Rect& b) noexcept {
  const auto inter = intersect(a, b);
  if (!inter) return 0.0;
  const std::int64_t i = inter->area();
  const std::int64_t u = a.area() + b.area() - i;
  return static_cast<double>(i) / static_cast<double>(u);
}

std::optional<Rect> clip(const Rect& r, int width, int height) noexcept {
  return intersect(r, Rect{0, 0, width, height});
}

Rect dilate(const Rect& r, int by) noexcept { return Rect{r.x0 - by, r.y0 - by, r.x1 + by, r.y1 + by}; }

Rect pad_and_clip(const Rect& r, double fraction, int width, int height) noexcept {
  const int px = static_cast<int>(std::ceil(fraction * r.width()));
  const int py = static_cast<int>(std::ceil(fraction * r.height()));
  Rect padded{r.x0 - px, r.y0 - py, r.x1 + px, r.y1 + py};
  return clip(padded, width, height).value_or(Rect{0, 0, width, height});
}

std::optional<Rect> tight_rect(const BinaryMap& mask) noexcept {
  int x0 = mask.width(), y0 = mask.height(), x1 = -1, y1 = -1;
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x)
      if (mask(x, y)) {
        x0 = std::min(x0, x);
        y0 = std::min(y0, y);
        x1 = std::max(x1, x);
        y1 = std::max(y1, y);
      }
  if (x1 < 0) return std::nullopt;
  return Rect{x0, y0, x1 + 1, y1 + 1};
}

BinaryMap mask_contour(const BinaryMap& mask) {
  BinaryMap out(mask.width(), mask.height(), 0);
  const int w = mask.width(), h = mask.height();
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (!mask(x, y)) continue;
      const bool edge = (x > 0 && !mask(x - 1, y)) || (x + 1 < w && !mask(x + 1, y)) ||
                        (y > 0 && !mask(x, y - 1)) || (y + 1 < h && !mask(x, y + 1));
      out(x, y) = edge ? 1 : 0;
    }
  return out;
}

BinaryMap label_boundaries(const LabelMap& labels) {
  const int w = labels.width(), h = labels.height();
  BinaryMap out(w, h, 0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const auto v = labels(x, y);
      const bool b = (x + 1 < w && labels(x + 1, y) != v) || (y + 1 < h && labels(x, y + 1) != v);
      out(x, y) = b ? 1 : 0;
    }
  return out;
}

BinaryMap dilate(const BinaryMap& mask, int radius) {
  if (radius <= 0) return mask;
  const int w = mask.width(), h = mask.height();
  // Separable max filter: rows then columns.
  BinaryMap rows(w, h, 0);
  for (int y = 0; y < h; ++y) {
    int last = -1'000'000;
    for (int x = 0; x < std::min(w, radius); ++x)
      if (mask(x, y)) last = x;
    for (int x = 0; x < w; ++x) {
      const int ahead = x + radius;
      if (ahead < w && mask(ahead, y)) last = ahead;
      rows(x, y) = (last >= x - radius) ? 1 : 0;
    }
  }
  BinaryMap out(w, h, 0);
  for (int x = 0; x < w; ++x) {
    int last = -1'000'000;
    for (int y = 0; y < std::min(h, radius); ++y)
      if (rows(x, y)) last = y;
    for (int y = 0; y < h; ++y) {
      const int ahead = y + radius;
      if (ahead < h && rows(x, ahead)) last = ahead;
      out(x, y) = (last >= y - radius) ? 1 : 0;
    }
  }
  return out;
}

}  // namespace weakbound
