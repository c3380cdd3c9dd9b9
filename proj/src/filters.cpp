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

#include "weakbound/filters.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace weakbound {
namespace {

// Unnormalized weights, accumulated in double and divided once, so constant
// input comes back exactly.
Plane convolve_separable(const Plane& in, const std::vector<double>& k) {
  const int w = in.width(), h = in.height();
  const int r = static_cast<int>(k.size() / 2);
  double norm = 0;
  for (double v : k) norm += v;
  Plane tmp(w, h), out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0;
      for (int i = -r; i <= r; ++i) acc += k[i + r] * in(std::clamp(x + i, 0, w - 1), y);
      tmp(x, y) = static_cast<float>(acc / norm);
    }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0;
      for (int i = -r; i <= r; ++i) acc += k[i + r] * tmp(x, std::clamp(y + i, 0, h - 1));
      out(x, y) = static_cast<float>(acc / norm);
    }
  return out;
}

}  // namespace

std::array<Plane, 3> split_channels(const RgbImage& img) {
  std::array<Plane, 3> out{Plane(img.width(), img.height()), Plane(img.width(), img.height()),
                           Plane(img.width(), img.height())};
  for (std::size_t i = 0; i < img.size(); ++i) {
    out[0][i] = img[i].r;
    out[1][i] = img[i].g;
    out[2][i] = img[i].b;
  }
  return out;
}

Plane to_plane(const GrayImage& img) {
  Plane out(img.width(), img.height());
  for (std::size_t i = 0; i < img.size(); ++i) out[i] = img[i];
  return out;
}

Plane gaussian_blur(const Plane& in, double sigma) {
  if (sigma <= 0) return in;
  const int r = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(2 * r + 1);
  for (int i = -r; i <= r; ++i) k[i + r] = std::exp(-0.5 * i * i / (sigma * sigma));
  return convolve_separable(in, k);
}

Plane triangle_blur(const Plane& in, int radius) {
  if (radius <= 0) return in;
  std::vector<double> k(2 * radius + 1);
  for (int i = -radius; i <= radius; ++i) k[i + radius] = radius + 1 - std::abs(i);
  return convolve_separable(in, k);
}

Gradient sobel(const Plane& in) {
  const int w = in.width(), h = in.height();
  Gradient g{Plane(w, h), Plane(w, h)};
  auto at = [&](int x, int y) { return in(std::clamp(x, 0, w - 1), std::clamp(y, 0, h - 1)); };
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      g.gx(x, y) = (at(x + 1, y - 1) + 2 * at(x + 1, y) + at(x + 1, y + 1) - at(x - 1, y - 1) - 2 * at(x - 1, y) -
                    at(x - 1, y + 1)) / 8.0f;
      g.gy(x, y) = (at(x - 1, y + 1) + 2 * at(x, y + 1) + at(x + 1, y + 1) - at(x - 1, y - 1) - 2 * at(x, y - 1) -
                    at(x + 1, y - 1)) / 8.0f;
    }
  return g;
}

Plane magnitude(const Gradient& g) {
  Plane out(g.gx.width(), g.gx.height());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::sqrt(g.gx[i] * g.gx[i] + g.gy[i] * g.gy[i]);
  return out;
}

float sample_bilinear(const Plane& p, float x, float y) noexcept {
  const int w = p.width(), h = p.height();
  x = std::clamp(x, 0.0f, static_cast<float>(w - 1));
  y = std::clamp(y, 0.0f, static_cast<float>(h - 1));
  const int x0 = static_cast<int>(x), y0 = static_cast<int>(y);
  const int x1 = std::min(x0 + 1, w - 1), y1 = std::min(y0 + 1, h - 1);
  const float fx = x - x0, fy = y - y0;
  return (1 - fy) * ((1 - fx) * p(x0, y0) + fx * p(x1, y0)) + fy * ((1 - fx) * p(x0, y1) + fx * p(x1, y1));
}

Plane shrink2(const Plane& in) {
  const int w = in.width(), h = in.height();
  const int ow = (w + 1) / 2, oh = (h + 1) / 2;
  Plane out(ow, oh);
  for (int y = 0; y < oh; ++y)
    for (int x = 0; x < ow; ++x) {
      const int xa = 2 * x, ya = 2 * y;
      const int xb = std::min(xa + 1, w - 1), yb = std::min(ya + 1, h - 1);
      out(x, y) = 0.25f * (in(xa, ya) + in(xb, ya) + in(xa, yb) + in(xb, yb));
    }
  return out;
}

}  // namespace weakbound
