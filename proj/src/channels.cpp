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

#include "weakbound/channels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace weakbound {
namespace {

constexpr int kPad = kPatchIn / 2;
constexpr int kRegularSmooth = 1;
constexpr int kSimilaritySmooth = 2;
constexpr int kNormRadius = 4;
constexpr float kNormEps = 0.01f;
constexpr std::array<double, kGradientScales> kScaleSigma{0.0, 2.0};

float srgb_to_linear(int v) {
  const double c = v / 255.0;
  return static_cast<float>(c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4));
}

RgbImage pad_replicate(const RgbImage& img, int pad) {
  const int w = img.width(), h = img.height();
  RgbImage out(w + 2 * pad, h + 2 * pad);
  for (int y = 0; y < out.height(); ++y)
    for (int x = 0; x < out.width(); ++x) out(x, y) = img(std::clamp(x - pad, 0, w - 1), std::clamp(y - pad, 0, h - 1));
  return out;
}

// Appends the magnitude and the orientation-binned magnitudes of one scale.
void append_gradient_channels(const std::array<Plane, 3>& luv, double sigma, std::vector<Plane>& out) {
  const int w = luv[0].width(), h = luv[0].height();
  Plane mag(w, h, 0.f), ori(w, h, 0.f);
  for (const auto& c : luv) {
    const Gradient g = sobel(sigma > 0 ? gaussian_blur(c, sigma) : triangle_blur(c, 1));
    for (std::size_t i = 0; i < mag.size(); ++i) {
      const float m = std::hypot(g.gx[i], g.gy[i]);
      if (m > mag[i]) {
        mag[i] = m;
        float t = std::atan2(g.gy[i], g.gx[i]);
        if (t < 0) t += std::numbers::pi_v<float>;
        ori[i] = t;
      }
    }
  }
  const Plane local = triangle_blur(mag, kNormRadius);
  for (std::size_t i = 0; i < mag.size(); ++i) mag[i] /= local[i] + kNormEps;

  out.push_back(mag);
  const std::size_t first = out.size();
  for (int k = 0; k < kOrientations; ++k) out.emplace_back(w, h, 0.f);
  const float step = std::numbers::pi_v<float> / kOrientations;
  for (std::size_t i = 0; i < mag.size(); ++i) {
    const int bin = static_cast<int>(std::lround(ori[i] / step)) % kOrientations;
    out[first + static_cast<std::size_t>(bin)][i] = mag[i];
  }
}

std::vector<FeatureRef> build_table() {
  std::vector<FeatureRef> t;
  t.reserve(kFeatureDim);
  for (int c = 0; c < kNumChannels; ++c)
    for (int j = 0; j < kCellsIn; ++j)
      for (int i = 0; i < kCellsIn; ++i)
        t.push_back({static_cast<std::uint16_t>(c), false, static_cast<std::uint8_t>(i), static_cast<std::uint8_t>(j), 0,
                     0});
  std::array<int, kSimGrid> centre{};
  for (int k = 0; k < kSimGrid; ++k)
    centre[k] = static_cast<int>(std::lround((k + 0.5) * kCellsIn / kSimGrid));
  for (int c = 0; c < kNumChannels; ++c)
    for (int a = 0; a < kSimGrid * kSimGrid; ++a)
      for (int b = a + 1; b < kSimGrid * kSimGrid; ++b)
        t.push_back({static_cast<std::uint16_t>(c), true, static_cast<std::uint8_t>(centre[a % kSimGrid]),
                     static_cast<std::uint8_t>(centre[a / kSimGrid]), static_cast<std::uint8_t>(centre[b % kSimGrid]),
                     static_cast<std::uint8_t>(centre[b / kSimGrid])});
  return t;
}

}  // namespace

std::array<Plane, 3> rgb_to_luv(const RgbImage& image) {
  static const auto lut = [] {
    std::array<float, 256> l{};
    for (int i = 0; i < 256; ++i) l[i] = srgb_to_linear(i);
    return l;
  }();
  const int w = image.width(), h = image.height();
  std::array<Plane, 3> out{Plane(w, h), Plane(w, h), Plane(w, h)};
  constexpr double un = 0.197833, vn = 0.468331;
  for (std::size_t i = 0; i < image.size(); ++i) {
    const double r = lut[image[i].r], g = lut[image[i].g], b = lut[image[i].b];
    const double x = 0.412453 * r + 0.357580 * g + 0.180423 * b;
    const double y = 0.212671 * r + 0.715160 * g + 0.072169 * b;
    const double z = 0.019334 * r + 0.119193 * g + 0.950227 * b;
    const double l = y > 0.008856 ? 116.0 * std::cbrt(y) - 16.0 : 903.3 * y;
    const double d = x + 15.0 * y + 3.0 * z;
    double u = 0, v = 0;
    if (d > 1e-12) {
      u = 13.0 * l * (4.0 * x / d - un);
      v = 13.0 * l * (9.0 * y / d - vn);
    }
    out[0][i] = static_cast<float>(l / 100.0);
    out[1][i] = static_cast<float>((u + 134.0) / 354.0);
    out[2][i] = static_cast<float>((v + 140.0) / 262.0);
  }
  return out;
}

std::vector<Plane> raw_channels(const RgbImage& image) {
  const auto luv = rgb_to_luv(image);
  std::vector<Plane> out(luv.begin(), luv.end());
  for (double sigma : kScaleSigma) append_gradient_channels(luv, sigma, out);
  return out;
}

FeatureChannels compute_channels(const RgbImage& image) {
  FeatureChannels ch;
  ch.image_width = image.width();
  ch.image_height = image.height();
  for (auto& plane : raw_channels(pad_replicate(image, kPad))) {
    const Plane s = shrink2(plane);
    ch.regular.push_back(triangle_blur(s, kRegularSmooth));
    ch.similarity.push_back(triangle_blur(s, kSimilaritySmooth));
  }
  return ch;
}

const std::vector<FeatureRef>& feature_table() {
  static const auto table = build_table();
  return table;
}

float channel_feature(const FeatureChannels& ch, std::uint32_t f, int cx, int cy) noexcept {
  const FeatureRef& r = feature_table()[f];
  const int sx = cx / kShrink, sy = cy / kShrink;
  if (!r.similarity) return ch.regular[r.channel](sx + r.ax, sy + r.ay);
  const Plane& p = ch.similarity[r.channel];
  return p(sx + r.ax, sy + r.ay) - p(sx + r.bx, sy + r.by);
}

}  // namespace weakbound
