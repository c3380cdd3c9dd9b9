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

#include "weakbound/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "weakbound/rng.hpp"

namespace weakbound {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Smooth periodic radial noise with unit RMS over the circle.
struct Wobble {
  std::array<int, 3> freq{};
  std::array<double, 3> amp{}, phase{};

  explicit Wobble(std::uint64_t seed) {
    Rng rng(seed);
    std::array<int, 6> pool{3, 4, 5, 6, 7, 8};
    for (std::size_t i = 0; i < freq.size(); ++i) {
      std::swap(pool[i], pool[i + rng.below(pool.size() - i)]);
      freq[i] = pool[i];
      amp[i] = rng.uniform(0.5, 1.0);
      phase[i] = rng.uniform(0.0, kTwoPi);
    }
    double power = 0;
    for (double a : amp) power += a * a / 2.0;
    for (double& a : amp) a /= std::sqrt(power);
  }
  double operator()(double theta) const noexcept {
    double v = 0;
    for (std::size_t i = 0; i < freq.size(); ++i) v += amp[i] * std::sin(freq[i] * theta + phase[i]);
    return v;
  }
  double bound() const noexcept { return amp[0] + amp[1] + amp[2]; }
};

double cross(double ax, double ay, double bx, double by) noexcept { return ax * by - ay * bx; }

Shape random_shape(Rng& rng, const SynthParams& p) {
  Shape s;
  const double side = std::min(p.width, p.height);
  const double r = rng.uniform(p.min_radius, p.max_radius) * side;
  s.cx = rng.uniform(0.15, 0.85) * p.width;
  s.cy = rng.uniform(0.15, 0.85) * p.height;
  if (rng.uniform() < 0.5) {
    s.kind = ShapeKind::Polygon;
    const int n = rng.between(3, 8);
    const double offset = rng.uniform(0.0, kTwoPi);
    for (int k = 0; k < n; ++k) {
      double t = std::fmod(offset + (k + rng.uniform(-0.3, 0.3)) * kTwoPi / n, kTwoPi);
      if (t < 0) t += kTwoPi;
      s.vertices.emplace_back(t, rng.uniform(0.65, 1.0) * r);
    }
    std::sort(s.vertices.begin(), s.vertices.end());
  } else {
    s.kind = ShapeKind::Ellipse;
    s.a = r;
    s.b = r * rng.uniform(0.5, 1.0);
    s.phi = rng.uniform(0.0, std::numbers::pi);
  }
  return s;
}

int color_distance(const Rgb& a, const Rgb& b) noexcept {
  return std::abs(a.r - b.r) + std::abs(a.g - b.g) + std::abs(a.b - b.b);
}

Rgb random_color(Rng& rng) {
  return {static_cast<std::uint8_t>(rng.below(256)), static_cast<std::uint8_t>(rng.below(256)),
          static_cast<std::uint8_t>(rng.below(256))};
}

std::uint64_t fnv1a(const std::string& s) noexcept {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) h = (h ^ c) * 1099511628211ull;
  return h;
}

}  // namespace

double Shape::radius_at(double theta) const noexcept {
  if (kind == ShapeKind::Ellipse) {
    const double c = std::cos(theta - phi) / a, s = std::sin(theta - phi) / b;
    return 1.0 / std::sqrt(c * c + s * s);
  }
  theta = std::fmod(theta, kTwoPi);
  if (theta < 0) theta += kTwoPi;
  const std::size_t n = vertices.size();
  std::size_t i = n - 1;
  for (std::size_t k = 0; k < n; ++k)
    if (vertices[k].first <= theta) i = k;
  const auto [t0, r0] = vertices[i];
  const auto [t1, r1] = vertices[(i + 1) % n];
  const double px = r0 * std::cos(t0), py = r0 * std::sin(t0);
  const double ex = r1 * std::cos(t1) - px, ey = r1 * std::sin(t1) - py;
  const double den = cross(std::cos(theta), std::sin(theta), ex, ey);
  if (std::abs(den) < 1e-12) return std::max(r0, r1);
  return cross(px, py, ex, ey) / den;
}

double Shape::max_radius() const noexcept {
  if (kind == ShapeKind::Ellipse) return std::max(a, b);
  double m = 0;
  for (const auto& v : vertices) m = std::max(m, v.second);
  return m;
}

LabelMap render_labels(const std::vector<Shape>& shapes, int width, int height, double sigma, std::uint64_t seed,
                       const std::vector<bool>& keep) {
  LabelMap out(width, height, 0);
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    if (!keep.empty() && !keep[i]) continue;
    const Shape& s = shapes[i];
    const Wobble wobble(mix_seed(seed, i));
    const double reach = s.max_radius() + std::abs(sigma) * wobble.bound() + 1.0;
    const int x0 = std::max(0, static_cast<int>(std::floor(s.cx - reach)));
    const int x1 = std::min(width - 1, static_cast<int>(std::ceil(s.cx + reach)));
    const int y0 = std::max(0, static_cast<int>(std::floor(s.cy - reach)));
    const int y1 = std::min(height - 1, static_cast<int>(std::ceil(s.cy + reach)));
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x) {
        const double dx = x - s.cx, dy = y - s.cy;
        const double rho = std::hypot(dx, dy);
        const double theta = std::atan2(dy, dx);
        double r = s.radius_at(theta);
        if (sigma != 0) r += sigma * wobble(theta);
        if (rho <= r) out(x, y) = static_cast<std::int32_t>(i + 1);
      }
  }
  return out;
}

SynthSample synth_sample(const SynthParams& p, std::uint64_t seed, std::size_t index) {
  if (p.width < 8 || p.height < 8) throw ParameterError("synth: images must be at least 8x8");
  if (p.min_shapes < 1 || p.max_shapes < p.min_shapes) throw ParameterError("synth: invalid shape count range");
  Rng rng(mix_seed(seed, index));
  SynthSample s;
  char id[32];
  std::snprintf(id, sizeof id, "synth_%05zu", index);
  s.id = id;

  const Rgb base = random_color(rng);
  const double f1x = rng.uniform(0.05, 0.3), f1y = rng.uniform(0.05, 0.3), ph1 = rng.uniform(0.0, kTwoPi);
  const double f2x = rng.uniform(0.2, 0.6), f2y = rng.uniform(0.2, 0.6), ph2 = rng.uniform(0.0, kTwoPi);

  const int n = rng.between(p.min_shapes, p.max_shapes);
  for (int k = 0; k < n; ++k) {
    Shape sh = random_shape(rng, p);
    Rgb c = random_color(rng);
    for (int tries = 0; tries < 200; ++tries) {
      bool ok = color_distance(c, base) >= 150;
      for (const auto& o : s.shapes) ok = ok && color_distance(c, o.color) >= 90;
      if (ok) break;
      c = random_color(rng);
    }
    sh.color = c;
    s.shapes.push_back(std::move(sh));
  }
  s.instances = render_labels(s.shapes, p.width, p.height, 0.0, 0);

  s.image = RgbImage(p.width, p.height);
  for (int y = 0; y < p.height; ++y)
    for (int x = 0; x < p.width; ++x) {
      const auto l = s.instances(x, y);
      if (l > 0) {
        s.image(x, y) = s.shapes[static_cast<std::size_t>(l - 1)].color;
        continue;
      }
      const double t = 18.0 * std::sin(f1x * x + f1y * y + ph1) + 12.0 * std::sin(f2x * x - f2y * y + ph2);
      auto ch = [&](std::uint8_t v) {
        return static_cast<std::uint8_t>(std::clamp(std::lround(v + t + rng.uniform(-6.0, 6.0)), 0l, 255l));
      };
      s.image(x, y) = {ch(base.r), ch(base.g), ch(base.b)};
    }

  for (std::size_t i = 0; i < s.shapes.size(); ++i) {
    BinaryMap m(p.width, p.height, 0);
    for (std::size_t k = 0; k < m.size(); ++k) m[k] = s.instances[k] == static_cast<std::int32_t>(i + 1);
    if (auto r = tight_rect(m))
      s.detections.push_back({s.shapes[i].kind == ShapeKind::Polygon ? 0 : 1, 1.0, *r});
  }
  return s;
}

std::vector<SynthSample> synth_dataset(const SynthParams& params, std::size_t n, std::uint64_t seed) {
  std::vector<SynthSample> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(synth_sample(params, seed, i));
  return out;
}

TriStateMask boundary_annotation(const LabelMap& labels) {
  const BinaryMap b = label_boundaries(labels);
  TriStateMask out(labels.width(), labels.height(), Tri::Negative);
  for (std::size_t i = 0; i < b.size(); ++i)
    if (b[i]) out[i] = Tri::Positive;
  return out;
}

TriStateMask corrupt_annotation(const SynthSample& sample, const NoiseParams& noise, std::uint64_t seed) {
  for (double r : {noise.drop_rate, noise.spurious_rate})
    if (!(r >= 0 && r <= 1)) throw ParameterError("corrupt_annotation: rates must lie in [0,1]");
  if (!(noise.jitter_sigma >= 0)) throw ParameterError("corrupt_annotation: jitter must be >= 0");
  const int w = sample.instances.width(), h = sample.instances.height();
  Rng rng(mix_seed(seed, fnv1a(sample.id)));
  std::vector<bool> keep(sample.shapes.size(), true);
  for (std::size_t i = 0; i < keep.size(); ++i) keep[i] = !(rng.uniform() < noise.drop_rate);
  const std::uint64_t jitter_seed = rng.next();
  TriStateMask out = boundary_annotation(render_labels(sample.shapes, w, h, noise.jitter_sigma, jitter_seed, keep));

  SynthParams geometry;
  geometry.width = w;
  geometry.height = h;
  for (std::size_t i = 0; i < sample.shapes.size(); ++i) {
    if (!(rng.uniform() < noise.spurious_rate)) continue;
    const LabelMap extra = render_labels({random_shape(rng, geometry)}, w, h, 0.0, 0);
    BinaryMap m(w, h, 0);
    for (std::size_t k = 0; k < m.size(); ++k) m[k] = extra[k] != 0;
    const BinaryMap c = mask_contour(m);
    for (std::size_t k = 0; k < c.size(); ++k)
      if (c[k]) out[k] = Tri::Positive;
  }
  return out;
}

}  // namespace weakbound
