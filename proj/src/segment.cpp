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

#include "weakbound/segment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "weakbound/filters.hpp"
#include "weakbound/image_io.hpp"

namespace weakbound {
namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n), rank_(n, 0), size_(n, 1) {
    std::iota(parent_.begin(), parent_.end(), 0u);
  }

  std::uint32_t find(std::uint32_t x) {
    std::uint32_t root = x;
    while (parent_[root] != root) root = parent_[root];
    while (parent_[x] != root) {
      const std::uint32_t next = parent_[x];
      parent_[x] = root;
      x = next;
    }
    return root;
  }

  std::uint32_t join(std::uint32_t a, std::uint32_t b) {
    if (rank_[a] < rank_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    if (rank_[a] == rank_[b]) ++rank_[a];
    return a;
  }

  std::uint32_t size(std::uint32_t root) const { return size_[root]; }

 private:
  std::vector<std::uint32_t> parent_;
  std::vector<std::uint8_t> rank_;
  std::vector<std::uint32_t> size_;
};

struct GridEdge {
  float weight;
  std::uint32_t a, b;
};

}  // namespace

SegmentLabeling canonical_labeling(const LabelMap& labels) {
  std::unordered_map<std::int32_t, std::int32_t> remap;
  LabelMap out(labels.width(), labels.height());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto [it, inserted] = remap.try_emplace(labels[i], static_cast<std::int32_t>(remap.size()));
    out[i] = it->second;
  }
  return SegmentLabeling{std::move(out), static_cast<int>(remap.size())};
}

SegmentLabeling fh_segment(const RgbImage& image, const FhParams& params) {
  if (!(params.k > 0)) throw ParameterError("fh: k must be > 0");
  if (params.sigma < 0) throw ParameterError("fh: sigma must be >= 0");
  if (params.min_size < 1) throw ParameterError("fh: min_size must be >= 1");

  const int w = image.width(), h = image.height();
  auto ch = split_channels(image);
  for (auto& c : ch) c = gaussian_blur(c, params.sigma);

  auto dist = [&](std::size_t i, std::size_t j) {
    const float dr = ch[0][i] - ch[0][j], dg = ch[1][i] - ch[1][j], db = ch[2][i] - ch[2][j];
    return std::sqrt(dr * dr + dg * dg + db * db);
  };

  // Edges are generated in (y, x, direction) order; a stable sort by weight
  // keeps that order among equal weights.
  std::vector<GridEdge> edges;
  edges.reserve(static_cast<std::size_t>(w) * h * (params.eight_connected ? 4 : 2));
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const auto i = static_cast<std::uint32_t>(image.index(x, y));
      auto add = [&](int nx, int ny) {
        if (nx < 0 || nx >= w || ny >= h) return;
        const auto j = static_cast<std::uint32_t>(image.index(nx, ny));
        edges.push_back(GridEdge{dist(i, j), i, j});
      };
      add(x + 1, y);
      add(x, y + 1);
      if (params.eight_connected) {
        add(x + 1, y + 1);
        add(x - 1, y + 1);
      }
    }
  std::stable_sort(edges.begin(), edges.end(), [](const GridEdge& l, const GridEdge& r) { return l.weight < r.weight; });

  DisjointSets sets(image.size());
  std::vector<double> threshold(image.size(), params.k);
  for (const auto& e : edges) {
    const auto ra = sets.find(e.a), rb = sets.find(e.b);
    if (ra == rb) continue;
    if (e.weight <= threshold[ra] && e.weight <= threshold[rb]) {
      const auto root = sets.join(ra, rb);
      threshold[root] = e.weight + params.k / sets.size(root);
    }
  }
  for (const auto& e : edges) {
    const auto ra = sets.find(e.a), rb = sets.find(e.b);
    if (ra != rb && (sets.size(ra) < static_cast<std::uint32_t>(params.min_size) ||
                     sets.size(rb) < static_cast<std::uint32_t>(params.min_size)))
      sets.join(ra, rb);
  }

  LabelMap roots(w, h);
  for (std::size_t i = 0; i < image.size(); ++i) roots[i] = static_cast<std::int32_t>(sets.find(static_cast<std::uint32_t>(i)));
  return canonical_labeling(roots);
}

BinaryMap labeling_boundaries(const SegmentLabeling& seg) { return label_boundaries(seg.labels); }

void save_labeling(const SegmentLabeling& seg, const FhParams& params, const std::filesystem::path& path) {
  if (seg.num_regions > 65536) throw ParameterError("labeling has more than 65536 regions");
  Gray16Image img(seg.width(), seg.height());
  for (std::size_t i = 0; i < img.size(); ++i) img[i] = static_cast<std::uint16_t>(seg.labels[i]);
  save_image(img, path);
  nlohmann::json side = {{"num_regions", seg.num_regions},
                         {"params",
                          {{"k", params.k},
                           {"sigma", params.sigma},
                           {"min_size", params.min_size},
                           {"eight_connected", params.eight_connected}}}};
  const std::string text = side.dump(2) + "\n";
  auto sidecar = path;
  sidecar += ".json";
  write_file_atomic(sidecar, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

SegmentLabeling load_labeling(const std::filesystem::path& path) {
  const Gray16Image img = load_gray16(path);
  LabelMap labels(img.width(), img.height());
  for (std::size_t i = 0; i < img.size(); ++i) labels[i] = img[i];
  return canonical_labeling(labels);
}

GrayImage to_gray(const RgbImage& image) {
  GrayImage out(image.width(), image.height());
  for (std::size_t i = 0; i < image.size(); ++i) {
    const auto& c = image[i];
    out[i] = static_cast<std::uint8_t>(std::lround(0.299 * c.r + 0.587 * c.g + 0.114 * c.b));
  }
  return out;
}

Raster<float> canny_suppressed_magnitude(const GrayImage& image, double sigma) {
  const Plane smooth = gaussian_blur(to_plane(image), sigma);
  const Gradient g = sobel(smooth);
  const Plane mag = magnitude(g);
  const int w = image.width(), h = image.height();
  Raster<float> out(w, h, 0.0f);
  auto at = [&](int x, int y) { return (x < 0 || y < 0 || x >= w || y >= h) ? 0.0f : mag(x, y); };
  constexpr double kPi = 3.14159265358979323846;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const float m = mag(x, y);
      if (m <= 0) continue;
      double angle = std::atan2(g.gy(x, y), g.gx(x, y));
      if (angle < 0) angle += kPi;
      const int sector = static_cast<int>(std::floor((angle + kPi / 8) / (kPi / 4))) % 4;
      static constexpr int kDx[4] = {1, 1, 0, -1};
      static constexpr int kDy[4] = {0, 1, 1, 1};
      const float before = at(x - kDx[sector], y - kDy[sector]);
      const float after = at(x + kDx[sector], y + kDy[sector]);
      // Strict on one side so plateaus of equal magnitude keep a single pixel.
      if (m > before && m >= after) out(x, y) = m;
    }
  return out;
}

BinaryMap hysteresis(const Raster<float>& magnitude, double low, double high) {
  if (low > high) throw ParameterError("hysteresis: low must be <= high");
  const int w = magnitude.width(), h = magnitude.height();
  BinaryMap out(w, h, 0);
  std::vector<std::uint32_t> stack;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const float m = magnitude(x, y);
      if (m > 0 && m >= high && !out(x, y)) {
        out(x, y) = 1;
        stack.push_back(static_cast<std::uint32_t>(magnitude.index(x, y)));
      }
    }
  while (!stack.empty()) {
    const std::uint32_t i = stack.back();
    stack.pop_back();
    const int x = static_cast<int>(i % w), y = static_cast<int>(i / w);
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        const int nx = x + dx, ny = y + dy;
        if (!magnitude.contains(nx, ny) || out(nx, ny)) continue;
        const float m = magnitude(nx, ny);
        if (m > 0 && m >= low) {
          out(nx, ny) = 1;
          stack.push_back(static_cast<std::uint32_t>(magnitude.index(nx, ny)));
        }
      }
  }
  return out;
}

BinaryMap canny(const GrayImage& image, double sigma, double low, double high) {
  if (low < 0 || low > high) throw ParameterError("canny: need 0 <= low <= high");
  return hysteresis(canny_suppressed_magnitude(image, sigma), low, high);
}

}  // namespace weakbound
