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

#include "weakbound/proposals.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <queue>
#include <set>
#include <unordered_map>

#include <json.hpp>

#include "weakbound/filters.hpp"

namespace weakbound {
namespace {

constexpr int kColorBins = 25;
constexpr int kOrientations = 8;
constexpr int kTextureBins = 10;
constexpr int kColorDims = 3 * kColorBins;
constexpr int kTextureDims = 3 * kOrientations * kTextureBins;

struct Region {
  std::int64_t size = 0;
  Rect box;
  std::vector<float> color;  // L1-normalised
  std::vector<float> texture;
  std::vector<std::uint32_t> pixels;
  std::set<int> neighbours;
  bool alive = true;
};

double intersection(const std::vector<float>& a, const std::vector<float>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::min(a[i], b[i]);
  return s;
}

Rect bound(const Rect& a, const Rect& b) {
  return Rect{std::min(a.x0, b.x0), std::min(a.y0, b.y0), std::max(a.x1, b.x1), std::max(a.y1, b.y1)};
}

std::vector<float> merged(const std::vector<float>& a, std::int64_t na, const std::vector<float>& b, std::int64_t nb) {
  std::vector<float> out(a.size());
  const double t = static_cast<double>(na + nb);
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = static_cast<float>((a[i] * na + b[i] * nb) / t);
  return out;
}

std::string source_tag(const SimilarityWeights& w) {
  std::string tag = "sese:rgb:";
  if (w.color > 0) tag += 'C';
  if (w.texture > 0) tag += 'T';
  if (w.size > 0) tag += 'S';
  if (w.fill > 0) tag += 'F';
  return tag;
}

// Per pixel: 10-bin histogram index of the positive directional derivative
// for every channel and orientation.
std::vector<std::uint8_t> texture_bins(const RgbImage& image) {
  const auto ch = split_channels(image);
  const std::size_t n = image.size();
  std::vector<std::uint8_t> bins(n * 3 * kOrientations);
  constexpr double kPi = 3.14159265358979323846;
  for (int c = 0; c < 3; ++c) {
    const Gradient g = sobel(gaussian_blur(ch[c], 1.0));
    std::vector<float> resp(n * kOrientations);
    float max_r = 0;
    for (int o = 0; o < kOrientations; ++o) {
      const double th = o * 2.0 * kPi / kOrientations;
      const float co = static_cast<float>(std::cos(th)), si = static_cast<float>(std::sin(th));
      for (std::size_t i = 0; i < n; ++i) {
        const float r = std::max(0.0f, g.gx[i] * co + g.gy[i] * si);
        resp[i * kOrientations + o] = r;
        max_r = std::max(max_r, r);
      }
    }
    for (std::size_t i = 0; i < n; ++i)
      for (int o = 0; o < kOrientations; ++o) {
        const float r = resp[i * kOrientations + o];
        const int b = max_r > 0 ? std::min(kTextureBins - 1, static_cast<int>(r / max_r * kTextureBins)) : 0;
        bins[(i * 3 + c) * kOrientations + o] = static_cast<std::uint8_t>(b);
      }
  }
  return bins;
}

}  // namespace

BinaryMap Proposal::mask() const {
  BinaryMap m(image_width, image_height, 0);
  for (auto p : pixels) m[p] = 1;
  return m;
}

std::uint64_t Proposal::hash() const noexcept {
  // FNV-1a over the index bytes.
  std::uint64_t h = 1469598103934665603ull;
  for (auto p : pixels)
    for (int s = 0; s < 32; s += 8) {
      h ^= (p >> s) & 0xffu;
      h *= 1099511628211ull;
    }
  return h;
}

std::vector<Proposal> selective_search_hierarchy(const RgbImage& image, const SegmentLabeling& base,
                                                 const SimilarityWeights& weights) {
  if (!image.same_shape(base.labels)) throw ParameterError("selective_search: base labeling size differs from image");
  if (weights.color < 0 || weights.texture < 0 || weights.size < 0 || weights.fill < 0 ||
      !(weights.color > 0 || weights.texture > 0 || weights.size > 0 || weights.fill > 0))
    throw ParameterError("selective_search: weights must be >= 0 with at least one > 0");

  const int w = image.width(), h = image.height();
  const auto n = static_cast<std::size_t>(base.num_regions);
  const double im_size = static_cast<double>(image.size());
  std::vector<Region> regions(n);
  for (auto& r : regions) {
    r.box = Rect{w, h, -1, -1};
    r.color.assign(kColorDims, 0.0f);
    r.texture.assign(kTextureDims, 0.0f);
  }
  const auto tex = texture_bins(image);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const std::size_t i = image.index(x, y);
      Region& r = regions[base.labels[i]];
      ++r.size;
      r.box = Rect{std::min(r.box.x0, x), std::min(r.box.y0, y), std::max(r.box.x1, x + 1), std::max(r.box.y1, y + 1)};
      r.pixels.push_back(static_cast<std::uint32_t>(i));
      const Rgb& c = image[i];
      r.color[c.r * kColorBins / 256] += 1;
      r.color[kColorBins + c.g * kColorBins / 256] += 1;
      r.color[2 * kColorBins + c.b * kColorBins / 256] += 1;
      for (int ch = 0; ch < 3; ++ch)
        for (int o = 0; o < kOrientations; ++o)
          r.texture[(ch * kOrientations + o) * kTextureBins + tex[(i * 3 + ch) * kOrientations + o]] += 1;
      if (x + 1 < w && base.labels(x + 1, y) != base.labels[i]) {
        r.neighbours.insert(base.labels(x + 1, y));
        regions[base.labels(x + 1, y)].neighbours.insert(base.labels[i]);
      }
      if (y + 1 < h && base.labels(x, y + 1) != base.labels[i]) {
        r.neighbours.insert(base.labels(x, y + 1));
        regions[base.labels(x, y + 1)].neighbours.insert(base.labels[i]);
      }
    }
  for (auto& r : regions) {
    for (auto& v : r.color) v /= 3.0f * static_cast<float>(r.size);
    for (auto& v : r.texture) v /= 3.0f * kOrientations * static_cast<float>(r.size);
  }

  auto similarity = [&](const Region& a, const Region& b) {
    double s = 0;
    if (weights.color > 0) s += weights.color * intersection(a.color, b.color);
    if (weights.texture > 0) s += weights.texture * intersection(a.texture, b.texture);
    if (weights.size > 0) s += weights.size * (1.0 - static_cast<double>(a.size + b.size) / im_size);
    if (weights.fill > 0)
      s += weights.fill * (1.0 - static_cast<double>(bound(a.box, b.box).area() - a.size - b.size) / im_size);
    return s;
  };

  struct Candidate {
    double sim;
    int a, b;
    bool operator<(const Candidate& o) const {
      if (sim != o.sim) return sim < o.sim;
      if (a != o.a) return a > o.a;
      return b > o.b;
    }
  };
  std::priority_queue<Candidate> queue;
  for (std::size_t i = 0; i < n; ++i)
    for (int j : regions[i].neighbours)
      if (static_cast<int>(i) < j) queue.push(Candidate{similarity(regions[i], regions[j]), static_cast<int>(i), j});

  const std::string tag = source_tag(weights);
  std::vector<Proposal> out;
  out.reserve(2 * n);
  auto emit = [&](const Region& r) {
    out.push_back(Proposal{w, h, r.pixels, r.box, tag});
  };
  for (const auto& r : regions) emit(r);

  while (!queue.empty()) {
    const Candidate c = queue.top();
    queue.pop();
    if (!regions[c.a].alive || !regions[c.b].alive) continue;
    Region merged_region;
    {
      Region& a = regions[c.a];
      Region& b = regions[c.b];
      merged_region.size = a.size + b.size;
      merged_region.box = bound(a.box, b.box);
      merged_region.color = merged(a.color, a.size, b.color, b.size);
      merged_region.texture = merged(a.texture, a.size, b.texture, b.size);
      merged_region.pixels.resize(a.pixels.size() + b.pixels.size());
      std::merge(a.pixels.begin(), a.pixels.end(), b.pixels.begin(), b.pixels.end(), merged_region.pixels.begin());
      for (int k : a.neighbours)
        if (k != c.b) merged_region.neighbours.insert(k);
      for (int k : b.neighbours)
        if (k != c.a) merged_region.neighbours.insert(k);
      a.alive = b.alive = false;
      // Only the merged region's pixel list is needed from here on.
      std::vector<std::uint32_t>().swap(a.pixels);
      std::vector<std::uint32_t>().swap(b.pixels);
    }
    const int id = static_cast<int>(regions.size());
    emit(merged_region);
    for (int k : merged_region.neighbours) {
      regions[k].neighbours.erase(c.a);
      regions[k].neighbours.erase(c.b);
      regions[k].neighbours.insert(id);
    }
    regions.push_back(std::move(merged_region));
    for (int k : regions[id].neighbours) queue.push(Candidate{similarity(regions[k], regions[id]), k, id});
  }
  return out;
}

std::vector<Proposal> dedup_proposals(std::vector<Proposal> proposals) {
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> seen;
  std::vector<Proposal> out;
  for (auto& p : proposals) {
    auto& bucket = seen[p.hash()];
    const bool dup = std::any_of(bucket.begin(), bucket.end(), [&](std::size_t k) { return out[k].pixels == p.pixels; });
    if (dup) continue;
    bucket.push_back(out.size());
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<Proposal> selective_search(const RgbImage& image, const SegmentLabeling& base,
                                       const SimilarityWeights& weights, std::size_t max_proposals) {
  auto out = dedup_proposals(selective_search_hierarchy(image, base, weights));
  if (max_proposals > 0 && out.size() > max_proposals) out.resize(max_proposals);
  return out;
}

std::vector<std::vector<std::size_t>> match_proposals(std::span<const Proposal> proposals,
                                                      std::span<const DetectionBox> detections, double iou_min) {
  std::vector<std::vector<std::size_t>> out(detections.size());
  for (std::size_t d = 0; d < detections.size(); ++d)
    for (std::size_t p = 0; p < proposals.size(); ++p)
      if (iou(proposals[p].rect, detections[d].rect) >= iou_min) out[d].push_back(p);
  return out;
}

BinaryMap union_boundaries(std::span<const Proposal> proposals, std::span<const std::size_t> selected, int width,
                           int height) {
  BinaryMap out(width, height, 0);
  for (std::size_t k : selected) {
    const Proposal& p = proposals[k];
    if (p.image_width != width || p.image_height != height)
      throw ParameterError("union_boundaries: proposal size differs from output size");
    const BinaryMap c = mask_contour(p.mask());
    for (std::size_t i = 0; i < c.size(); ++i) out[i] |= c[i];
  }
  return out;
}

BinaryMap union_boundaries(std::span<const Proposal> proposals, int width, int height) {
  std::vector<std::size_t> all(proposals.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return union_boundaries(proposals, all, width, height);
}

TriStateMask consensus_boundaries(std::span<const BinaryMap> maps, double agreement, int tol) {
  if (maps.empty()) throw ParameterError("consensus: need at least one map");
  for (const auto& m : maps)
    if (!m.same_shape(maps[0])) throw ParameterError("consensus: maps differ in size");
  const int w = maps[0].width(), h = maps[0].height();
  std::vector<std::uint32_t> support(maps[0].size(), 0);
  BinaryMap any(w, h, 0);
  for (const auto& m : maps) {
    const BinaryMap d = dilate(m, tol);
    for (std::size_t i = 0; i < d.size(); ++i) {
      support[i] += d[i];
      any[i] |= m[i];
    }
  }
  TriStateMask out(w, h, Tri::Negative);
  const double total = static_cast<double>(maps.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!any[i]) continue;
    out[i] = (static_cast<double>(support[i]) / total > agreement) ? Tri::Positive : Tri::Ignore;
  }
  return out;
}

double strict_agreement(std::size_t num_maps) noexcept {
  return (static_cast<double>(num_maps) - 0.5) / static_cast<double>(num_maps);
}

std::vector<std::uint32_t> rle_encode(const BinaryMap& mask) {
  std::vector<std::uint32_t> runs;
  std::uint8_t current = 0;
  std::uint32_t len = 0;
  for (auto v : mask.pixels()) {
    const std::uint8_t b = v ? 1 : 0;
    if (b != current) {
      runs.push_back(len);
      len = 0;
      current = b;
    }
    ++len;
  }
  runs.push_back(len);
  return runs;
}

BinaryMap rle_decode(std::span<const std::uint32_t> runs, int width, int height) {
  BinaryMap out(width, height, 0);
  std::size_t pos = 0;
  std::uint8_t value = 0;
  for (auto len : runs) {
    if (pos + len > out.size()) throw ParameterError("mask_rle: runs exceed the image size");
    std::fill_n(out.pixels().begin() + static_cast<std::ptrdiff_t>(pos), len, value);
    pos += len;
    value ^= 1;
  }
  if (pos != out.size()) throw ParameterError("mask_rle: runs do not cover the image");
  return out;
}

void write_proposals(std::ostream& out, const std::string& image_id, std::span<const Proposal> proposals) {
  for (const auto& p : proposals) {
    nlohmann::json j = {{"image", image_id},
                        {"rect", {p.rect.x0, p.rect.y0, p.rect.x1, p.rect.y1}},
                        {"size", {p.image_width, p.image_height}},
                        {"mask_rle", rle_encode(p.mask())}};
    if (!p.source.empty()) j["source"] = p.source;
    out << j.dump() << '\n';
  }
}

std::vector<Proposal> read_proposals(std::istream& in, const std::string& image_id, int width, int height) {
  std::vector<Proposal> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      if (j.at("image").get<std::string>() != image_id) continue;
      int w = width, h = height;
      if (j.contains("size")) {
        w = j["size"].at(0).get<int>();
        h = j["size"].at(1).get<int>();
        if (w != width || h != height) throw ValidationError("proposal size differs from the image", lineno);
      }
      const auto runs = j.at("mask_rle").get<std::vector<std::uint32_t>>();
      const BinaryMap m = rle_decode(runs, w, h);
      Proposal p{w, h, {}, {}, j.value("source", std::string("external"))};
      for (std::uint32_t i = 0; i < m.size(); ++i)
        if (m[i]) p.pixels.push_back(i);
      if (p.pixels.empty()) throw ValidationError("proposal mask is empty", lineno);
      p.rect = *tight_rect(m);
      out.push_back(std::move(p));
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(std::string("bad proposal record: ") + e.what(), lineno);
    } catch (const ParameterError& e) {
      throw ValidationError(e.what(), lineno);
    }
  }
  return out;
}

std::vector<Proposal> load_proposals(const std::filesystem::path& path, const std::string& image_id, int width,
                                     int height) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return read_proposals(in, image_id, width, height);
}

}  // namespace weakbound
