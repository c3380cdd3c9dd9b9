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

#include "weakbound/forest.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "weakbound/image_io.hpp"
#include "weakbound/parallel.hpp"
#include "weakbound/rng.hpp"

namespace weakbound {
namespace {

constexpr char kMagic[8] = {'S', 'E', 'D', 'F', '0', '0', '0', '1'};
constexpr int kHalf = kPatchOut / 2;

std::uint64_t mix(std::uint64_t a, std::uint64_t b) noexcept { return mix_seed(a, b); }

// Same-segment indicators, one row of `pairs.size()` bytes per indexed target.
std::vector<std::uint8_t> indicators(std::span<const SegPatch> targets, std::span<const std::uint32_t> idx,
                                     std::span<const PixelPair> pairs) {
  std::vector<std::uint8_t> z(idx.size() * pairs.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const SegPatch& t = targets[idx[i]];
    std::uint8_t* row = z.data() + i * pairs.size();
    for (std::size_t k = 0; k < pairs.size(); ++k) row[k] = t[pairs[k].a] == t[pairs[k].b];
  }
  return z;
}

std::size_t medoid_of(const std::vector<std::uint8_t>& z, std::size_t n, std::size_t p) {
  std::vector<std::uint32_t> ones(p, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < p; ++k) ones[k] += z[i * p + k];
  std::size_t best = 0;
  std::uint64_t best_cost = UINT64_MAX;
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t cost = 0;
    for (std::size_t k = 0; k < p; ++k) cost += z[i * p + k] ? n - ones[k] : ones[k];
    if (cost < best_cost) {
      best_cost = cost;
      best = i;
    }
  }
  return best;
}

std::vector<std::uint8_t> discretize_rows(const std::vector<std::uint8_t>& z, std::size_t n, std::size_t p,
                                          const TreeParams& params) {
  std::vector<double> mean(p, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < p; ++k) mean[k] += z[i * p + k];
  for (auto& m : mean) m /= static_cast<double>(n);

  std::vector<double> v(p);
  double norm = 0;
  for (std::size_t k = 0; k < p; ++k) norm += v[k] = std::sqrt(mean[k] * (1.0 - mean[k]));
  std::vector<std::uint8_t> labels(n, 0);
  if (norm <= 0) return labels;

  const std::size_t m = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, params.pca_samples)));
  std::vector<std::size_t> sub(m);
  for (std::size_t j = 0; j < m; ++j) sub[j] = j * n / m;
  std::vector<double> u(m), nv(p);
  for (int it = 0; it < params.power_iterations; ++it) {
    for (std::size_t j = 0; j < m; ++j) {
      const std::uint8_t* row = z.data() + sub[j] * p;
      double s = 0;
      for (std::size_t k = 0; k < p; ++k) s += (row[k] - mean[k]) * v[k];
      u[j] = s;
    }
    std::fill(nv.begin(), nv.end(), 0.0);
    for (std::size_t j = 0; j < m; ++j) {
      const std::uint8_t* row = z.data() + sub[j] * p;
      for (std::size_t k = 0; k < p; ++k) nv[k] += u[j] * (row[k] - mean[k]);
    }
    double nn = 0;
    for (double x : nv) nn += x * x;
    nn = std::sqrt(nn);
    if (nn <= 1e-300) break;
    for (std::size_t k = 0; k < p; ++k) v[k] = nv[k] / nn;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint8_t* row = z.data() + i * p;
    double s = 0;
    for (std::size_t k = 0; k < p; ++k) s += (row[k] - mean[k]) * v[k];
    labels[i] = s > 0;
  }
  return labels;
}

double entropy(double c0, double c1) noexcept {
  const double n = c0 + c1;
  double h = 0;
  for (double c : {c0, c1})
    if (c > 0) h -= c / n * std::log2(c / n);
  return h;
}

std::vector<std::uint32_t> choose_features(std::uint32_t total, int count, Rng& rng) {
  std::vector<std::uint32_t> out;
  if (static_cast<std::uint32_t>(count) >= total) {
    out.resize(total);
    std::iota(out.begin(), out.end(), 0u);
    return out;
  }
  std::unordered_set<std::uint32_t> seen;
  while (out.size() < static_cast<std::size_t>(count)) {
    const auto f = static_cast<std::uint32_t>(rng.below(total));
    if (seen.insert(f).second) out.push_back(f);
  }
  return out;
}

struct Split {
  std::uint32_t feature = 0;
  float threshold = 0;
  double gain = 0;
};

std::optional<Split> best_split(const FeatureSource& src, std::span<const std::uint32_t> idx,
                                const std::vector<std::uint8_t>& labels, const TreeParams& params, Rng& rng) {
  const std::size_t n = idx.size();
  const int bins = std::max(2, params.histogram_bins);
  double c1 = 0;
  for (auto l : labels) c1 += l;
  const double parent = entropy(static_cast<double>(n) - c1, c1);

  std::vector<float> vals(n);
  std::vector<std::array<std::uint32_t, 2>> hist(static_cast<std::size_t>(bins));
  std::optional<Split> best;
  for (std::uint32_t f : choose_features(src.num_features(), params.features_per_node, rng)) {
    src.values(f, idx, vals);
    const auto [lo_it, hi_it] = std::minmax_element(vals.begin(), vals.end());
    const float lo = *lo_it, hi = *hi_it;
    if (!(hi > lo)) continue;
    std::fill(hist.begin(), hist.end(), std::array<std::uint32_t, 2>{0, 0});
    const double scale = bins / (static_cast<double>(hi) - lo);
    for (std::size_t i = 0; i < n; ++i) {
      const int b = std::min(bins - 1, static_cast<int>((static_cast<double>(vals[i]) - lo) * scale));
      ++hist[static_cast<std::size_t>(b)][labels[i]];
    }
    double l0 = 0, l1 = 0;
    for (int b = 0; b + 1 < bins; ++b) {
      l0 += hist[b][0];
      l1 += hist[b][1];
      const double nl = l0 + l1, nr = static_cast<double>(n) - nl;
      if (nl < params.min_leaf || nr < params.min_leaf) continue;
      const double gain =
          parent - (nl * entropy(l0, l1) + nr * entropy(static_cast<double>(n) - c1 - l0, c1 - l1)) / n;
      if (gain > 1e-12 && (!best || gain > best->gain)) {
        const float t = static_cast<float>(lo + (b + 1) / scale);
        if (t > lo && t <= hi) best = Split{f, t, gain};
      }
    }
  }
  return best;
}

struct DepthStats {
  int max_depth = 0;
  double mean_leaf_depth = 0;
};
DepthStats depth_stats(const EdgeTree& t) {
  DepthStats s;
  if (t.nodes.empty()) return s;
  std::vector<std::pair<std::int32_t, int>> stack{{0, 0}};
  double sum = 0;
  std::size_t leaves = 0;
  while (!stack.empty()) {
    const auto [node, d] = stack.back();
    stack.pop_back();
    const TreeNode& nd = t.nodes[static_cast<std::size_t>(node)];
    if (nd.feature < 0) {
      s.max_depth = std::max(s.max_depth, d);
      sum += d;
      ++leaves;
    } else {
      stack.push_back({nd.left, d + 1});
      stack.push_back({nd.left + 1, d + 1});
    }
  }
  s.mean_leaf_depth = leaves ? sum / static_cast<double>(leaves) : 0.0;
  return s;
}

StructLeaf make_leaf(const SegPatch& seg, std::size_t count) {
  StructLeaf leaf;
  leaf.medoid_segmentation = seg;
  leaf.boundary_patch = patch_boundaries(seg);
  leaf.sample_count = static_cast<std::uint32_t>(count);
  return leaf;
}

// Little-endian byte writer/reader.
class Writer {
 public:
  template <typename T>
  void put(T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    std::array<char, sizeof(T)> b;
    std::memcpy(b.data(), &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(b.begin(), b.end());
    bytes.append(b.data(), b.size());
  }
  void raw(const void* p, std::size_t n) { bytes.append(static_cast<const char*>(p), n); }
  std::string bytes;
};

class Reader {
 public:
  explicit Reader(std::string bytes) : bytes_(std::move(bytes)) {}
  template <typename T>
  T get() {
    std::array<char, sizeof(T)> b;
    raw(b.data(), sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(b.begin(), b.end());
    T v;
    std::memcpy(&v, b.data(), sizeof(T));
    return v;
  }
  void raw(void* p, std::size_t n) {
    if (pos_ + n > bytes_.size()) throw FormatError("truncated model file", pos_);
    std::memcpy(p, bytes_.data() + pos_, n);
    pos_ += n;
  }
  std::size_t pos() const noexcept { return pos_; }
  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

 private:
  std::string bytes_;
  std::size_t pos_ = 0;
};

void check_compatible(const EdgeForest& f) {
  if (f.feature_dim != kFeatureDim || f.num_channels != kNumChannels || f.patch_in != kPatchIn ||
      f.patch_out != kPatchOut || f.shrink != kShrink) {
    std::ostringstream os;
    os << "model header (feature_dim=" << f.feature_dim << ", channels=" << f.num_channels
       << ", patch_in=" << f.patch_in << ", patch_out=" << f.patch_out << ", shrink=" << f.shrink
       << ") does not match this build (feature_dim=" << kFeatureDim << ", channels=" << kNumChannels << ")";
    throw VersionError(os.str());
  }
}

}  // namespace

SegPatch canonical_patch(const SegPatch& seg) {
  std::array<int, 256> map;
  map.fill(-1);
  int next = 0;
  SegPatch out{};
  for (int i = 0; i < kPatchPixels; ++i) {
    int& m = map[seg[i]];
    if (m < 0) m = next++;
    out[i] = static_cast<std::uint8_t>(m);
  }
  return out;
}

EdgePatch patch_boundaries(const SegPatch& seg) {
  EdgePatch e{};
  for (int y = 0; y < kPatchOut; ++y)
    for (int x = 0; x < kPatchOut; ++x) {
      const int i = y * kPatchOut + x;
      e[i] = (x + 1 < kPatchOut && seg[i + 1] != seg[i]) || (y + 1 < kPatchOut && seg[i + kPatchOut] != seg[i]);
    }
  return e;
}

int EdgeTree::max_depth() const { return depth_stats(*this).max_depth; }
double EdgeTree::mean_leaf_depth() const { return depth_stats(*this).mean_leaf_depth; }

DenseFeatures::DenseFeatures(std::size_t samples, std::uint32_t features, std::vector<float> data)
    : samples_(samples), features_(features), data_(std::move(data)) {
  if (data_.size() != samples * features) throw ParameterError("DenseFeatures: data size != samples * features");
}

void DenseFeatures::values(std::uint32_t feature, std::span<const std::uint32_t> samples, std::span<float> out) const {
  for (std::size_t i = 0; i < samples.size(); ++i) out[i] = data_[samples[i] * std::size_t{features_} + feature];
}

ChannelFeatures::ChannelFeatures(std::span<const FeatureChannels> images, std::vector<PatchLocation> locations)
    : images_(images), locations_(std::move(locations)) {
  for (const auto& l : locations_) {
    if (l.image >= images_.size()) throw ParameterError("ChannelFeatures: image index out of range");
    const auto& ch = images_[l.image];
    if (l.cx < 0 || l.cy < 0 || l.cx >= ch.image_width || l.cy >= ch.image_height)
      throw ParameterError("ChannelFeatures: patch centre outside image");
  }
}

void ChannelFeatures::values(std::uint32_t feature, std::span<const std::uint32_t> samples,
                             std::span<float> out) const {
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const PatchLocation& l = locations_[samples[i]];
    out[i] = channel_feature(images_[l.image], feature, l.cx, l.cy);
  }
}

std::vector<PixelPair> sample_pixel_pairs(int count, std::uint64_t seed) {
  Rng rng(mix(seed, 0x5041495253ull));
  std::vector<PixelPair> pairs(static_cast<std::size_t>(std::max(0, count)));
  for (auto& p : pairs) {
    p.a = static_cast<std::uint8_t>(rng.below(kPatchPixels));
    do p.b = static_cast<std::uint8_t>(rng.below(kPatchPixels));
    while (p.b == p.a);
  }
  return pairs;
}

std::size_t medoid_index(std::span<const SegPatch> targets, std::span<const PixelPair> pairs) {
  if (targets.empty()) throw ParameterError("medoid_index: no targets");
  std::vector<std::uint32_t> idx(targets.size());
  std::iota(idx.begin(), idx.end(), 0u);
  return medoid_of(indicators(targets, idx, pairs), targets.size(), pairs.size());
}

std::vector<std::uint8_t> discretize(std::span<const SegPatch> targets, std::span<const PixelPair> pairs,
                                     const TreeParams& params) {
  std::vector<std::uint32_t> idx(targets.size());
  std::iota(idx.begin(), idx.end(), 0u);
  return discretize_rows(indicators(targets, idx, pairs), targets.size(), pairs.size(), params);
}

EdgeTree train_tree(const FeatureSource& features, std::span<const SegPatch> targets, const TreeParams& params,
                    std::uint64_t seed) {
  if (targets.empty()) throw ParameterError("train_tree: no training samples");
  if (targets.size() != features.num_samples()) throw ParameterError("train_tree: feature/target count mismatch");
  if (params.min_leaf < 1 || params.pixel_pairs < 1) throw ParameterError("train_tree: invalid parameters");

  EdgeTree tree;
  tree.nodes.emplace_back();
  struct Work {
    std::int32_t node;
    int depth;
    std::vector<std::uint32_t> idx;
  };
  std::vector<Work> stack;
  {
    std::vector<std::uint32_t> all(targets.size());
    std::iota(all.begin(), all.end(), 0u);
    stack.push_back({0, 0, std::move(all)});
  }
  const auto pp = static_cast<std::size_t>(params.pixel_pairs);
  while (!stack.empty()) {
    Work w = std::move(stack.back());
    stack.pop_back();
    const std::uint64_t node_seed = mix(seed, static_cast<std::uint64_t>(w.node));
    const auto pairs = sample_pixel_pairs(params.pixel_pairs, node_seed);
    const auto z = indicators(targets, w.idx, pairs);
    const std::size_t n = w.idx.size();

    auto make_leaf_here = [&] {
      const std::size_t m = medoid_of(z, n, pp);
      tree.nodes[static_cast<std::size_t>(w.node)].leaf = static_cast<std::int32_t>(tree.leaves.size());
      tree.leaves.push_back(make_leaf(targets[w.idx[m]], n));
    };

    const bool identical = std::all_of(w.idx.begin(), w.idx.end(),
                                       [&](std::uint32_t i) { return targets[i] == targets[w.idx.front()]; });
    if (identical || w.depth >= params.max_depth || n < 2 * static_cast<std::size_t>(params.min_leaf)) {
      make_leaf_here();
      continue;
    }
    const auto labels = discretize_rows(z, n, pp, params);
    if (std::all_of(labels.begin(), labels.end(), [&](auto l) { return l == labels.front(); })) {
      make_leaf_here();
      continue;
    }
    Rng rng(mix(node_seed, 0x46454154ull));
    const auto split = best_split(features, w.idx, labels, params, rng);
    if (!split) {
      make_leaf_here();
      continue;
    }
    std::vector<float> vals(n);
    features.values(split->feature, w.idx, vals);
    std::vector<std::uint32_t> left, right;
    for (std::size_t i = 0; i < n; ++i) (vals[i] < split->threshold ? left : right).push_back(w.idx[i]);
    if (left.empty() || right.empty()) {
      make_leaf_here();
      continue;
    }
    const auto child = static_cast<std::int32_t>(tree.nodes.size());
    TreeNode& nd = tree.nodes[static_cast<std::size_t>(w.node)];
    nd.feature = static_cast<std::int32_t>(split->feature);
    nd.threshold = split->threshold;
    nd.left = child;
    tree.nodes.emplace_back();
    tree.nodes.emplace_back();
    stack.push_back({child + 1, w.depth + 1, std::move(right)});
    stack.push_back({child, w.depth + 1, std::move(left)});
  }
  return tree;
}

SegPatch segmentation_target(const TriStateMask& annot, int cx, int cy) {
  constexpr int n = kPatchOut;
  std::array<bool, kPatchPixels> wall{};
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      // Replicate the border, as the channels do.
      const int x = std::clamp(cx - kHalf + i, 0, annot.width() - 1);
      const int y = std::clamp(cy - kHalf + j, 0, annot.height() - 1);
      wall[j * n + i] = annot(x, y) == Tri::Positive;
    }
  std::array<int, kPatchPixels> label;
  label.fill(-1);
  int next = 0;
  std::vector<int> queue;
  for (int s = 0; s < kPatchPixels; ++s) {
    if (wall[s] || label[s] >= 0) continue;
    label[s] = next;
    queue.assign(1, s);
    while (!queue.empty()) {
      const int p = queue.back();
      queue.pop_back();
      const int px = p % n, py = p / n;
      for (auto [dx, dy] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
        const int qx = px + dx, qy = py + dy;
        if (qx < 0 || qy < 0 || qx >= n || qy >= n) continue;
        const int q = qy * n + qx;
        if (!wall[q] && label[q] < 0) {
          label[q] = next;
          queue.push_back(q);
        }
      }
    }
    ++next;
  }
  // Grow labels into walls one ring at a time.
  bool pending = next > 0;
  while (pending) {
    pending = false;
    auto snapshot = label;
    for (int p = 0; p < kPatchPixels; ++p) {
      if (label[p] >= 0) continue;
      const int px = p % n, py = p / n;
      int best = -1;
      for (auto [dx, dy] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
        const int qx = px + dx, qy = py + dy;
        if (qx < 0 || qy < 0 || qx >= n || qy >= n) continue;
        const int l = label[qy * n + qx];
        if (l >= 0 && (best < 0 || l < best)) best = l;
      }
      if (best >= 0)
        snapshot[p] = best;
      else
        pending = true;
    }
    label = snapshot;
  }
  SegPatch seg{};
  for (int p = 0; p < kPatchPixels; ++p) seg[p] = static_cast<std::uint8_t>(std::max(0, label[p]));
  return canonical_patch(seg);
}

std::vector<PatchSample> sample_training_patches(const TriStateMask& annot, const SamplingParams& params,
                                                 std::uint64_t seed, SamplingReport* report,
                                                 std::uint32_t image_index) {
  const int w = annot.width(), h = annot.height();
  BinaryMap pos(w, h, 0);
  for (std::size_t i = 0; i < annot.size(); ++i) pos[i] = annot[i] == Tri::Positive;
  const BinaryMap near = dilate(pos, std::max(0, params.negative_margin - 1));

  // Summed-area table of Ignore pixels.
  std::vector<std::int64_t> sat(static_cast<std::size_t>(w + 1) * (h + 1), 0);
  auto at = [&](int x, int y) -> std::int64_t& { return sat[static_cast<std::size_t>(y) * (w + 1) + x]; };
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      at(x + 1, y + 1) = at(x, y + 1) + at(x + 1, y) - at(x, y) + (annot(x, y) == Tri::Ignore);
  auto core_clean = [&](int cx, int cy) {
    const int x0 = std::max(0, cx - kHalf), y0 = std::max(0, cy - kHalf);
    const int x1 = std::min(w, cx + kHalf), y1 = std::min(h, cy + kHalf);
    return at(x1, y1) - at(x0, y1) - at(x1, y0) + at(x0, y0) == 0;
  };

  std::vector<PatchLocation> pos_c, neg_c;
  for (int cy = 0; cy < h; cy += 2)
    for (int cx = 0; cx < w; cx += 2) {
      bool has_pos = false;
      for (int dy = 0; dy < 2 && cy + dy < h; ++dy)
        for (int dx = 0; dx < 2 && cx + dx < w; ++dx) has_pos |= pos(cx + dx, cy + dy) != 0;
      if (has_pos) {
        if (core_clean(cx, cy)) pos_c.push_back({image_index, cx, cy});
      } else if (annot(cx, cy) == Tri::Negative && !near(cx, cy) && core_clean(cx, cy)) {
        neg_c.push_back({image_index, cx, cy});
      }
    }

  Rng rng(mix(seed, image_index));
  auto draw = [&](std::vector<PatchLocation>& c, int want) {
    const std::size_t k = std::min(c.size(), static_cast<std::size_t>(std::max(0, want)));
    for (std::size_t i = 0; i < k; ++i) std::swap(c[i], c[i + rng.below(c.size() - i)]);
    c.resize(k);
  };
  draw(pos_c, params.n_pos);
  draw(neg_c, params.n_neg);

  if (report) {
    report->positives += pos_c.size();
    report->negatives += neg_c.size();
    report->positive_shortfall += static_cast<std::size_t>(std::max(0, params.n_pos)) - pos_c.size();
    report->negative_shortfall += static_cast<std::size_t>(std::max(0, params.n_neg)) - neg_c.size();
  }
  std::vector<PatchSample> out;
  out.reserve(pos_c.size() + neg_c.size());
  for (const auto* list : {&pos_c, &neg_c})
    for (const auto& l : *list) out.push_back({l, segmentation_target(annot, l.cx, l.cy)});
  return out;
}

EdgeForest train_forest(std::span<const TreeSamples> per_tree, const ForestParams& params, int jobs) {
  EdgeForest forest;
  forest.seed = params.seed;
  forest.trees.resize(per_tree.size());
  parallel_for(per_tree.size(), jobs, [&](std::size_t t) {
    if (!per_tree[t].features) throw ParameterError("train_forest: missing feature source");
    forest.trees[t] = train_tree(*per_tree[t].features, per_tree[t].targets, params.tree, mix(params.seed, t));
  });
  if (!per_tree.empty()) forest.feature_dim = per_tree.front().features->num_features();
  return forest;
}

EdgeForest train_forest(std::span<const FeatureChannels> channels, std::span<const TriStateMask> annotations,
                        const ForestParams& params, int jobs, SamplingReport* report) {
  if (channels.size() != annotations.size()) throw ParameterError("train_forest: channels/annotations count mismatch");
  if (params.n_trees < 1) throw ParameterError("train_forest: n_trees must be >= 1");
  for (std::size_t i = 0; i < channels.size(); ++i)
    if (channels[i].image_width != annotations[i].width() || channels[i].image_height != annotations[i].height())
      throw ParameterError("train_forest: annotation size differs from image");

  EdgeForest forest;
  forest.seed = params.seed;
  forest.trees.resize(static_cast<std::size_t>(params.n_trees));
  std::vector<SamplingReport> reports(forest.trees.size());
  parallel_for(forest.trees.size(), jobs, [&](std::size_t t) {
    const std::uint64_t tree_seed = params.seed + t;
    std::vector<PatchLocation> locs;
    std::vector<SegPatch> targets;
    for (std::size_t i = 0; i < annotations.size(); ++i)
      for (auto& s : sample_training_patches(annotations[i], params.sampling, tree_seed, &reports[t],
                                             static_cast<std::uint32_t>(i))) {
        locs.push_back(s.location);
        targets.push_back(s.target);
      }
    if (targets.empty()) throw ParameterError("train_forest: no eligible training patches");
    const ChannelFeatures src(channels, std::move(locs));
    forest.trees[t] = train_tree(src, targets, params.tree, mix(tree_seed, 0x54524545ull));
  });
  if (report) *report = reports.front();
  return forest;
}

ProbMap predict(const EdgeForest& forest, const FeatureChannels& ch, int stride, int jobs) {
  check_compatible(forest);
  if (stride < 1) throw ParameterError("predict: stride must be >= 1");
  if (forest.trees.empty()) throw ParameterError("predict: forest has no trees");
  const int w = ch.image_width, h = ch.image_height;
  const int nx = (w + stride - 1) / stride, ny = (h + stride - 1) / stride;
  const std::size_t nt = forest.trees.size();
  std::vector<const StructLeaf*> hit(static_cast<std::size_t>(nx) * ny * nt);

  parallel_for(static_cast<std::size_t>(ny), jobs, [&](std::size_t row) {
    const int cy = static_cast<int>(row) * stride;
    for (int xi = 0; xi < nx; ++xi) {
      const int cx = xi * stride;
      for (std::size_t t = 0; t < nt; ++t) {
        const EdgeTree& tree = forest.trees[t];
        std::size_t node = 0;
        while (tree.nodes[node].feature >= 0) {
          const TreeNode& nd = tree.nodes[node];
          const float v = channel_feature(ch, static_cast<std::uint32_t>(nd.feature), cx, cy);
          node = static_cast<std::size_t>(nd.left + (v < nd.threshold ? 0 : 1));
        }
        hit[(row * nx + xi) * nt + t] = &tree.leaves[static_cast<std::size_t>(tree.nodes[node].leaf)];
      }
    }
  });

  // Integer accumulation keeps the result independent of evaluation order.
  const int aw = w + kPatchOut, ah = h + kPatchOut;
  std::vector<std::uint32_t> acc(static_cast<std::size_t>(aw) * ah, 0), cov(acc.size(), 0);
  for (int yi = 0; yi < ny; ++yi)
    for (int xi = 0; xi < nx; ++xi) {
      const int ox = xi * stride, oy = yi * stride;  // top-left in accumulator coordinates
      for (int j = 0; j < kPatchOut; ++j) {
        std::uint32_t* c = cov.data() + static_cast<std::size_t>(oy + j) * aw + ox;
        for (int i = 0; i < kPatchOut; ++i) c[i] += static_cast<std::uint32_t>(nt);
      }
      for (std::size_t t = 0; t < nt; ++t) {
        const EdgePatch& e = hit[(static_cast<std::size_t>(yi) * nx + xi) * nt + t]->boundary_patch;
        for (int j = 0; j < kPatchOut; ++j) {
          std::uint32_t* a = acc.data() + static_cast<std::size_t>(oy + j) * aw + ox;
          const std::uint8_t* src = e.data() + j * kPatchOut;
          for (int i = 0; i < kPatchOut; ++i) a[i] += src[i];
        }
      }
    }
  ProbMap out(w, h, 0.f);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const std::size_t k = static_cast<std::size_t>(y + kHalf) * aw + (x + kHalf);
      out(x, y) = cov[k] ? static_cast<float>(static_cast<double>(acc[k]) / cov[k]) : 0.f;
    }
  return out;
}

ProbMap predict(const EdgeForest& forest, const RgbImage& image, int stride, int jobs) {
  check_compatible(forest);
  return predict(forest, compute_channels(image), stride, jobs);
}

std::string serialize_forest(const EdgeForest& forest) {
  Writer w;
  w.raw(kMagic, sizeof kMagic);
  int max_depth = 0;
  double depth_sum = 0;
  std::size_t leaf_count = 0;
  for (const auto& t : forest.trees) {
    const auto s = depth_stats(t);
    max_depth = std::max(max_depth, s.max_depth);
    depth_sum += s.mean_leaf_depth * static_cast<double>(t.leaves.size());
    leaf_count += t.leaves.size();
  }
  w.put<std::uint32_t>(static_cast<std::uint32_t>(forest.trees.size()));
  w.put<std::uint32_t>(forest.feature_dim);
  w.put<std::uint32_t>(forest.num_channels);
  w.put<std::uint32_t>(forest.patch_in);
  w.put<std::uint32_t>(forest.patch_out);
  w.put<std::uint32_t>(forest.shrink);
  w.put<std::uint64_t>(forest.seed);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(max_depth));
  w.put<double>(leaf_count ? depth_sum / static_cast<double>(leaf_count) : 0.0);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(forest.recipe_hash.size()));
  w.raw(forest.recipe_hash.data(), forest.recipe_hash.size());
  for (const auto& t : forest.trees) {
    w.put<std::uint32_t>(static_cast<std::uint32_t>(t.nodes.size()));
    for (const auto& n : t.nodes) {
      w.put<std::int32_t>(n.feature);
      w.put<float>(n.threshold);
      w.put<std::int32_t>(n.left);
      w.put<std::int32_t>(n.leaf);
    }
    w.put<std::uint32_t>(static_cast<std::uint32_t>(t.leaves.size()));
    for (const auto& l : t.leaves) {
      w.put<std::uint32_t>(l.sample_count);
      w.raw(l.medoid_segmentation.data(), kPatchPixels);
    }
  }
  return std::move(w.bytes);
}

void write_forest(std::ostream& out, const EdgeForest& forest) {
  const auto bytes = serialize_forest(forest);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

EdgeForest read_forest(std::istream& in) {
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  Reader r(std::move(bytes));
  char magic[8];
  if (r.remaining() < sizeof magic) throw FormatError("not a model file", 0);
  r.raw(magic, sizeof magic);
  if (std::memcmp(magic, kMagic, 4) != 0) throw FormatError("not a model file", 0);
  if (std::memcmp(magic, kMagic, sizeof magic) != 0)
    throw VersionError("unsupported model version '" + std::string(magic, sizeof magic) + "', expected SEDF0001");

  EdgeForest f;
  const auto n_trees = r.get<std::uint32_t>();
  f.feature_dim = r.get<std::uint32_t>();
  f.num_channels = r.get<std::uint32_t>();
  f.patch_in = r.get<std::uint32_t>();
  f.patch_out = r.get<std::uint32_t>();
  f.shrink = r.get<std::uint32_t>();
  f.seed = r.get<std::uint64_t>();
  (void)r.get<std::uint32_t>();  // depth stats are recomputed from the trees
  (void)r.get<double>();
  const auto hash_len = r.get<std::uint32_t>();
  if (hash_len > r.remaining()) throw FormatError("recipe hash length exceeds file", r.pos());
  f.recipe_hash.resize(hash_len);
  r.raw(f.recipe_hash.data(), hash_len);
  if (f.patch_out != kPatchOut) throw VersionError("model patch size " + std::to_string(f.patch_out) + " unsupported");

  for (std::uint32_t t = 0; t < n_trees; ++t) {
    EdgeTree tree;
    const std::size_t at = r.pos();
    const auto n_nodes = r.get<std::uint32_t>();
    if (n_nodes == 0 || std::size_t{n_nodes} * 16 > r.remaining()) throw FormatError("bad node count", at);
    tree.nodes.resize(n_nodes);
    for (auto& n : tree.nodes) {
      n.feature = r.get<std::int32_t>();
      n.threshold = r.get<float>();
      n.left = r.get<std::int32_t>();
      n.leaf = r.get<std::int32_t>();
    }
    const std::size_t lat = r.pos();
    const auto n_leaves = r.get<std::uint32_t>();
    if (std::size_t{n_leaves} * (4 + kPatchPixels) > r.remaining()) throw FormatError("bad leaf count", lat);
    tree.leaves.resize(n_leaves);
    for (auto& l : tree.leaves) {
      l.sample_count = r.get<std::uint32_t>();
      r.raw(l.medoid_segmentation.data(), kPatchPixels);
      l.boundary_patch = patch_boundaries(l.medoid_segmentation);
    }
    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
      const auto& n = tree.nodes[i];
      const bool ok = n.feature < 0
                          ? (n.leaf >= 0 && static_cast<std::uint32_t>(n.leaf) < n_leaves)
                          : (static_cast<std::uint32_t>(n.feature) < f.feature_dim &&
                             n.left > static_cast<std::int32_t>(i) && n.left + 1 < static_cast<std::int32_t>(n_nodes));
      if (!ok) throw FormatError("invalid node " + std::to_string(i) + " in tree " + std::to_string(t), at);
    }
    f.trees.push_back(std::move(tree));
  }
  if (r.remaining() != 0) throw FormatError("trailing bytes after model", r.pos());
  return f;
}

void save_forest(const std::filesystem::path& path, const EdgeForest& forest) {
  const auto bytes = serialize_forest(forest);
  write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()));
}

EdgeForest load_forest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model file " + path.string());
  return read_forest(in);
}

std::string forest_header_json(const EdgeForest& forest) {
  int max_depth = 0;
  double depth_sum = 0;
  std::size_t nodes = 0, leaves = 0;
  for (const auto& t : forest.trees) {
    const auto s = depth_stats(t);
    max_depth = std::max(max_depth, s.max_depth);
    depth_sum += s.mean_leaf_depth * static_cast<double>(t.leaves.size());
    nodes += t.nodes.size();
    leaves += t.leaves.size();
  }
  nlohmann::ordered_json j;
  j["format"] = std::string(kMagic, sizeof kMagic);
  j["n_trees"] = forest.trees.size();
  j["feature_dim"] = forest.feature_dim;
  j["num_channels"] = forest.num_channels;
  j["patch_in"] = forest.patch_in;
  j["patch_out"] = forest.patch_out;
  j["shrink"] = forest.shrink;
  j["seed"] = forest.seed;
  j["recipe_hash"] = forest.recipe_hash;
  j["max_depth"] = max_depth;
  j["mean_leaf_depth"] = leaves ? depth_sum / static_cast<double>(leaves) : 0.0;
  j["total_nodes"] = nodes;
  j["total_leaves"] = leaves;
  return j.dump(2);
}

}  // namespace weakbound
