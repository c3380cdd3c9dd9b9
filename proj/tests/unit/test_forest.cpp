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
#include <sstream>

#include "weakbound/forest.hpp"
#include "weakbound/rng.hpp"
#include "weakbound/synth.hpp"

using namespace weakbound;

namespace {

SegPatch halves_patch(int split_col) {
  SegPatch s{};
  for (int j = 0; j < kPatchOut; ++j)
    for (int i = 0; i < kPatchOut; ++i) s[j * kPatchOut + i] = i < split_col ? 0 : 1;
  return s;
}

EdgeForest constant_forest(const EdgePatch& patch) {
  EdgeForest f;
  EdgeTree t;
  t.nodes.push_back(TreeNode{-1, 0, -1, 0});
  StructLeaf leaf;
  leaf.boundary_patch = patch;
  t.leaves.push_back(leaf);
  f.trees.push_back(t);
  return f;
}

struct SmallSet {
  std::vector<FeatureChannels> channels;
  std::vector<TriStateMask> annots;
  std::vector<RgbImage> images;
};

SmallSet small_set(int n, int size) {
  SynthParams p;
  p.width = p.height = size;
  SmallSet s;
  for (const auto& smp : synth_dataset(p, static_cast<std::size_t>(n), 4)) {
    s.channels.push_back(compute_channels(smp.image));
    s.annots.push_back(boundary_annotation(smp.instances));
    s.images.push_back(smp.image);
  }
  return s;
}

ForestParams small_params() {
  ForestParams fp;
  fp.n_trees = 2;
  fp.sampling.n_pos = 60;
  fp.sampling.n_neg = 60;
  fp.tree.features_per_node = 64;
  fp.seed = 3;
  return fp;
}

}  // namespace

TEST_CASE("canonical patches and their boundaries") {
  SegPatch s = halves_patch(5);
  for (auto& v : s) v = v ? 0 : 7;
  const SegPatch c = canonical_patch(s);
  CHECK(c[0] == 0);
  CHECK(c[15] == 1);
  const EdgePatch e = patch_boundaries(c);
  for (int j = 0; j < kPatchOut; ++j)
    for (int i = 0; i < kPatchOut; ++i) CHECK(e[j * kPatchOut + i] == (i == 4 ? 1 : 0));
}

TEST_CASE("medoid of A, A, B is A") {
  const std::vector<SegPatch> t{halves_patch(3), halves_patch(3), halves_patch(11)};
  const auto pairs = sample_pixel_pairs(256, 1);
  CHECK(medoid_index(t, pairs) == 0);
  const std::vector<SegPatch> u{halves_patch(11), halves_patch(3), halves_patch(3)};
  CHECK(medoid_index(u, pairs) == 1);
}

TEST_CASE("discretize separates two families") {
  std::vector<SegPatch> t;
  for (int i = 0; i < 10; ++i) t.push_back(halves_patch(i % 2 ? 4 : 12));
  const auto lab = discretize(t, sample_pixel_pairs(256, 2), TreeParams{});
  for (int i = 0; i < 10; ++i) CHECK(lab[i] == lab[i % 2]);
  CHECK(lab[0] != lab[1]);
}

TEST_CASE("identical targets give a depth-0 tree") {
  Rng rng(1);
  std::vector<float> data(50 * 6);
  for (auto& v : data) v = static_cast<float>(rng.uniform());
  const DenseFeatures f(50, 6, data);
  const std::vector<SegPatch> t(50, halves_patch(7));
  const EdgeTree tree = train_tree(f, t, TreeParams{}, 5);
  REQUIRE(tree.nodes.size() == 1);
  CHECK(tree.nodes[0].feature == -1);
  CHECK(tree.leaves.at(0).medoid_segmentation == canonical_patch(halves_patch(7)));
  CHECK(tree.max_depth() == 0);
}

TEST_CASE("root splits on the separating feature with pure children") {
  Rng rng(8);
  const std::size_t n = 40;
  const std::uint32_t d = 5;
  std::vector<float> data(n * d);
  std::vector<SegPatch> t;
  for (std::size_t i = 0; i < n; ++i) {
    const bool a = i % 2 == 0;
    for (std::uint32_t k = 0; k < d; ++k) data[i * d + k] = static_cast<float>(rng.uniform());
    data[i * d + 3] = a ? static_cast<float>(rng.uniform(0, 0.4)) : static_cast<float>(rng.uniform(0.6, 1));
    t.push_back(halves_patch(a ? 4 : 12));
  }
  TreeParams p;
  p.features_per_node = static_cast<int>(d);
  p.min_leaf = 4;
  const EdgeTree tree = train_tree(DenseFeatures(n, d, data), t, p, 1);
  REQUIRE(tree.nodes.size() == 3);
  CHECK(tree.nodes[0].feature == 3);
  CHECK(tree.nodes[1].feature == -1);
  CHECK(tree.nodes[2].feature == -1);
  CHECK(tree.leaves[tree.nodes[1].leaf].medoid_segmentation != tree.leaves[tree.nodes[2].leaf].medoid_segmentation);
}

TEST_CASE("sampling on degenerate masks") {
  SamplingParams sp;
  sp.n_pos = 10;
  sp.n_neg = 15;
  SamplingReport r;
  const auto neg = sample_training_patches(TriStateMask(40, 40, Tri::Negative), sp, 1, &r);
  CHECK(neg.size() == 15);
  CHECK(r.positives == 0);
  CHECK(r.positive_shortfall == 10);
  CHECK(sample_training_patches(TriStateMask(40, 40, Tri::Ignore), sp, 1).empty());
}

TEST_CASE("straight line targets give straight boundary patches") {
  TriStateMask m(48, 48, Tri::Negative);
  for (int y = 0; y < 48; ++y) m(20, y) = Tri::Positive;
  SamplingParams sp;
  sp.n_pos = 100;
  sp.n_neg = 0;
  const auto samples = sample_training_patches(m, sp, 2);
  REQUIRE(!samples.empty());
  for (const auto& s : samples) {
    const int col = 20 - s.location.cx + kPatchOut / 2;
    const EdgePatch e = patch_boundaries(s.target);
    for (int j = 0; j < kPatchOut; ++j)
      for (int i = 0; i < kPatchOut; ++i) CHECK(e[j * kPatchOut + i] == (i == col ? 1 : 0));
  }
}

TEST_CASE("negatives keep their distance from positives") {
  TriStateMask m(64, 64, Tri::Negative);
  for (int y = 0; y < 64; ++y) m(30, y) = Tri::Positive;
  SamplingParams sp;
  sp.n_pos = 0;
  sp.n_neg = 1000;
  for (const auto& s : sample_training_patches(m, sp, 3)) CHECK(std::abs(s.location.cx - 30) >= sp.negative_margin);
}

TEST_CASE("constant leaf forests") {
  const FeatureChannels ch = compute_channels(RgbImage(30, 20, Rgb{10, 20, 30}));
  const ProbMap zero = predict(constant_forest(EdgePatch{}), ch, 2);
  CHECK(count_equal(zero, 0.f) == zero.size());
  EdgePatch ones;
  ones.fill(1);
  for (int stride : {1, 2, 3}) {
    const ProbMap one = predict(constant_forest(ones), ch, stride);
    CHECK(count_equal(one, 1.f) == one.size());
  }
}

TEST_CASE("feature layout mismatch is a version error") {
  EdgeForest f = constant_forest(EdgePatch{});
  f.feature_dim += 1;
  CHECK_THROWS_AS(predict(f, compute_channels(RgbImage(8, 8)), 2), VersionError);
}

TEST_CASE("training is deterministic and serialization round trips") {
  const SmallSet s = small_set(3, 64);
  const EdgeForest a = train_forest(s.channels, s.annots, small_params(), 1);
  const EdgeForest b = train_forest(s.channels, s.annots, small_params(), 2);
  CHECK(serialize_forest(a) == serialize_forest(b));

  std::stringstream io;
  write_forest(io, a);
  const EdgeForest back = read_forest(io);
  CHECK(serialize_forest(back) == serialize_forest(a));
  CHECK(predict(back, s.channels[0], 2) == predict(a, s.channels[0], 2));

  std::string bytes = serialize_forest(a);
  std::istringstream trunc(bytes.substr(0, bytes.size() - 10));
  CHECK_THROWS_AS(read_forest(trunc), FormatError);
  std::string future = bytes;
  future[7] = '9';
  std::istringstream fut(future);
  CHECK_THROWS_AS(read_forest(fut), VersionError);
  std::istringstream junk("hello world, not a model");
  CHECK_THROWS_AS(read_forest(junk), FormatError);
}

TEST_CASE("trained forest responds on boundaries and strides agree") {
  const SmallSet s = small_set(4, 64);
  const EdgeForest f = train_forest(s.channels, s.annots, small_params(), 1);
  const ProbMap p1 = predict(f, s.channels[3], 1), p2 = predict(f, s.channels[3], 2);
  double mad = 0;
  for (std::size_t i = 0; i < p1.size(); ++i) mad += std::abs(p1[i] - p2[i]);
  mad /= static_cast<double>(p1.size());
  CHECK(mad < 0.05);

  // boundary pixels score higher on average than far-away pixels
  const TriStateMask& a = s.annots[3];
  double on = 0, off = 0;
  std::size_t n_on = 0, n_off = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == Tri::Positive) {
      on += p2[i];
      ++n_on;
    } else {
      off += p2[i];
      ++n_off;
    }
  }
  CHECK(on / n_on > 2 * off / n_off);
}

TEST_CASE("channels are deterministic and flat images have no gradient") {
  RgbImage img(24, 24, Rgb{100, 50, 25});
  const auto flat = raw_channels(img);
  for (int c = kColorChannels; c < kNumChannels; ++c)
    for (float v : flat[c].pixels()) CHECK(v == 0.f);
  for (int y = 0; y < 24; ++y)
    for (int x = 12; x < 24; ++x) img(x, y) = Rgb{250, 250, 250};
  const auto a = compute_channels(img), b = compute_channels(img);
  for (int c = 0; c < kNumChannels; ++c) CHECK(a.regular[c] == b.regular[c]);
  const auto raw = raw_channels(img);
  const Plane& mag = raw[kColorChannels];
  int best = 0;
  for (int x = 1; x < 24; ++x)
    if (mag(x, 12) > mag(best, 12)) best = x;
  CHECK((best == 11 || best == 12));
  // vertical edge: gradient points along x, orientation bin 0
  CHECK(raw[kColorChannels + 1](best, 12) > 0.f);
  CHECK(raw[kColorChannels + 3](best, 12) == 0.f);
}

TEST_CASE("duplicating every sample keeps the medoid") {
  Rng rng(3);
  const auto pairs = sample_pixel_pairs(256, 9);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<SegPatch> t;
    for (int i = 0; i < 7; ++i) t.push_back(halves_patch(rng.between(1, 15)));
    std::vector<SegPatch> twice;
    for (const auto& s : t) {
      twice.push_back(s);
      twice.push_back(s);
    }
    CHECK(twice[medoid_index(twice, pairs)] == t[medoid_index(t, pairs)]);
  }
}
