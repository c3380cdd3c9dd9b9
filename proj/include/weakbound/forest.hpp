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

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "weakbound/channels.hpp"
#include "weakbound/raster.hpp"

namespace weakbound {

inline constexpr int kPatchPixels = kPatchOut * kPatchOut;

/// 16x16 local segmentation, row-major, labels canonical (first appearance order).
using SegPatch = std::array<std::uint8_t, kPatchPixels>;
/// 16x16 binary boundary patch.
using EdgePatch = std::array<std::uint8_t, kPatchPixels>;

SegPatch canonical_patch(const SegPatch& seg);
/// 1 where the right or bottom neighbour inside the patch has another label.
EdgePatch patch_boundaries(const SegPatch& seg);

struct StructLeaf {
  SegPatch medoid_segmentation{};
  EdgePatch boundary_patch{};
  std::uint32_t sample_count = 1;
};

struct TreeNode {
  std::int32_t feature = -1;  // -1 marks a leaf
  float threshold = 0;        // value < threshold goes left
  std::int32_t left = -1;     // right child is left + 1
  std::int32_t leaf = -1;     // index into leaves when feature == -1
};

struct EdgeTree {
  std::vector<TreeNode> nodes;
  std::vector<StructLeaf> leaves;

  int max_depth() const;
  double mean_leaf_depth() const;
};

/// Random-access view of per-sample feature values.
class FeatureSource {
 public:
  virtual ~FeatureSource() = default;
  virtual std::uint32_t num_features() const = 0;
  virtual std::size_t num_samples() const = 0;
  /// out[i] = value of `feature` for samples[i].
  virtual void values(std::uint32_t feature, std::span<const std::uint32_t> samples, std::span<float> out) const = 0;
};

/// Row-major samples x features matrix.
class DenseFeatures final : public FeatureSource {
 public:
  DenseFeatures(std::size_t samples, std::uint32_t features, std::vector<float> data);
  std::uint32_t num_features() const override { return features_; }
  std::size_t num_samples() const override { return samples_; }
  void values(std::uint32_t feature, std::span<const std::uint32_t> samples, std::span<float> out) const override;

 private:
  std::size_t samples_;
  std::uint32_t features_;
  std::vector<float> data_;
};

/// Patches centred at image positions, features read lazily from channel stacks.
struct PatchLocation {
  std::uint32_t image = 0;
  std::int32_t cx = 0, cy = 0;
};
class ChannelFeatures final : public FeatureSource {
 public:
  ChannelFeatures(std::span<const FeatureChannels> images, std::vector<PatchLocation> locations);
  std::uint32_t num_features() const override { return kFeatureDim; }
  std::size_t num_samples() const override { return locations_.size(); }
  void values(std::uint32_t feature, std::span<const std::uint32_t> samples, std::span<float> out) const override;

 private:
  std::span<const FeatureChannels> images_;
  std::vector<PatchLocation> locations_;
};

struct TreeParams {
  int max_depth = 64;
  int min_leaf = 8;
  int features_per_node = 256;
  int pixel_pairs = 256;
  int histogram_bins = 64;
  int pca_samples = 1024;  // subsample used to find the principal direction
  int power_iterations = 12;
};

struct SamplingParams {
  int n_pos = 500;
  int n_neg = 500;
  int negative_margin = 8;
};

struct ForestParams {
  int n_trees = 8;
  TreeParams tree;
  SamplingParams sampling;
  std::uint64_t seed = 1;
};

struct PixelPair {
  std::uint8_t a = 0, b = 0;
};
std::vector<PixelPair> sample_pixel_pairs(int count, std::uint64_t seed);

/// Index of the sample minimising the summed Hamming distance between
/// same-segment indicator vectors over `pairs`; ties go to the lowest index.
std::size_t medoid_index(std::span<const SegPatch> targets, std::span<const PixelPair> pairs);

/// Two-class labels from the sign of the centred projection onto the top
/// principal direction of the indicator vectors.
std::vector<std::uint8_t> discretize(std::span<const SegPatch> targets, std::span<const PixelPair> pairs,
                                     const TreeParams& params);

EdgeTree train_tree(const FeatureSource& features, std::span<const SegPatch> targets, const TreeParams& params,
                    std::uint64_t seed);

struct PatchSample {
  PatchLocation location;
  SegPatch target{};
};

struct SamplingReport {
  std::size_t positives = 0;
  std::size_t negatives = 0;
  std::size_t positive_shortfall = 0;  // requested but not available
  std::size_t negative_shortfall = 0;
};

/// Connected components of the 16x16 window centred at (cx, cy), with
/// Positive pixels as walls; walls join their smallest neighbouring label.
SegPatch segmentation_target(const TriStateMask& annot, int cx, int cy);

/// Draws positive patches centred on Positive pixels and negative patches
/// centred on Negative pixels at least `negative_margin` away from every
/// Positive. Patches whose core holds an Ignore pixel are never drawn.
/// Centres are snapped to even coordinates to align with the shrunk channels.
std::vector<PatchSample> sample_training_patches(const TriStateMask& annot, const SamplingParams& params,
                                                 std::uint64_t seed, SamplingReport* report = nullptr,
                                                 std::uint32_t image_index = 0);

struct EdgeForest {
  std::vector<EdgeTree> trees;
  std::uint32_t feature_dim = kFeatureDim;
  std::uint32_t num_channels = kNumChannels;
  std::uint32_t patch_in = kPatchIn;
  std::uint32_t patch_out = kPatchOut;
  std::uint32_t shrink = kShrink;
  std::uint64_t seed = 0;
  std::string recipe_hash;
};

/// Trains n_trees trees on the given images; tree t draws its own samples with seed + t.
EdgeForest train_forest(std::span<const FeatureChannels> channels, std::span<const TriStateMask> annotations,
                        const ForestParams& params, int jobs = 1, SamplingReport* report = nullptr);

/// Trees from prepared sample sets (one per tree).
struct TreeSamples {
  const FeatureSource* features = nullptr;
  std::span<const SegPatch> targets;
};
EdgeForest train_forest(std::span<const TreeSamples> per_tree, const ForestParams& params, int jobs = 1);

/// Mean of the leaf boundary patches covering each pixel. Patches are centred
/// on a grid with the given stride. Throws VersionError if the model's
/// feature layout does not match this build.
ProbMap predict(const EdgeForest& forest, const FeatureChannels& channels, int stride = 2, int jobs = 1);
ProbMap predict(const EdgeForest& forest, const RgbImage& image, int stride = 2, int jobs = 1);

void write_forest(std::ostream& out, const EdgeForest& forest);
EdgeForest read_forest(std::istream& in);
void save_forest(const std::filesystem::path& path, const EdgeForest& forest);
EdgeForest load_forest(const std::filesystem::path& path);
std::string serialize_forest(const EdgeForest& forest);

/// Header fields as a JSON object string.
std::string forest_header_json(const EdgeForest& forest);

}  // namespace weakbound
