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

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "weakbound/raster.hpp"
#include "weakbound/segment.hpp"

namespace weakbound {

/// A region of one image. `pixels` holds sorted row-major indices.
struct Proposal {
  int image_width = 0;
  int image_height = 0;
  std::vector<std::uint32_t> pixels;
  Rect rect;
  std::string source;

  BinaryMap mask() const;
  std::uint64_t hash() const noexcept;
};

struct SimilarityWeights {
  double color = 1.0;
  double texture = 1.0;
  double size = 1.0;
  double fill = 1.0;
};

/// Greedy hierarchical grouping of adjacent base regions by similarity.
/// Emits the base regions followed by every merge (2n-1 before dedup),
/// drops exact duplicates, then keeps the first `max_proposals` (0 keeps all).
std::vector<Proposal> selective_search(const RgbImage& image, const SegmentLabeling& base,
                                       const SimilarityWeights& weights = {}, std::size_t max_proposals = 0);

/// Same hierarchy without dedup or truncation.
std::vector<Proposal> selective_search_hierarchy(const RgbImage& image, const SegmentLabeling& base,
                                                 const SimilarityWeights& weights = {});

/// Drops proposals whose pixel sets repeat an earlier one.
std::vector<Proposal> dedup_proposals(std::vector<Proposal> proposals);

/// For each detection, indices of proposals with iou(rect, box) >= iou_min.
std::vector<std::vector<std::size_t>> match_proposals(std::span<const Proposal> proposals,
                                                      std::span<const DetectionBox> detections, double iou_min = 0.9);

/// Pixelwise OR of the selected proposals' contours, not clipped to any box.
BinaryMap union_boundaries(std::span<const Proposal> proposals, std::span<const std::size_t> selected, int width,
                           int height);
BinaryMap union_boundaries(std::span<const Proposal> proposals, int width, int height);

/// Support of a pixel = fraction of maps with a positive within Chebyshev
/// distance `tol`. Pixels positive in some map become Positive when support
/// exceeds `agreement`, Ignore otherwise; all others are Negative.
TriStateMask consensus_boundaries(std::span<const BinaryMap> maps, double agreement = 0.7, int tol = 1);

/// Agreement value that requires every one of `num_maps` maps to agree.
double strict_agreement(std::size_t num_maps) noexcept;

/// JSONL: {"image": id, "rect": [x0,y0,x1,y1], "size": [w,h], "mask_rle": [...]}.
/// mask_rle alternates run lengths of 0s and 1s over the row-major raster,
/// starting with a (possibly empty) run of 0s.
void write_proposals(std::ostream& out, const std::string& image_id, std::span<const Proposal> proposals);
/// Reads the records for one image. `size` may be omitted when the caller knows the dimensions.
std::vector<Proposal> read_proposals(std::istream& in, const std::string& image_id, int width, int height);
std::vector<Proposal> load_proposals(const std::filesystem::path& path, const std::string& image_id, int width,
                                     int height);

std::vector<std::uint32_t> rle_encode(const BinaryMap& mask);
BinaryMap rle_decode(std::span<const std::uint32_t> runs, int width, int height);

}  // namespace weakbound
