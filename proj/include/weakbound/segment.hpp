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

#include <filesystem>

#include "weakbound/raster.hpp"

namespace weakbound {

/// Region labels are the contiguous range [0, num_regions), numbered in
/// raster order of first appearance.
struct SegmentLabeling {
  LabelMap labels;
  int num_regions = 0;

  int width() const noexcept { return labels.width(); }
  int height() const noexcept { return labels.height(); }
};

struct FhParams {
  double k = 300.0;
  double sigma = 0.8;
  int min_size = 100;
  /// 8-connected grids may produce regions that are only 8-connected.
  bool eight_connected = false;
};

/// Graph-based segmentation over a grid graph weighted by RGB distance of
/// the smoothed image. Equal weights are resolved by (y, x, direction).
SegmentLabeling fh_segment(const RgbImage& image, const FhParams& params = {});

/// Relabels an arbitrary label map into SegmentLabeling form.
SegmentLabeling canonical_labeling(const LabelMap& labels);

BinaryMap labeling_boundaries(const SegmentLabeling& seg);

/// 16-bit PGM labels plus `<path>.json` with num_regions and the params.
void save_labeling(const SegmentLabeling& seg, const FhParams& params, const std::filesystem::path& path);
SegmentLabeling load_labeling(const std::filesystem::path& path);

/// Gaussian smoothing, Sobel gradients, 4-direction non-maximum suppression
/// and 8-connected hysteresis. Thresholds are in gray levels per pixel.
BinaryMap canny(const GrayImage& image, double sigma, double low, double high);

/// Thinned gradient magnitude before hysteresis.
Raster<float> canny_suppressed_magnitude(const GrayImage& image, double sigma);
/// Pixels >= low that are 8-connected to a pixel >= high.
BinaryMap hysteresis(const Raster<float>& magnitude, double low, double high);

GrayImage to_gray(const RgbImage& image);

}  // namespace weakbound
