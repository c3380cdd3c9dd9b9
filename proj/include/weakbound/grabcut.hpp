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
#include <span>
#include <vector>

#include "weakbound/raster.hpp"

namespace weakbound {

struct GaussianComponent {
  double weight = 0;
  std::array<double, 3> mean{};
  std::array<double, 9> cov{};  // row-major, regularized
  std::array<double, 9> inv_cov{};
  double log_norm = 0;  // 0.5 * log((2 pi)^3 det(cov))

  /// Negative log of weight * N(z; mean, cov).
  double cost(const std::array<double, 3>& z) const noexcept;
};

/// Full-covariance colour mixture; weights sum to 1.
struct GmmModel {
  std::vector<GaussianComponent> components;

  /// Fits one Gaussian per non-empty label in `assignment`. Labels >= num_components are ignored.
  static GmmModel fit(std::span<const std::array<double, 3>> samples, std::span<const int> assignment, int num_components,
                      double regularization);
  /// Deterministic initial clustering: repeatedly split the cluster with the
  /// largest covariance eigenvalue through its mean, up to `num_components`.
  static std::vector<int> initial_clusters(std::span<const std::array<double, 3>> samples, int num_components);

  int best_component(const std::array<double, 3>& z) const noexcept;
  double min_cost(const std::array<double, 3>& z) const noexcept;
};

enum class AcceptanceIou { MaskRectVsBox, MaskAreaVsBox };

struct GrabCutParams {
  int components = 5;
  double gamma = 50.0;
  double regularization = 1e-3;
  int iterations = 5;
  /// Crop padding around the box as a fraction of box size.
  double crop_padding = 0.5;
  AcceptanceIou acceptance = AcceptanceIou::MaskRectVsBox;
};

struct GrabCutResult {
  BinaryMap mask;  // 1 = foreground, full image size
  /// Entry 0 is the initial labelling; one entry per iteration follows.
  std::vector<double> energy_trace;
};

/// Figure/ground segmentation with `rect` as the unknown region and the rest
/// of the padded crop as fixed background.
GrabCutResult grabcut(const RgbImage& image, const Rect& rect, int iterations, const GrabCutParams& params = {});

/// Per box: accepted masks contribute their contour as Positive, rejected
/// boxes become Ignore. Positive takes precedence over Ignore where they overlap.
TriStateMask grabcut_annotation(const RgbImage& image, const std::vector<DetectionBox>& detections,
                                double iou_accept = 0.7, const GrabCutParams& params = {});

/// Positive pixels of the accepted masks only, for consensus with other sources.
BinaryMap grabcut_boundaries(const RgbImage& image, const std::vector<DetectionBox>& detections,
                             double iou_accept = 0.7, const GrabCutParams& params = {});

}  // namespace weakbound
