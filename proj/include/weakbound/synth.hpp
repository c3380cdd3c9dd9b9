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
#include <string>
#include <utility>
#include <vector>

#include "weakbound/raster.hpp"

namespace weakbound {

enum class ShapeKind { Polygon, Ellipse };

/// Star-shaped region around (cx, cy) described by its boundary radius per angle.
struct Shape {
  ShapeKind kind = ShapeKind::Ellipse;
  double cx = 0, cy = 0;
  std::vector<std::pair<double, double>> vertices;  // polygon: (angle, radius), angles ascending in [0, 2pi)
  double a = 1, b = 1, phi = 0;                     // ellipse semi-axes and rotation
  Rgb color;

  double radius_at(double theta) const noexcept;
  double max_radius() const noexcept;
};

struct SynthParams {
  int width = 128;
  int height = 128;
  int min_shapes = 2;
  int max_shapes = 4;
  double min_radius = 0.12;  // fraction of min(width, height)
  double max_radius = 0.28;
};

struct NoiseParams {
  double jitter_sigma = 0;   // pixels, RMS radial displacement
  double drop_rate = 0;      // probability an instance's contour is lost
  double spurious_rate = 0;  // probability per instance of an extra false contour
};

struct SynthSample {
  std::string id;
  RgbImage image;
  LabelMap instances;  // 0 = background, shapes numbered 1.. in paint order
  std::vector<DetectionBox> detections;  // tight boxes of visible instances, score 1
  std::vector<Shape> shapes;
};

SynthSample synth_sample(const SynthParams& params, std::uint64_t seed, std::size_t index);
std::vector<SynthSample> synth_dataset(const SynthParams& params, std::size_t n, std::uint64_t seed);

/// Instance labels of the shapes painted in order; `sigma` perturbs each
/// boundary radius by smooth periodic noise of unit RMS scaled by sigma.
/// Shapes with keep[i] == false are skipped.
LabelMap render_labels(const std::vector<Shape>& shapes, int width, int height, double sigma, std::uint64_t seed,
                       const std::vector<bool>& keep = {});

/// Positive on label boundaries, Negative elsewhere.
TriStateMask boundary_annotation(const LabelMap& labels);

/// Noisy version of the clean boundary annotation. All-zero noise returns
/// exactly boundary_annotation(sample.instances).
TriStateMask corrupt_annotation(const SynthSample& sample, const NoiseParams& noise, std::uint64_t seed);

}  // namespace weakbound
