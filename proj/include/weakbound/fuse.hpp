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

#include <vector>

#include "weakbound/raster.hpp"

namespace weakbound {

/// Per-pixel maximum score of the boxes covering it, `floor` elsewhere.
/// Boxes are clipped to the image.
ProbMap objectness(const std::vector<DetectionBox>& detections, int width, int height, float floor = 0.0f);

/// Pixelwise product of a boundary map and an objectness map.
ProbMap fuse(const ProbMap& boundary, const ProbMap& objectness);

}  // namespace weakbound
