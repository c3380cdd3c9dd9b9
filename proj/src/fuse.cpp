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

#include "weakbound/fuse.hpp"

#include <algorithm>

namespace weakbound {

ProbMap objectness(const std::vector<DetectionBox>& detections, int width, int height, float floor) {
  if (!(floor >= 0.0f && floor <= 1.0f)) throw ParameterError("objectness: floor must lie in [0,1]");
  ProbMap out(width, height, floor);
  Raster<std::uint8_t> covered(width, height, 0);
  for (const auto& d : detections) {
    const auto r = clip(d.rect, width, height);
    if (!r) continue;
    const auto s = static_cast<float>(d.score);
    for (int y = r->y0; y < r->y1; ++y)
      for (int x = r->x0; x < r->x1; ++x) {
        if (!covered(x, y)) {
          covered(x, y) = 1;
          out(x, y) = s;
        } else {
          out(x, y) = std::max(out(x, y), s);
        }
      }
  }
  return out;
}

ProbMap fuse(const ProbMap& boundary, const ProbMap& obj) {
  if (!boundary.same_shape(obj)) throw ParameterError("fuse: boundary and objectness sizes differ");
  ProbMap out(boundary.width(), boundary.height());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = boundary[i] * obj[i];
  return out;
}

}  // namespace weakbound
