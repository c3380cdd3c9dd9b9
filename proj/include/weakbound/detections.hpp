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
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "weakbound/raster.hpp"

namespace weakbound {

struct ImageDetection {
  std::string image;
  DetectionBox box;
};

/// One JSON object per line:
///   {"image": "<id>", "class": <int>=0>, "score": <float>, "box": [x0,y0,x1,y1]}
/// Blank lines are skipped. Order is preserved.
std::vector<ImageDetection> parse_detections(std::istream& in);
std::vector<ImageDetection> load_detections(const std::filesystem::path& path);
void write_detections(std::ostream& out, const std::vector<ImageDetection>& dets);

/// Keeps boxes with score strictly above `min_score`.
std::vector<DetectionBox> filter_by_score(const std::vector<DetectionBox>& dets, double min_score);
/// Clips boxes to the image; boxes left without area are dropped.
std::vector<DetectionBox> clip_to_image(const std::vector<DetectionBox>& dets, int width, int height);

std::map<std::string, std::vector<DetectionBox>> group_by_image(const std::vector<ImageDetection>& dets);

}  // namespace weakbound
