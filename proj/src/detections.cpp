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

#include "weakbound/detections.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

namespace weakbound {

using nlohmann::json;

std::vector<ImageDetection> parse_detections(std::istream& in) {
  std::vector<ImageDetection> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ValidationError(std::string("malformed JSON: ") + e.what(), lineno);
    }
    try {
      ImageDetection d;
      d.image = j.at("image").get<std::string>();
      d.box.class_id = j.at("class").get<int>();
      d.box.score = j.at("score").get<double>();
      const auto& b = j.at("box");
      if (!b.is_array() || b.size() != 4) throw ValidationError("box must be [x0,y0,x1,y1]", lineno);
      for (const auto& v : b)
        if (!v.is_number_integer()) throw ValidationError("box coordinates must be integers", lineno);
      d.box.rect = Rect{b[0].get<int>(), b[1].get<int>(), b[2].get<int>(), b[3].get<int>()};
      if (d.box.class_id < 0) throw ValidationError("class must be >= 0", lineno);
      if (!(d.box.score >= 0.0 && d.box.score <= 1.0))
        throw ValidationError("score " + std::to_string(d.box.score) + " outside [0,1]", lineno);
      if (d.box.rect.x1 <= d.box.rect.x0 || d.box.rect.y1 <= d.box.rect.y0)
        throw ValidationError("box must satisfy x1>x0 and y1>y0", lineno);
      out.push_back(std::move(d));
    } catch (const json::exception& e) {
      throw ValidationError(std::string("bad detection record: ") + e.what(), lineno);
    }
  }
  return out;
}

std::vector<ImageDetection> load_detections(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return parse_detections(in);
}

void write_detections(std::ostream& out, const std::vector<ImageDetection>& dets) {
  for (const auto& d : dets) {
    json j = {{"image", d.image},
              {"class", d.box.class_id},
              {"score", d.box.score},
              {"box", {d.box.rect.x0, d.box.rect.y0, d.box.rect.x1, d.box.rect.y1}}};
    out << j.dump() << '\n';
  }
}

std::vector<DetectionBox> filter_by_score(const std::vector<DetectionBox>& dets, double min_score) {
  std::vector<DetectionBox> out;
  for (const auto& d : dets)
    if (d.score > min_score) out.push_back(d);
  return out;
}

std::vector<DetectionBox> clip_to_image(const std::vector<DetectionBox>& dets, int width, int height) {
  std::vector<DetectionBox> out;
  for (const auto& d : dets)
    if (auto r = clip(d.rect, width, height)) out.push_back(DetectionBox{d.class_id, d.score, *r});
  return out;
}

std::map<std::string, std::vector<DetectionBox>> group_by_image(const std::vector<ImageDetection>& dets) {
  std::map<std::string, std::vector<DetectionBox>> out;
  for (const auto& d : dets) out[d.image].push_back(d.box);
  return out;
}

}  // namespace weakbound
