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

#include "weakbound/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <string>

namespace weakbound {
namespace {

class HeaderReader {
 public:
  explicit HeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const char c = static_cast<char>(bytes_[pos_]);
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
        ++pos_;
      } else {
        break;
      }
    }
  }

  long read_uint(const char* what) {
    skip_space_and_comments();
    const std::size_t start = pos_;
    long v = 0;
    while (pos_ < bytes_.size() && bytes_[pos_] >= '0' && bytes_[pos_] <= '9') {
      v = v * 10 + (bytes_[pos_] - '0');
      if (v > 1'000'000'000L) throw FormatError(std::string("header value too large for ") + what, start);
      ++pos_;
    }
    if (pos_ == start) throw FormatError(std::string("expected integer for ") + what, start);
    return v;
  }

  // Exactly one whitespace byte separates maxval from the raster.
  void single_whitespace() {
    if (pos_ >= bytes_.size()) throw FormatError("missing whitespace before raster", pos_);
    const char c = static_cast<char>(bytes_[pos_]);
    if (c != ' ' && c != '\t' && c != '\n' && c != '\r') throw FormatError("expected whitespace before raster", pos_);
    ++pos_;
  }

  std::size_t pos() const { return pos_; }
  void advance(std::size_t n) { pos_ += n; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

std::string header(const char* magic, int w, int h, int maxval) {
  return std::string(magic) + "\n" + std::to_string(w) + " " + std::to_string(h) + "\n" + std::to_string(maxval) + "\n";
}

std::vector<std::uint8_t> with_header(const std::string& head, std::size_t payload) {
  std::vector<std::uint8_t> out;
  out.reserve(head.size() + payload);
  out.insert(out.end(), head.begin(), head.end());
  return out;
}

}  // namespace

AnyImage decode_pnm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6'))
    throw FormatError("not a binary PGM/PPM file (expected magic P5 or P6)", 0);
  const bool rgb = bytes[1] == '6';
  HeaderReader rd(bytes);
  rd.advance(2);
  const long w = rd.read_uint("width");
  const long h = rd.read_uint("height");
  const std::size_t maxval_pos = rd.pos();
  const long maxval = rd.read_uint("maxval");
  if (w < 1 || h < 1) throw FormatError("width and height must be >= 1", maxval_pos);
  if (maxval < 1 || maxval > 65535) throw FormatError("maxval must be in [1,65535]", maxval_pos);
  if (rgb && maxval > 255) throw FormatError("16-bit PPM is not supported", maxval_pos);
  rd.single_whitespace();

  const std::size_t bytes_per_sample = maxval > 255 ? 2 : 1;
  const std::size_t channels = rgb ? 3 : 1;
  const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  const std::size_t expected = n * channels * bytes_per_sample;
  const std::size_t actual = bytes.size() - rd.pos();
  if (actual != expected)
    throw FormatError("payload length mismatch: expected " + std::to_string(expected) + " bytes for " +
                          std::to_string(w) + "x" + std::to_string(h) + ", got " + std::to_string(actual),
                      rd.pos());
  const std::uint8_t* p = bytes.data() + rd.pos();
  if (rgb) {
    std::vector<Rgb> px(n);
    for (std::size_t i = 0; i < n; ++i) px[i] = Rgb{p[3 * i], p[3 * i + 1], p[3 * i + 2]};
    return RgbImage(static_cast<int>(w), static_cast<int>(h), std::move(px));
  }
  if (bytes_per_sample == 2) {
    std::vector<std::uint16_t> px(n);
    for (std::size_t i = 0; i < n; ++i) px[i] = static_cast<std::uint16_t>((p[2 * i] << 8) | p[2 * i + 1]);
    return Gray16Image(static_cast<int>(w), static_cast<int>(h), std::move(px));
  }
  return GrayImage(static_cast<int>(w), static_cast<int>(h), std::vector<std::uint8_t>(p, p + n));
}

std::vector<std::uint8_t> encode_pnm(const GrayImage& img) {
  auto out = with_header(header("P5", img.width(), img.height(), 255), img.size());
  out.insert(out.end(), img.pixels().begin(), img.pixels().end());
  return out;
}

std::vector<std::uint8_t> encode_pnm(const Gray16Image& img) {
  auto out = with_header(header("P5", img.width(), img.height(), 65535), 2 * img.size());
  for (std::uint16_t v : img.pixels()) {
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
  }
  return out;
}

std::vector<std::uint8_t> encode_pnm(const RgbImage& img) {
  auto out = with_header(header("P6", img.width(), img.height(), 255), 3 * img.size());
  for (const Rgb& c : img.pixels()) {
    out.push_back(c.r);
    out.push_back(c.g);
    out.push_back(c.b);
  }
  return out;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

AnyImage load_image(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  try {
    return decode_pnm(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what(), e.offset());
  }
}

void save_image(const AnyImage& img, const std::filesystem::path& path) {
  const auto bytes = std::visit([](const auto& im) { return encode_pnm(im); }, img);
  write_file_atomic(path, bytes);
}

RgbImage load_rgb(const std::filesystem::path& path) {
  auto img = load_image(path);
  if (auto* rgb = std::get_if<RgbImage>(&img)) return std::move(*rgb);
  if (auto* g = std::get_if<GrayImage>(&img)) {
    RgbImage out(g->width(), g->height());
    for (std::size_t i = 0; i < g->size(); ++i) out[i] = Rgb{(*g)[i], (*g)[i], (*g)[i]};
    return out;
  }
  throw FormatError(path.string() + ": 16-bit image where RGB was expected", 0);
}

GrayImage load_gray(const std::filesystem::path& path) {
  auto img = load_image(path);
  if (auto* g = std::get_if<GrayImage>(&img)) return std::move(*g);
  throw FormatError(path.string() + ": expected an 8-bit gray image", 0);
}

Gray16Image load_gray16(const std::filesystem::path& path) {
  auto img = load_image(path);
  if (auto* g = std::get_if<Gray16Image>(&img)) return std::move(*g);
  if (auto* g = std::get_if<GrayImage>(&img)) {
    Gray16Image out(g->width(), g->height());
    for (std::size_t i = 0; i < g->size(); ++i) out[i] = (*g)[i];
    return out;
  }
  throw FormatError(path.string() + ": expected a gray image", 0);
}

void save_prob_map(const ProbMap& map, const std::filesystem::path& path) {
  Gray16Image q(map.width(), map.height());
  for (std::size_t i = 0; i < map.size(); ++i) {
    const float v = std::clamp(map[i], 0.0f, 1.0f);
    q[i] = static_cast<std::uint16_t>(std::lround(v * 65535.0f));
  }
  write_file_atomic(path, encode_pnm(q));
}

ProbMap load_prob_map(const std::filesystem::path& path) {
  auto img = load_image(path);
  if (auto* g = std::get_if<Gray16Image>(&img)) {
    ProbMap out(g->width(), g->height());
    for (std::size_t i = 0; i < g->size(); ++i) out[i] = static_cast<float>((*g)[i]) / 65535.0f;
    return out;
  }
  if (auto* g = std::get_if<GrayImage>(&img)) {
    ProbMap out(g->width(), g->height());
    for (std::size_t i = 0; i < g->size(); ++i) out[i] = static_cast<float>((*g)[i]) / 255.0f;
    return out;
  }
  throw FormatError(path.string() + ": expected a gray probability map", 0);
}

void save_tristate(const TriStateMask& mask, const std::filesystem::path& path) {
  GrayImage g(mask.width(), mask.height());
  for (std::size_t i = 0; i < mask.size(); ++i) g[i] = static_cast<std::uint8_t>(mask[i]);
  write_file_atomic(path, encode_pnm(g));
}

TriStateMask load_tristate(const std::filesystem::path& path) {
  const GrayImage g = load_gray(path);
  TriStateMask out(g.width(), g.height());
  for (std::size_t i = 0; i < g.size(); ++i) {
    switch (g[i]) {
      case 0: out[i] = Tri::Negative; break;
      case 128: out[i] = Tri::Ignore; break;
      case 255: out[i] = Tri::Positive; break;
      default: throw FormatError(path.string() + ": tri-state value must be 0, 128 or 255", i);
    }
  }
  return out;
}

}  // namespace weakbound
