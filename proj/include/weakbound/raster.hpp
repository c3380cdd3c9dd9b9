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

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "weakbound/errors.hpp"

namespace weakbound {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// Row-major grid of per-pixel values. Width and height are always >= 1
/// for a constructed raster; a default-constructed raster is empty and only
/// serves as a placeholder.
template <typename T>
class Raster {
 public:
  using value_type = T;

  Raster() = default;
  Raster(int width, int height, T fill = T{}) : width_(width), height_(height) {
    if (width < 1 || height < 1) throw ParameterError("raster dimensions must be >= 1");
    data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
  }
  Raster(int width, int height, std::vector<T> data) : width_(width), height_(height), data_(std::move(data)) {
    if (width < 1 || height < 1) throw ParameterError("raster dimensions must be >= 1");
    if (data_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
      throw ParameterError("raster data length does not match width*height");
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T& operator()(int x, int y) noexcept { return data_[index(x, y)]; }
  const T& operator()(int x, int y) const noexcept { return data_[index(x, y)]; }
  T& operator[](std::size_t i) noexcept { return data_[i]; }
  const T& operator[](std::size_t i) const noexcept { return data_[i]; }

  std::span<T> pixels() noexcept { return data_; }
  std::span<const T> pixels() const noexcept { return data_; }
  const std::vector<T>& vector() const noexcept { return data_; }

  bool contains(int x, int y) const noexcept { return x >= 0 && y >= 0 && x < width_ && y < height_; }
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }

  template <typename U>
  bool same_shape(const Raster<U>& other) const noexcept {
    return width_ == other.width() && height_ == other.height();
  }

  friend bool operator==(const Raster&, const Raster&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

using GrayImage = Raster<std::uint8_t>;
using RgbImage = Raster<Rgb>;
/// Values in [0,1].
using ProbMap = Raster<float>;
using LabelMap = Raster<std::int32_t>;
/// Values in {0,1}.
using BinaryMap = Raster<std::uint8_t>;

/// Tri-state boundary label. The numeric values are the on-disk encoding.
enum class Tri : std::uint8_t { Negative = 0, Ignore = 128, Positive = 255 };
using TriStateMask = Raster<Tri>;

/// Half-open pixel box [x0,x1) x [y0,y1).
struct Rect {
  int x0 = 0, y0 = 0, x1 = 1, y1 = 1;

  int width() const noexcept { return x1 - x0; }
  int height() const noexcept { return y1 - y0; }
  std::int64_t area() const noexcept { return std::int64_t{width()} * height(); }
  bool valid() const noexcept { return x1 > x0 && y1 > y0; }
  bool contains(int x, int y) const noexcept { return x >= x0 && x < x1 && y >= y0 && y < y1; }
  friend bool operator==(const Rect&, const Rect&) = default;
};

struct DetectionBox {
  int class_id = 0;
  double score = 1.0;
  Rect rect;
};

/// Intersection over union of pixel areas. Both rects must be valid.
double iou(const Rect& a, const Rect& b) noexcept;
std::optional<Rect> intersect(const Rect& a, const Rect& b) noexcept;
/// Intersection with the image [0,w)x[0,h); nullopt when nothing remains.
std::optional<Rect> clip(const Rect& r, int width, int height) noexcept;
Rect dilate(const Rect& r, int by) noexcept;
/// Grow each side by `fraction` of the box size, then clip.
Rect pad_and_clip(const Rect& r, double fraction, int width, int height) noexcept;

/// Tight bounding rect of the nonzero pixels.
std::optional<Rect> tight_rect(const BinaryMap& mask) noexcept;
/// Mask pixels with at least one 4-neighbour inside the image that is
/// outside the mask. The image border itself does not count as a contour.
BinaryMap mask_contour(const BinaryMap& mask);
/// Pixel is 1 iff its right or bottom neighbour carries a different label.
BinaryMap label_boundaries(const LabelMap& labels);
/// Chebyshev dilation with a (2r+1)x(2r+1) square.
BinaryMap dilate(const BinaryMap& mask, int radius);

template <typename T>
std::size_t count_equal(const Raster<T>& r, T value) {
  std::size_t n = 0;
  for (const T& v : r.pixels()) n += (v == value);
  return n;
}

}  // namespace weakbound
