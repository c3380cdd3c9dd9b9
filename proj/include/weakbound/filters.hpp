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

#include "weakbound/raster.hpp"

namespace weakbound {

using Plane = Raster<float>;

std::array<Plane, 3> split_channels(const RgbImage& img);
Plane to_plane(const GrayImage& img);

/// Separable Gaussian, radius ceil(3 sigma), replicated borders. sigma <= 0 copies.
Plane gaussian_blur(const Plane& in, double sigma);
/// Separable triangle filter of radius r (weights 1..r+1..1), replicated borders.
Plane triangle_blur(const Plane& in, int radius);

struct Gradient {
  Plane gx, gy;
};
/// Sobel derivatives scaled by 1/8 so a unit ramp yields a unit gradient.
Gradient sobel(const Plane& in);
Plane magnitude(const Gradient& g);

/// Bilinear sample with replicated borders.
float sample_bilinear(const Plane& p, float x, float y) noexcept;

/// 2x box downsampling; odd trailing rows/columns are averaged with replication.
Plane shrink2(const Plane& in);

}  // namespace weakbound
