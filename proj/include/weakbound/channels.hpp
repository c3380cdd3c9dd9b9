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
#include <cstdint>
#include <vector>

#include "weakbound/filters.hpp"
#include "weakbound/raster.hpp"

namespace weakbound {

inline constexpr int kColorChannels = 3;
inline constexpr int kGradientScales = 2;
inline constexpr int kOrientations = 4;
inline constexpr int kNumChannels = kColorChannels + kGradientScales * (1 + kOrientations);  // 13
inline constexpr int kPatchIn = 32;
inline constexpr int kPatchOut = 16;
inline constexpr int kShrink = 2;
inline constexpr int kCellsIn = kPatchIn / kShrink;  // 16 shrunk cells per side
inline constexpr int kSimGrid = 5;
inline constexpr int kSimPairs = kSimGrid * kSimGrid * (kSimGrid * kSimGrid - 1) / 2;  // 300
inline constexpr std::uint32_t kRawFeatures = kNumChannels * kCellsIn * kCellsIn;
inline constexpr std::uint32_t kFeatureDim = kRawFeatures + kNumChannels * kSimPairs;

/// Channel order: L, u, v, |g| (fine), 4 orientations (fine), |g| (coarse), 4 orientations (coarse).
/// Planes are padded by kPatchIn/2 pixels on each side and shrunk by kShrink.
struct FeatureChannels {
  int image_width = 0;
  int image_height = 0;
  std::vector<Plane> regular;     // lightly smoothed, for raw cell features
  std::vector<Plane> similarity;  // heavily smoothed, for cell differences
};

FeatureChannels compute_channels(const RgbImage& image);

/// The kNumChannels planes at full resolution, before padding and shrinking.
/// Gradient channels are >= 0.
std::vector<Plane> raw_channels(const RgbImage& image);

/// Color conversion used for the first three channels, each roughly in [0,1].
std::array<Plane, 3> rgb_to_luv(const RgbImage& image);

struct FeatureRef {
  std::uint16_t channel = 0;
  bool similarity = false;
  std::uint8_t ax = 0, ay = 0, bx = 0, by = 0;  // shrunk offsets inside the patch window
};
/// Layout of the kFeatureDim features.
const std::vector<FeatureRef>& feature_table();

/// Feature `f` of the 32x32 patch centred at image pixel (cx, cy).
/// Odd coordinates use the window of the even pixel to their left/top.
float channel_feature(const FeatureChannels& ch, std::uint32_t f, int cx, int cy) noexcept;

}  // namespace weakbound
