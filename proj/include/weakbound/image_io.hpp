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

// Binary PNM codecs: P6 (8-bit RGB) and P5 (8- or 16-bit gray). 16-bit
// samples are big-endian as the format requires.

#include <cstdint>
#include <filesystem>
#include <span>
#include <variant>
#include <vector>

#include "weakbound/raster.hpp"

namespace weakbound {

using Gray16Image = Raster<std::uint16_t>;
using AnyImage = std::variant<GrayImage, Gray16Image, RgbImage>;

AnyImage decode_pnm(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_pnm(const GrayImage& img);
std::vector<std::uint8_t> encode_pnm(const Gray16Image& img);
std::vector<std::uint8_t> encode_pnm(const RgbImage& img);

AnyImage load_image(const std::filesystem::path& path);
void save_image(const AnyImage& img, const std::filesystem::path& path);

/// Loads an RGB image; 8-bit gray input is replicated into three channels.
RgbImage load_rgb(const std::filesystem::path& path);
GrayImage load_gray(const std::filesystem::path& path);
/// 8-bit files are widened so labels 0..255 survive either depth.
Gray16Image load_gray16(const std::filesystem::path& path);

/// Unit-interval maps go through 16-bit PGM, value = round(p * 65535).
void save_prob_map(const ProbMap& map, const std::filesystem::path& path);
ProbMap load_prob_map(const std::filesystem::path& path);

void save_tristate(const TriStateMask& mask, const std::filesystem::path& path);
TriStateMask load_tristate(const std::filesystem::path& path);

/// Writes to a sibling temp file, then renames over the target.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> read_file(const std::filesystem::path& path);

}  // namespace weakbound
