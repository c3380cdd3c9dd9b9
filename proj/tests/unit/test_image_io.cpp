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

#include <doctest.h>

#include <filesystem>
#include <string>

#include "weakbound/image_io.hpp"

using namespace weakbound;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  const fs::path d = fs::temp_directory_path() / "weakbound_test_image_io";
  fs::create_directories(d);
  return d;
}

std::vector<std::uint8_t> bytes_of(const std::string& s) { return {s.begin(), s.end()}; }

}  // namespace

TEST_CASE("RGB round trip is byte exact") {
  RgbImage img(3, 2);
  for (std::size_t i = 0; i < img.size(); ++i)
    img[i] = Rgb{static_cast<std::uint8_t>(i * 40), static_cast<std::uint8_t>(255 - i), static_cast<std::uint8_t>(i)};
  const auto bytes = encode_pnm(img);
  const auto back = std::get<RgbImage>(decode_pnm(bytes));
  CHECK(back == img);
  CHECK(encode_pnm(back) == bytes);
  const fs::path p = temp_dir() / "rgb.ppm";
  save_image(img, p);
  CHECK(read_file(p) == bytes);
  CHECK(load_rgb(p) == img);
}

TEST_CASE("one pixel image") {
  const auto img = std::get<GrayImage>(decode_pnm(bytes_of(std::string("P5\n1 1\n255\n") + '\0')));
  CHECK(img.width() == 1);
  CHECK(img.height() == 1);
  CHECK(img[0] == 0);
}

TEST_CASE("header comments are accepted") {
  const auto img = std::get<GrayImage>(decode_pnm(bytes_of("P5 # comment\n2 # w\n1\n255\nab")));
  CHECK(img.width() == 2);
  CHECK(img[1] == 'b');
}

TEST_CASE("16-bit gray is big-endian") {
  Gray16Image g(2, 1);
  g[0] = 0x0102;
  g[1] = 65535;
  const auto bytes = encode_pnm(g);
  CHECK(bytes[bytes.size() - 4] == 0x01);
  CHECK(bytes[bytes.size() - 3] == 0x02);
  CHECK(std::get<Gray16Image>(decode_pnm(bytes)) == g);
}

TEST_CASE("truncated payload names both lengths") {
  const auto bad = bytes_of("P6\n2 2\n255\nabcdef");
  try {
    decode_pnm(bad);
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("12") != std::string::npos);
    CHECK(msg.find("6") != std::string::npos);
  }
  CHECK_THROWS_AS(decode_pnm(bytes_of("P3\n1 1\n255\n0 0 0")), FormatError);
  CHECK_THROWS_AS(decode_pnm(bytes_of("P5\n0 1\n255\n")), FormatError);
}

TEST_CASE("probability maps and tri-state masks") {
  ProbMap p(3, 1, std::vector<float>{0.f, 0.5f, 1.f});
  const fs::path path = temp_dir() / "prob.pgm";
  save_prob_map(p, path);
  const ProbMap q = load_prob_map(path);
  CHECK(q[0] == 0.f);
  CHECK(q[1] == doctest::Approx(0.5).epsilon(1e-4));
  CHECK(q[2] == 1.f);
  // a second round trip is exact
  save_prob_map(q, path);
  CHECK(load_prob_map(path) == q);

  TriStateMask m(3, 1, std::vector<Tri>{Tri::Negative, Tri::Ignore, Tri::Positive});
  save_tristate(m, temp_dir() / "tri.pgm");
  CHECK(load_tristate(temp_dir() / "tri.pgm") == m);
  save_image(GrayImage(1, 1, 7), temp_dir() / "badtri.pgm");
  CHECK_THROWS_AS(load_tristate(temp_dir() / "badtri.pgm"), FormatError);
}

TEST_CASE("missing files are data errors") {
  CHECK_THROWS_AS(read_file(temp_dir() / "does_not_exist.ppm"), DataError);
}

TEST_CASE("gray images load as RGB and widen to 16 bit") {
  GrayImage g(2, 1, std::vector<std::uint8_t>{3, 200});
  save_image(g, temp_dir() / "gray.pgm");
  const RgbImage rgb = load_rgb(temp_dir() / "gray.pgm");
  CHECK(rgb[1] == Rgb{200, 200, 200});
  CHECK(load_gray16(temp_dir() / "gray.pgm")[1] == 200);
}
