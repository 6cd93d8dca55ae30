// Copyright 2026 The Forge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "forge/errors.hpp"
#include "forge/imaging.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace forge;
using forge::test::TempDir;

TEST_CASE("decode: 1x1 white PNG round trip") {
    const auto img = test::solid(1, 1, 255, 255, 255);
    const auto back = decode_image(encode_png(img));
    CHECK(back.width() == 1);
    CHECK(back.height() == 1);
    CHECK(std::vector<std::uint8_t>(back.data().begin(), back.data().end()) == std::vector<std::uint8_t>{255, 255, 255});
}

TEST_CASE("decode: PNG is lossless, JPEG keeps geometry") {
    const auto img = test::noise_image(640, 480, 11);
    CHECK(decode_image(encode_png(img)) == img);
    const auto jpg = decode_image(encode_jpeg(img, 90));
    CHECK(jpg.width() == 640);
    CHECK(jpg.height() == 480);
}

TEST_CASE("decode: truncated and garbage streams fail") {
    const auto jpg = encode_jpeg(test::noise_image(64, 64, 3), 90);
    std::vector<std::uint8_t> truncated(jpg.begin(), jpg.begin() + static_cast<long>(jpg.size() / 2));
    CHECK_THROWS_AS(decode_image(truncated), DecodeError);
    const auto png = encode_png(test::noise_image(64, 64, 3));
    std::vector<std::uint8_t> png_cut(png.begin(), png.begin() + static_cast<long>(png.size() / 2));
    CHECK_THROWS_AS(decode_image(png_cut), DecodeError);
    const std::vector<std::uint8_t> garbage = {1, 2, 3, 4, 5, 6, 7, 8};
    CHECK_THROWS_AS(decode_image(garbage), DecodeError);
    CHECK_THROWS_AS(decode_image({}), DecodeError);
}

TEST_CASE("read_image: missing file is an I/O error") {
    TempDir dir;
    CHECK_THROWS_AS(read_image(dir / "nope.png"), IoError);
    write_png(test::solid(3, 2, 1, 2, 3), dir / "a.png");
    CHECK(read_image(dir / "a.png") == test::solid(3, 2, 1, 2, 3));
}

TEST_CASE("to_luminance: black, white, pure red") {
    for (double v : to_luminance(test::solid(4, 4, 0, 0, 0)).data) CHECK(v == 0.0);
    for (double v : to_luminance(test::solid(4, 4, 255, 255, 255)).data) CHECK(v == 1.0);
    const auto red = to_luminance(test::solid(2, 2, 255, 0, 0));
    CHECK(std::fabs(red.at(1, 1) - 0.299) < 1e-6);
}

TEST_CASE("region_stats: constant region") {
    LuminancePlane p{10, 10, std::vector<double>(100, 0.5)};
    const auto s = region_stats(p);
    CHECK(s.mean == doctest::Approx(0.5));
    CHECK(s.min == 0.5);
    CHECK(s.max == 0.5);
    CHECK(s.p05 == 0.5);
    CHECK(s.p95 == 0.5);
    CHECK(s.michelson == 0.0);
}

TEST_CASE("region_stats: two-valued region") {
    LuminancePlane p{10, 10, {}};
    for (int i = 0; i < 100; ++i) p.data.push_back(i < 50 ? 0.0 : 1.0);
    const auto s = region_stats(p);
    CHECK(s.mean == doctest::Approx(0.5));
    CHECK(s.michelson == doctest::Approx(1.0 / (1.0 + 1e-6)));
}

TEST_CASE("region_stats: ramp percentiles by brute-force sort") {
    LuminancePlane p{10, 10, {}};
    for (int i = 99; i >= 0; --i) p.data.push_back(i / 100.0);  // unsorted on purpose
    const auto s = region_stats(p);
    std::vector<double> sorted = p.data;
    std::sort(sorted.begin(), sorted.end());
    CHECK(s.p05 == sorted[5]);
    CHECK(s.p95 == sorted[95]);
    CHECK(s.p05 == doctest::Approx(0.05));
    CHECK(s.p95 == doctest::Approx(0.95));
}

TEST_CASE("region_stats: subrect and bounds") {
    LuminancePlane p{4, 4, std::vector<double>(16, 0.0)};
    p.data[5] = 1.0;  // (1,1)
    const auto s = region_stats(p, Rect{1, 1, 2, 2});
    CHECK(s.max == 1.0);
    CHECK(s.mean == doctest::Approx(0.25));
    CHECK_THROWS_AS(region_stats(p, Rect{3, 3, 2, 2}), RectOutOfBounds);
    CHECK_THROWS_AS(region_stats(p, Rect{-1, 0, 1, 1}), RectOutOfBounds);
    CHECK_THROWS_AS(region_stats(p, Rect{0, 0, 0, 1}), RectOutOfBounds);
}

TEST_CASE("nearest_rank: index floor(q*n/100)") {
    const std::vector<double> v = {1, 2, 3, 4};
    CHECK(nearest_rank(v, 0) == 1);
    CHECK(nearest_rank(v, 50) == 3);
    CHECK(nearest_rank(v, 100) == 4);
}

TEST_CASE("resize_bilinear: identity, checkerboard, shape") {
    const auto img = test::noise_image(37, 21, 5);
    CHECK(resize_bilinear(img, 37, 21) == img);
    const auto cb = test::checkerboard(2, 1);
    const auto one = resize_bilinear(cb, 1, 1);
    CHECK(one.pixel(0, 0)[0] == 128);
    const auto small = resize_bilinear(test::noise_image(500, 500, 1), 64, 64);
    CHECK(small.width() == 64);
    CHECK(small.height() == 64);
}

TEST_CASE("resize_bilinear: matches an independent half-pixel oracle") {
    const auto img = test::noise_image(13, 9, 8);
    const int W = 5, H = 7;
    const auto out = resize_bilinear(img, W, H);
    for (int y = 0; y < H; ++y) {
        for (int x = 0; x < W; ++x) {
            const double sx = std::clamp((x + 0.5) * 13.0 / W - 0.5, 0.0, 12.0);
            const double sy = std::clamp((y + 0.5) * 9.0 / H - 0.5, 0.0, 8.0);
            const int x0 = static_cast<int>(sx), y0 = static_cast<int>(sy);
            const int x1 = std::min(x0 + 1, 12), y1 = std::min(y0 + 1, 8);
            const double fx = sx - x0, fy = sy - y0;
            for (int c = 0; c < 3; ++c) {
                const double v = (1 - fx) * (1 - fy) * img.pixel(x0, y0)[c] + fx * (1 - fy) * img.pixel(x1, y0)[c] +
                                 (1 - fx) * fy * img.pixel(x0, y1)[c] + fx * fy * img.pixel(x1, y1)[c];
                CHECK(std::abs(out.pixel(x, y)[c] - v) <= 0.5 + 1e-9);
            }
        }
    }
}

TEST_CASE("crop and reflect_pad") {
    const auto img = test::noise_image(6, 4, 2);
    const auto c = crop(img, Rect{2, 1, 3, 2});
    CHECK(c.width() == 3);
    CHECK(c.pixel(0, 0)[1] == img.pixel(2, 1)[1]);
    CHECK_THROWS_AS(crop(img, Rect{4, 0, 3, 1}), RectOutOfBounds);

    const auto p = reflect_pad(img, 6, 7);
    CHECK(p.height() == 7);
    // Mirror about the last row without repeating it: row 4 <- row 2, row 5 <- row 1, row 6 <- row 0.
    CHECK(p.pixel(3, 4)[0] == img.pixel(3, 2)[0]);
    CHECK(p.pixel(3, 5)[0] == img.pixel(3, 1)[0]);
    CHECK(p.pixel(3, 6)[0] == img.pixel(3, 0)[0]);
}

TEST_CASE("ImageBuffer: shape validation") {
    CHECK_THROWS_AS(ImageBuffer(0, 3), ShapeMismatch);
    CHECK_THROWS_AS(ImageBuffer(2, 2, std::vector<std::uint8_t>(11)), ShapeMismatch);
}
