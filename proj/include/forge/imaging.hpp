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

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace forge {

// Axis-aligned pixel rectangle.
struct Rect {
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;

    friend bool operator==(const Rect&, const Rect&) = default;
};

// Interleaved 8-bit RGB image, row-major.
class ImageBuffer {
public:
    static constexpr int kChannels = 3;

    ImageBuffer() = default;
    // Throws ShapeMismatch if either dimension is < 1.
    ImageBuffer(int width, int height);
    // Throws ShapeMismatch if data.size() != width * height * 3.
    ImageBuffer(int width, int height, std::vector<std::uint8_t> data);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    bool empty() const noexcept { return data_.empty(); }

    std::span<const std::uint8_t> data() const noexcept { return data_; }
    std::span<std::uint8_t> data() noexcept { return data_; }

    std::uint8_t* pixel(int x, int y) noexcept {
        return data_.data() + (static_cast<std::size_t>(y) * width_ + x) * kChannels;
    }
    const std::uint8_t* pixel(int x, int y) const noexcept {
        return data_.data() + (static_cast<std::size_t>(y) * width_ + x) * kChannels;
    }

    friend bool operator==(const ImageBuffer&, const ImageBuffer&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> data_;
};

// Single-channel luminance in [0, 1], same geometry as its source image.
struct LuminancePlane {
    int width = 0;
    int height = 0;
    std::vector<double> data;

    double at(int x, int y) const noexcept {
        return data[static_cast<std::size_t>(y) * width + x];
    }
};

// Summary of a region's luminance. `michelson` is computed on the 5th and
// 95th percentiles: (p95 - p05) / (p95 + p05 + kMichelsonEpsilon).
struct RegionStats {
    static constexpr double kMichelsonEpsilon = 1e-6;

    double mean = 0.0;
    double min = 0.0;
    double max = 0.0;
    double p05 = 0.0;
    double p95 = 0.0;
    double michelson = 0.0;
};

// Decodes a JPEG or PNG stream to RGB. Gray is replicated, alpha dropped.
// Throws DecodeError on corrupt, truncated, or unrecognized input.
ImageBuffer decode_image(std::span<const std::uint8_t> bytes);
ImageBuffer read_image(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_png(const ImageBuffer& img);
std::vector<std::uint8_t> encode_jpeg(const ImageBuffer& img, int quality = 95);
void write_png(const ImageBuffer& img, const std::filesystem::path& path);
void write_jpeg(const ImageBuffer& img, const std::filesystem::path& path, int quality = 95);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

// Rec.601 luma, (0.299 R + 0.587 G + 0.114 B) / 255.
LuminancePlane to_luminance(const ImageBuffer& img);

// Exact min/max/mean and nearest-rank p05/p95 over `rect`.
// Throws RectOutOfBounds unless the rect lies inside the plane.
RegionStats region_stats(const LuminancePlane& plane, const Rect& rect);
RegionStats region_stats(const LuminancePlane& plane);

// Nearest-rank percentile of an ascending-sorted sample: the element at
// zero-based index floor(q * n / 100), clamped to [0, n-1]. On a 100-sample
// ramp 0.00..0.99 this gives p05 = 0.05 and p95 = 0.95.
double nearest_rank(std::span<const double> sorted, double q);

// Bilinear resize with half-pixel-center sampling and edge clamping.
// Output samples are rounded half away from zero.
ImageBuffer resize_bilinear(const ImageBuffer& img, int width, int height);

// Crop of `rect`; throws RectOutOfBounds if it leaves the image.
ImageBuffer crop(const ImageBuffer& img, const Rect& rect);

// Mirror padding (edge pixel not repeated) up to the requested size.
ImageBuffer reflect_pad(const ImageBuffer& img, int width, int height);

}  // namespace forge
