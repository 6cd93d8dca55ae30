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

#include <algorithm>
#include <cmath>
#include <string>

namespace forge {

ImageBuffer::ImageBuffer(int width, int height) : width_(width), height_(height) {
    if (width < 1 || height < 1) {
        throw ShapeMismatch("image dimensions must be >= 1, got " + std::to_string(width) + "x" +
                            std::to_string(height));
    }
    data_.assign(static_cast<std::size_t>(width) * height * kChannels, 0);
}

ImageBuffer::ImageBuffer(int width, int height, std::vector<std::uint8_t> data)
    : width_(width), height_(height), data_(std::move(data)) {
    if (width < 1 || height < 1 ||
        data_.size() != static_cast<std::size_t>(width) * height * kChannels) {
        throw ShapeMismatch("image buffer size does not match " + std::to_string(width) + "x" +
                            std::to_string(height) + "x3");
    }
}

LuminancePlane to_luminance(const ImageBuffer& img) {
    LuminancePlane plane;
    plane.width = img.width();
    plane.height = img.height();
    const auto px = img.data();
    plane.data.resize(static_cast<std::size_t>(img.width()) * img.height());
    for (std::size_t i = 0; i < plane.data.size(); ++i) {
        // Integer weights keep black and white exact.
        const int y = 299 * px[i * 3] + 587 * px[i * 3 + 1] + 114 * px[i * 3 + 2];
        plane.data[i] = static_cast<double>(y) / 255000.0;
    }
    return plane;
}

double nearest_rank(std::span<const double> sorted, double q) {
    const auto n = static_cast<long>(sorted.size());
    long index = static_cast<long>(std::floor(q * static_cast<double>(n) / 100.0 + 1e-9));
    index = std::clamp(index, 0L, n - 1);
    return sorted[static_cast<std::size_t>(index)];
}

RegionStats region_stats(const LuminancePlane& plane, const Rect& rect) {
    if (rect.w < 1 || rect.h < 1 || rect.x < 0 || rect.y < 0 || rect.x + rect.w > plane.width ||
        rect.y + rect.h > plane.height) {
        throw RectOutOfBounds("rect (" + std::to_string(rect.x) + "," + std::to_string(rect.y) +
                              "," + std::to_string(rect.w) + "," + std::to_string(rect.h) +
                              ") outside " + std::to_string(plane.width) + "x" +
                              std::to_string(plane.height));
    }
    std::vector<double> samples;
    samples.reserve(static_cast<std::size_t>(rect.w) * rect.h);
    double sum = 0.0;
    for (int y = rect.y; y < rect.y + rect.h; ++y) {
        for (int x = rect.x; x < rect.x + rect.w; ++x) {
            const double v = plane.at(x, y);
            samples.push_back(v);
            sum += v;
        }
    }
    std::sort(samples.begin(), samples.end());

    RegionStats s;
    s.min = samples.front();
    s.max = samples.back();
    s.mean = std::clamp(sum / static_cast<double>(samples.size()), s.min, s.max);
    s.p05 = nearest_rank(samples, 5.0);
    s.p95 = nearest_rank(samples, 95.0);
    s.michelson = (s.p95 - s.p05) / (s.p95 + s.p05 + RegionStats::kMichelsonEpsilon);
    return s;
}

RegionStats region_stats(const LuminancePlane& plane) {
    return region_stats(plane, Rect{0, 0, plane.width, plane.height});
}

ImageBuffer resize_bilinear(const ImageBuffer& img, int width, int height) {
    if (width < 1 || height < 1) throw ShapeMismatch("resize target must be >= 1x1");
    if (width == img.width() && height == img.height()) return img;

    struct Tap {
        int i0, i1;
        double f;
    };
    auto taps = [](int src, int dst) {
        std::vector<Tap> t(static_cast<std::size_t>(dst));
        const double scale = static_cast<double>(src) / dst;
        for (int i = 0; i < dst; ++i) {
            double s = (i + 0.5) * scale - 0.5;
            s = std::clamp(s, 0.0, static_cast<double>(src - 1));
            const int i0 = static_cast<int>(std::floor(s));
            const int i1 = std::min(i0 + 1, src - 1);
            t[static_cast<std::size_t>(i)] = {i0, i1, s - i0};
        }
        return t;
    };
    const auto xt = taps(img.width(), width);
    const auto yt = taps(img.height(), height);

    ImageBuffer out(width, height);
    for (int y = 0; y < height; ++y) {
        const Tap& ty = yt[static_cast<std::size_t>(y)];
        for (int x = 0; x < width; ++x) {
            const Tap& tx = xt[static_cast<std::size_t>(x)];
            const std::uint8_t* p00 = img.pixel(tx.i0, ty.i0);
            const std::uint8_t* p01 = img.pixel(tx.i1, ty.i0);
            const std::uint8_t* p10 = img.pixel(tx.i0, ty.i1);
            const std::uint8_t* p11 = img.pixel(tx.i1, ty.i1);
            std::uint8_t* dst = out.pixel(x, y);
            for (int c = 0; c < 3; ++c) {
                const double top = p00[c] + (p01[c] - p00[c]) * tx.f;
                const double bottom = p10[c] + (p11[c] - p10[c]) * tx.f;
                const double v = top + (bottom - top) * ty.f;
                dst[c] = static_cast<std::uint8_t>(std::clamp(std::round(v), 0.0, 255.0));
            }
        }
    }
    return out;
}

ImageBuffer crop(const ImageBuffer& img, const Rect& rect) {
    if (rect.w < 1 || rect.h < 1 || rect.x < 0 || rect.y < 0 || rect.x + rect.w > img.width() ||
        rect.y + rect.h > img.height()) {
        throw RectOutOfBounds("crop rect outside image");
    }
    ImageBuffer out(rect.w, rect.h);
    const std::size_t row_bytes = static_cast<std::size_t>(rect.w) * 3;
    for (int y = 0; y < rect.h; ++y) {
        std::copy_n(img.pixel(rect.x, rect.y + y), row_bytes, out.pixel(0, y));
    }
    return out;
}

namespace {

// Index into [0, n) under mirror reflection without edge repetition.
int reflect_index(int i, int n) {
    if (n == 1) return 0;
    const int period = 2 * (n - 1);
    i %= period;
    if (i < 0) i += period;
    return i < n ? i : period - i;
}

}  // namespace

ImageBuffer reflect_pad(const ImageBuffer& img, int width, int height) {
    if (width < img.width() || height < img.height()) {
        throw ShapeMismatch("reflect_pad target smaller than image");
    }
    if (width == img.width() && height == img.height()) return img;
    ImageBuffer out(width, height);
    for (int y = 0; y < height; ++y) {
        const int sy = reflect_index(y, img.height());
        for (int x = 0; x < width; ++x) {
            const int sx = reflect_index(x, img.width());
            std::copy_n(img.pixel(sx, sy), 3, out.pixel(x, y));
        }
    }
    return out;
}

}  // namespace forge
