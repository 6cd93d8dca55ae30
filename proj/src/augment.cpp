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

#include "forge/augment.hpp"

#include "forge/errors.hpp"

#include <algorithm>
#include <cmath>

namespace forge {

void AugmentPolicy::validate() const {
    if (!(horizontal_flip >= 0.0 && horizontal_flip <= 1.0) || !(vertical_flip >= 0.0 && vertical_flip <= 1.0)) {
        throw ConfigError("flip probabilities must be in [0,1]");
    }
    if (!(brightness_jitter >= 0.0 && brightness_jitter <= 0.5)) {
        throw ConfigError("brightness_jitter must be in [0,0.5]");
    }
}

AugmentDraw draw_augmentation(const AugmentPolicy& policy, Xoshiro256& stream) {
    AugmentDraw d;
    const double u_h = stream.uniform();
    const double u_v = stream.uniform();
    const std::uint64_t turns = stream.below(4);
    const double u_b = stream.uniform();
    d.hflip = u_h < policy.horizontal_flip;
    d.vflip = u_v < policy.vertical_flip;
    d.quarter_turns = policy.rotation ? static_cast<int>(turns) : 0;
    d.brightness = policy.brightness_jitter * (2.0 * u_b - 1.0);
    return d;
}

ImageBuffer flip_horizontal(const ImageBuffer& img) {
    ImageBuffer out(img.width(), img.height());
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) std::copy_n(img.pixel(img.width() - 1 - x, y), 3, out.pixel(x, y));
    }
    return out;
}

ImageBuffer flip_vertical(const ImageBuffer& img) {
    ImageBuffer out(img.width(), img.height());
    for (int y = 0; y < img.height(); ++y) {
        std::copy_n(img.pixel(0, img.height() - 1 - y), static_cast<std::size_t>(img.width()) * 3, out.pixel(0, y));
    }
    return out;
}

ImageBuffer rotate_quarter_turns(const ImageBuffer& img, int turns) {
    turns = ((turns % 4) + 4) % 4;
    if (turns == 0) return img;
    const int w = img.width();
    const int h = img.height();
    const bool swap = turns % 2 == 1;
    ImageBuffer out(swap ? h : w, swap ? w : h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            int dx = 0, dy = 0;
            switch (turns) {
                case 1: dx = h - 1 - y; dy = x; break;          // 90 degrees clockwise
                case 2: dx = w - 1 - x; dy = h - 1 - y; break;  // 180
                default: dx = y; dy = w - 1 - x; break;         // 270
            }
            std::copy_n(img.pixel(x, y), 3, out.pixel(dx, dy));
        }
    }
    return out;
}

ImageBuffer shift_brightness(const ImageBuffer& img, double delta) {
    if (delta == 0.0) return img;
    ImageBuffer out = img;
    const double shift = delta * 255.0;
    for (auto& v : out.data()) v = static_cast<std::uint8_t>(std::clamp(std::round(v + shift), 0.0, 255.0));
    return out;
}

ImageBuffer apply_augmentation(const ImageBuffer& patch, const AugmentDraw& draw) {
    ImageBuffer out = draw.hflip ? flip_horizontal(patch) : patch;
    if (draw.vflip) out = flip_vertical(out);
    if (draw.quarter_turns) out = rotate_quarter_turns(out, draw.quarter_turns);
    return shift_brightness(out, draw.brightness);
}

ImageBuffer augment(const ImageBuffer& patch, const AugmentPolicy& policy, Xoshiro256& stream) {
    if (patch.width() != patch.height()) throw ShapeMismatch("augment expects a square patch");
    return apply_augmentation(patch, draw_augmentation(policy, stream));
}

}  // namespace forge
