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

#include "forge/imaging.hpp"
#include "forge/rng.hpp"

namespace forge {

// Label-preserving train-time augmentation. Microscopy patches have no
// canonical orientation, so flips and right-angle rotations are safe.
struct AugmentPolicy {
    double horizontal_flip = 0.5;
    double vertical_flip = 0.5;
    bool rotation = true;            // uniform choice of 0/90/180/270 degrees
    double brightness_jitter = 0.05;  // max |delta| in luminance units

    // Throws ConfigError for probabilities outside [0,1] or jitter outside [0,0.5].
    void validate() const;

    static AugmentPolicy identity() { return {0.0, 0.0, false, 0.0}; }
};

// The concrete choices drawn for one augmentation.
struct AugmentDraw {
    bool hflip = false;
    bool vflip = false;
    int quarter_turns = 0;  // clockwise
    double brightness = 0.0;
};

// Always consumes exactly four values from the stream, whatever the policy,
// so substreams stay aligned across policies.
AugmentDraw draw_augmentation(const AugmentPolicy& policy, Xoshiro256& stream);

ImageBuffer flip_horizontal(const ImageBuffer& img);
ImageBuffer flip_vertical(const ImageBuffer& img);
ImageBuffer rotate_quarter_turns(const ImageBuffer& img, int turns);
// Adds delta * 255 to every channel, rounded and clamped to [0, 255].
ImageBuffer shift_brightness(const ImageBuffer& img, double delta);

ImageBuffer apply_augmentation(const ImageBuffer& patch, const AugmentDraw& draw);

// Requires a square patch (ShapeMismatch otherwise).
ImageBuffer augment(const ImageBuffer& patch, const AugmentPolicy& policy, Xoshiro256& stream);

}  // namespace forge
