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

#include <string>
#include <string_view>
#include <vector>

namespace forge {

// Square-patch grid over one image. Each axis of length D gets ceil(D/P)
// positions at min(i*P, D-P), so the last patch is anchored to the image edge
// and overlaps its neighbour when P does not divide D. An axis shorter than P
// gets a single position and the image is reflect-padded up to P.
struct GridPlan {
    int source_width = 0;
    int source_height = 0;
    int patch_size = 0;
    int rows = 0;
    int cols = 0;
    int pad_right = 0;
    int pad_bottom = 0;
    std::vector<Rect> rects;  // row-major, coordinates in the padded image

    int padded_width() const noexcept { return source_width + pad_right; }
    int padded_height() const noexcept { return source_height + pad_bottom; }
};

struct Patch {
    int row = 0;
    int col = 0;
    Rect rect;
    ImageBuffer image;
};

// Requires width, height, patch_size >= 1 (ShapeMismatch otherwise).
GridPlan plan_grid(int width, int height, int patch_size);

// One patch per rect, in plan order. Throws PlanMismatch if the plan was made
// for different dimensions.
std::vector<Patch> extract_patches(const ImageBuffer& img, const GridPlan& plan);

// "<source-stem>_r<row>_c<col>", e.g. ("img042.jpg", 7, 10) -> "img042_r7_c10".
std::string patch_id(std::string_view source_name, int row, int col);

}  // namespace forge
