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

#include "forge/patcher.hpp"

#include "forge/errors.hpp"

#include <algorithm>
#include <filesystem>

namespace forge {

namespace {

std::vector<int> axis_offsets(int length, int patch) {
    if (length <= patch) return {0};
    const int n = (length + patch - 1) / patch;
    std::vector<int> offsets(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) offsets[static_cast<std::size_t>(i)] = std::min(i * patch, length - patch);
    return offsets;
}

}  // namespace

GridPlan plan_grid(int width, int height, int patch_size) {
    if (width < 1 || height < 1 || patch_size < 1) {
        throw ShapeMismatch("plan_grid needs positive width, height and patch size");
    }
    GridPlan plan;
    plan.source_width = width;
    plan.source_height = height;
    plan.patch_size = patch_size;
    plan.pad_right = std::max(0, patch_size - width);
    plan.pad_bottom = std::max(0, patch_size - height);

    const auto xs = axis_offsets(width, patch_size);
    const auto ys = axis_offsets(height, patch_size);
    plan.cols = static_cast<int>(xs.size());
    plan.rows = static_cast<int>(ys.size());
    plan.rects.reserve(xs.size() * ys.size());
    for (int y : ys) {
        for (int x : xs) plan.rects.push_back(Rect{x, y, patch_size, patch_size});
    }
    return plan;
}

std::vector<Patch> extract_patches(const ImageBuffer& img, const GridPlan& plan) {
    if (img.width() != plan.source_width || img.height() != plan.source_height) {
        throw PlanMismatch("plan is for " + std::to_string(plan.source_width) + "x" +
                           std::to_string(plan.source_height) + " but image is " +
                           std::to_string(img.width()) + "x" + std::to_string(img.height()));
    }
    const bool padded = plan.pad_right > 0 || plan.pad_bottom > 0;
    const ImageBuffer padded_img =
        padded ? reflect_pad(img, plan.padded_width(), plan.padded_height()) : ImageBuffer{};
    const ImageBuffer& src = padded ? padded_img : img;

    std::vector<Patch> patches;
    patches.reserve(plan.rects.size());
    for (std::size_t i = 0; i < plan.rects.size(); ++i) {
        const int row = static_cast<int>(i) / plan.cols;
        const int col = static_cast<int>(i) % plan.cols;
        patches.push_back(Patch{row, col, plan.rects[i], crop(src, plan.rects[i])});
    }
    return patches;
}

std::string patch_id(std::string_view source_name, int row, int col) {
    const std::string stem = std::filesystem::path(source_name).stem().string();
    return stem + "_r" + std::to_string(row) + "_c" + std::to_string(col);
}

}  // namespace forge
