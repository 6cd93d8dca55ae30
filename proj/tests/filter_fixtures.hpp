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

#include "forge/artifact_filter.hpp"
#include "test_util.hpp"

#include <algorithm>
#include <utility>
#include <vector>

namespace forge::test {

// Keep iff not dark, and contrast clears blank threshold plus review band.
inline bool oracle_keep(const RegionStats& s, double dm, double dp, double bc, double rb) {
    if (s.mean < dm || s.p95 < dp) return false;
    return s.michelson >= bc + rb;
}

inline double oracle_f1(const std::vector<LabeledStats>& set, double dm, double dp, double bc, double rb) {
    int tp = 0, fp = 0, fn = 0;
    for (const auto& l : set) {
        const bool k = oracle_keep(l.stats, dm, dp, bc, rb);
        if (k && l.keep) ++tp;
        else if (k && !l.keep) ++fp;
        else if (!k && l.keep) ++fn;
    }
    return tp == 0 ? 0.0 : 2.0 * tp / (2.0 * tp + fp + fn);
}

// Best F1 over every valid threshold triple on the 0.01 grid.
inline double brute_force_best_f1(const std::vector<LabeledStats>& set, double rb) {
    double best = 0.0;
    for (int i = 0; i <= 100; ++i) {
        const double dm = i / 100.0;
        if (!(rb < dm)) continue;
        for (int j = 0; j <= 100; ++j) {
            for (int k = 0; k < j; ++k) best = std::max(best, oracle_f1(set, dm, j / 100.0, k / 100.0, rb));
        }
    }
    return best;
}

inline ImageBuffer stripes(int size, std::uint8_t lo, std::uint8_t hi) {
    ImageBuffer img(size, size);
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            const std::uint8_t v = (x / 2) % 2 ? hi : lo;
            auto* p = img.pixel(x, y);
            p[0] = p[1] = p[2] = v;
        }
    }
    return img;
}

// 8 textured keeps against dark frames, flat fields and low-contrast haze.
inline std::vector<std::pair<ImageBuffer, bool>> calibration_set() {
    std::vector<std::pair<ImageBuffer, bool>> patches;
    const std::uint8_t keep_levels[8][2] = {{20, 230}, {60, 200}, {40, 120}, {90, 250},
                                            {5, 45},   {100, 180}, {50, 160}, {70, 140}};
    for (const auto& kl : keep_levels) patches.push_back({stripes(24, kl[0], kl[1]), true});
    for (std::uint8_t v : {0, 8, 15, 22}) patches.push_back({solid(24, 24, v, v, v), false});
    for (std::uint8_t v : {200, 230, 250, 160}) patches.push_back({solid(24, 24, v, v, v), false});
    const std::uint8_t haze[4][2] = {{200, 215}, {180, 190}, {150, 190}, {230, 245}};
    for (const auto& h : haze) patches.push_back({stripes(24, h[0], h[1]), false});
    return patches;
}

inline std::vector<LabeledStats> measure(const std::vector<std::pair<ImageBuffer, bool>>& patches) {
    std::vector<LabeledStats> set;
    for (const auto& [img, keep] : patches) set.push_back({region_stats(to_luminance(img)), keep});
    return set;
}

}  // namespace forge::test
