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
#include "forge/manifest.hpp"
#include "forge/rng.hpp"

#include <cstdlib>
#include <filesystem>
#include <string>

namespace forge::test {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir() {
        std::string templ = (std::filesystem::temp_directory_path() / "forge-test-XXXXXX").string();
        if (!::mkdtemp(templ.data())) throw std::runtime_error("mkdtemp failed");
        path_ = templ;
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline ImageBuffer solid(int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    ImageBuffer img(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            auto* p = img.pixel(x, y);
            p[0] = r;
            p[1] = g;
            p[2] = b;
        }
    }
    return img;
}

inline ImageBuffer checkerboard(int size, int cell, std::uint8_t lo = 0, std::uint8_t hi = 255) {
    ImageBuffer img(size, size);
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            const std::uint8_t v = ((x / cell + y / cell) % 2) ? hi : lo;
            auto* p = img.pixel(x, y);
            p[0] = p[1] = p[2] = v;
        }
    }
    return img;
}

inline ImageBuffer noise_image(int w, int h, std::uint64_t seed) {
    ImageBuffer img(w, h);
    Xoshiro256 rng(seed);
    for (auto& v : img.data()) v = static_cast<std::uint8_t>(rng.below(256));
    return img;
}

// Manifest of `per_class[c]` eligible rows per class, `per_source` patches
// per source image, ids "<class>s<source>_r0_c<i>".
inline Manifest synthetic_manifest(const std::array<int, kNumClasses>& per_class, int per_source = 4) {
    Manifest m;
    for (ClassLabel c : kAllClasses) {
        const int n = per_class[static_cast<std::size_t>(c)];
        for (int i = 0; i < n; ++i) {
            ManifestRow row;
            const std::string src = std::string(to_string(c)) + "s" + std::to_string(i / per_source);
            row.patch_id = src + "_r0_c" + std::to_string(i % per_source);
            row.source_image = src + ".jpg";
            row.label = c;
            m.rows.push_back(row);
        }
    }
    m.sort_and_validate();
    return m;
}

}  // namespace forge::test
