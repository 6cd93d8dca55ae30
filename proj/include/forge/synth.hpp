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

#include <cstdint>
#include <filesystem>

namespace forge {

// Procedural stand-in for a labelled microscopy corpus: one pale background
// hue and one foreground texture per class, plus the two artifact kinds the
// filter exists for.
struct SynthOptions {
    int images_per_class = 6;
    int width = 1000;
    int height = 750;
    std::uint64_t seed = 0;
    int jpeg_quality = 92;
};

enum class SynthArtifact {
    None,
    LensContour,  // circular field of view, black outside
    BlankCorner,  // bottom-right cell flat white, bottom-left cell faint
};

// Which artifact image `index` of a class carries: none, lens, blank, repeating.
SynthArtifact synth_artifact_for(int index) noexcept;

ImageBuffer synth_image(ClassLabel label, int width, int height, SynthArtifact artifact, std::uint64_t seed);

// Writes `<dir>/<class>_<nn>.jpg` for every class and image plus
// `<dir>/labels.csv`, and returns the label table.
SourceLabels write_synthetic_corpus(const std::filesystem::path& dir, const SynthOptions& options);

}  // namespace forge
