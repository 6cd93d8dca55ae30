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

#include "forge/manifest.hpp"

#include <filesystem>

namespace forge {

// Cuts every labelled image of `input_dir` into `<output_dir>/<patch_id>.png`
// and returns the initial manifest (all verdicts Keep, nothing assigned).
// Sources are processed in label-table order; `threads` workers share them.
// Throws IoError for a labelled file that is missing and DecodeError for one
// that cannot be read.
Manifest patch_corpus(const std::filesystem::path& input_dir, const SourceLabels& labels,
                      const std::filesystem::path& output_dir, int patch_size, unsigned threads = 1);

}  // namespace forge
