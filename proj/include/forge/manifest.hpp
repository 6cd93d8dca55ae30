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
#include "forge/labels.hpp"

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace forge {

struct ManifestRow {
    std::string patch_id;
    std::string source_image;
    ClassLabel label = ClassLabel::TSH;
    Verdict verdict = Verdict::Keep;
    Split split = Split::Unassigned;
    std::optional<int> fold;

    friend bool operator==(const ManifestRow&, const ManifestRow&) = default;
};

// Canonical record of every patch. Rows are kept sorted by patch_id and ids
// are unique; `sort_and_validate` enforces both.
struct Manifest {
    std::vector<ManifestRow> rows;

    void sort_and_validate();
    const ManifestRow* find(std::string_view patch_id) const;
    ManifestRow* find(std::string_view patch_id);
    std::size_t eligible_count() const;

    friend bool operator==(const Manifest&, const Manifest&) = default;
};

inline constexpr const char* kManifestHeader = "patch_id,source_image,class,verdict,split,fold";

std::string format_manifest(const Manifest& m);
Manifest parse_manifest(std::string_view text);
Manifest read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const Manifest& m);

// source image file name -> class, read from a `source_image,class` CSV.
using SourceLabels = std::map<std::string, ClassLabel>;
SourceLabels read_source_labels(const std::filesystem::path& path);
void write_source_labels(const std::filesystem::path& path, const SourceLabels& labels);

// Raw labelled-image counts per class of the original curated corpus.
inline constexpr std::array<int, kNumClasses> kReferenceRawCounts = {227, 117, 36, 144, 75};

// Number of labelled source images per class.
std::array<int, kNumClasses> label_inventory(const SourceLabels& labels);

struct FilterReport;

// One row per `<patch_id>.png` in `patch_dir`, sorted by id. The source image
// of a patch is resolved by stripping the `_r<row>_c<col>` suffix and matching
// the stem against the label table. Verdicts come from `report` when given,
// otherwise Keep. Throws UnlabeledSource and DuplicatePatchId.
Manifest build_manifest(const std::filesystem::path& patch_dir, const SourceLabels& labels,
                        const FilterReport* report = nullptr);

// Strips the grid suffix from a patch id: "img042_r7_c10" -> "img042".
std::optional<std::string> source_stem_of(std::string_view patch_id);

std::filesystem::path patch_path(const std::filesystem::path& patch_dir, std::string_view patch_id);

}  // namespace forge
