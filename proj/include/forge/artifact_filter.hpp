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
#include "forge/manifest.hpp"

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace forge {

// Contrast thresholds for the automatic pass. The blank-contrast cut sits
// well below the dark-side cuts so that faint fungal structure is routed to
// review rather than discarded.
struct FilterThresholds {
    double dark_mean = 0.12;
    double dark_p95 = 0.20;
    double blank_contrast = 0.06;
    double review_band = 0.04;

    // Throws ConfigError unless every field is in [0,1],
    // review_band < dark_mean and blank_contrast < dark_p95.
    void validate() const;

    friend bool operator==(const FilterThresholds&, const FilterThresholds&) = default;
};

struct PatchVerdict {
    Verdict verdict = Verdict::Keep;
    RegionStats stats;
};

// Decision on precomputed stats, evaluated in order:
//   1. RejectDark   if mean < dark_mean or p95 < dark_p95
//   2. RejectBlank  if michelson < blank_contrast
//   3. NeedsReview  if michelson < blank_contrast + review_band
//   4. Keep
Verdict classify_stats(const RegionStats& stats, const FilterThresholds& t) noexcept;
PatchVerdict classify_patch(const ImageBuffer& patch, const FilterThresholds& t);

struct FilterReportRow {
    std::string patch_id;
    Verdict verdict = Verdict::Keep;
    RegionStats stats;
};

struct FilterReport {
    std::vector<FilterReportRow> rows;  // sorted by patch_id
    std::array<int, kAllVerdicts.size()> counts{};

    int count(Verdict v) const noexcept { return counts[static_cast<std::size_t>(v)]; }
};

inline constexpr const char* kFilterReportHeader = "patch_id,verdict,mean,p05,p95,michelson";

std::string format_filter_report(const FilterReport& r);
FilterReport parse_filter_report(std::string_view text);

// Classifies every patch of `m` (reading `<patch_dir>/<id>.png`) and writes the
// verdicts back into the manifest. Manual verdicts are never overwritten; their
// rows are still measured so the report stays complete. Deterministic in patch
// id order regardless of `threads`. Throws MissingPatchFile.
FilterReport filter_run(Manifest& m, const std::filesystem::path& patch_dir,
                        const FilterThresholds& t, unsigned threads = 1);

struct LabeledStats {
    RegionStats stats;
    bool keep = false;
};

// F1 of automatic Keep against the human keep label.
double keep_f1(std::span<const LabeledStats> labeled, const FilterThresholds& t);

struct Calibration {
    FilterThresholds thresholds;
    double f1 = 0.0;
};

// Exhaustive 0.01-step search over dark_mean, dark_p95 and blank_contrast
// (review_band held at `review_band`) maximizing keep_f1. Ties go to the
// smallest rejection region: lowest dark_mean + dark_p95 + blank_contrast,
// then lexicographically smallest. Requires >= 2 labels of each kind
// (InsufficientLabels otherwise).
Calibration calibrate_thresholds(std::span<const LabeledStats> labeled,
                                 double review_band = FilterThresholds{}.review_band);
Calibration calibrate_thresholds(std::span<const std::pair<ImageBuffer, bool>> labeled,
                                 double review_band = FilterThresholds{}.review_band);

}  // namespace forge
