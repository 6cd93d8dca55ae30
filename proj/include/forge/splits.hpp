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

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace forge {

// Train/validation/test shares in thousandths of a percent, so that ratios
// like 76.5/13.5/10 are exact integers summing to 100000.
struct SplitRatios {
    static constexpr std::int64_t kWhole = 100000;
    std::array<std::int64_t, 3> parts{85000, 15000, 0};

    // Parses "76.5,13.5,10" or "85,15". Up to three decimals per part.
    // Throws ConfigError for malformed input or a sum other than 100.
    static SplitRatios parse(std::string_view text);
    double percent(std::size_t part) const { return static_cast<double>(parts[part]) / 1000.0; }
    friend bool operator==(const SplitRatios&, const SplitRatios&) = default;
};

struct SplitOptions {
    std::uint64_t seed = 0;
    // Subsample at most this many eligible rows per class before splitting.
    std::optional<int> per_class_cap;
    // Allocate whole source images instead of individual patches.
    bool group_by_source = false;
    friend bool operator==(const SplitOptions&, const SplitOptions&) = default;
};

// Partition of a population of eligible rows into train/validation/test.
struct SplitAssignment {
    SplitRatios ratios;
    SplitOptions options;
    std::vector<std::string> population;  // sorted ids the split covers
    std::array<std::vector<std::string>, 3> sets;  // train, validation, test; each sorted
    std::array<std::array<int, 3>, kNumClasses> class_counts{};  // rows per class and set

    friend bool operator==(const SplitAssignment&, const SplitAssignment&) = default;
};

struct FoldSets {
    std::array<std::vector<std::string>, 3> sets;  // train, validation, test
};

struct FoldPlan {
    int k = 0;
    SplitRatios trainval;  // train/validation ratio inside each fold's non-test rows
    SplitOptions options;
    std::vector<std::string> population;
    std::vector<FoldSets> folds;

    friend bool operator==(const FoldPlan& a, const FoldPlan& b) {
        if (a.k != b.k || a.population != b.population || a.folds.size() != b.folds.size()) return false;
        for (std::size_t i = 0; i < a.folds.size(); ++i) {
            if (a.folds[i].sets != b.folds[i].sets) return false;
        }
        return true;
    }
};

// Per class: seeded shuffle of the eligible rows, then counts by
// largest-remainder rounding of ratio x class size. Ties between equal
// remainders go to the part furthest behind its overall target, which keeps
// the pooled totals within one row of the pooled ratio. Throws EmptyClass
// when a class present in the manifest has fewer eligible units than
// nonzero ratio parts.
SplitAssignment holdout_split(const Manifest& m, const SplitRatios& ratios, const SplitOptions& options);

// Stratified k-fold: per class, seeded shuffle then round-robin deal into k
// buckets (dealing continues across classes). Fold i tests on bucket i and
// splits the rest train/validation by `validation_fraction`. Throws
// ClassSmallerThanK.
FoldPlan kfold_plan(const Manifest& m, int k, double validation_fraction, const SplitOptions& options);

struct VerificationReport {
    std::vector<std::string> violations;
    bool ok() const noexcept { return violations.empty(); }
};

// Disjointness, coverage of the population, stratification within one unit
// (row, or source image when grouped) of the configured ratio, and for fold
// plans the partition law over test sets. Violations are listed as
// "overlap: <id>", "uncovered: <id>", "ineligible: <id>", "stratification: ...",
// "leakage: <source>".
VerificationReport verify_split(const Manifest& m, const SplitAssignment& a);
VerificationReport verify_split(const Manifest& m, const FoldPlan& plan);

// Manifest with the split column set from `sets` (others unassigned) and
// `fold` set to `fold_index` for rows in the population, when given.
Manifest apply_sets(const Manifest& m, const std::array<std::vector<std::string>, 3>& sets,
                    std::optional<int> fold_index = std::nullopt);

// Writes <dir>/fold_<i>.csv for each fold in manifest format; the fold
// column records each row's test bucket.
void write_fold_plan(const std::filesystem::path& dir, const Manifest& m, const FoldPlan& plan);
// Reads back a plan directory as per-fold manifests.
std::vector<Manifest> read_fold_plan(const std::filesystem::path& dir);

}  // namespace forge
