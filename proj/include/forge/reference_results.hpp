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

#include "forge/metrics.hpp"

#include <array>
#include <span>
#include <string>
#include <vector>

namespace forge {

// Published 10-fold test results for the three backbones, as printed:
// per-fold loss and accuracy (percent) plus the printed aggregate rows.
struct PublishedColumn {
    const char* model;
    const char* mode;
    std::array<double, 10> losses;
    std::array<double, 10> accuracies;
    double printed_average_loss;
    double printed_average_accuracy;
    double printed_std_accuracy;
};

// Six columns: transfer {ResNet50, VGG16, InceptionV3}, then scratch in the
// same order.
std::span<const PublishedColumn> published_columns();

struct ColumnCheck {
    const PublishedColumn* column = nullptr;
    RunSummary recomputed;
    bool loss_matches = false;
    bool accuracy_matches = false;
    bool std_matches = false;
};

struct ConsistencyReport {
    double tolerance = 0.001;
    std::vector<ColumnCheck> columns;
    // Pairs (i, j) of columns in the same mode whose printed average
    // accuracies match each other's recomputed values.
    std::vector<std::pair<std::size_t, std::size_t>> swapped_accuracy;
    std::vector<std::string> notes;

    // Every printed aggregate either matches its own recomputation or is
    // explained by a detected swap.
    bool consistent_up_to_swaps() const;
};

// Recomputes every aggregate from the fold values (population std) and
// compares with the printed rows at `tolerance`.
ConsistencyReport check_published_tables(double tolerance = 0.001);

// The published folds as report inputs; aggregates are always recomputed,
// and runs affected by a detected swap carry a footnote.
std::vector<ModelRun> published_runs();

}  // namespace forge
