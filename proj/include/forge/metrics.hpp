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

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace forge {

struct FoldResult {
    int fold = 1;           // 1..k
    double loss = 0.0;      // nats
    double accuracy = 0.0;  // percent
};

struct RunSummary {
    double average_loss = 0.0;
    double average_accuracy = 0.0;  // percent
    double std_accuracy = 0.0;      // percent, population (divisor N)
};

// Arithmetic means and population standard deviation. Throws EmptyResults.
RunSummary fold_stats(std::span<const FoldResult> results);

// Population standard deviation of `values` (divisor N).
double population_std(std::span<const double> values);

struct EpochMetrics {
    int epoch = 1;  // 1-based
    double train_loss = 0.0;
    double train_accuracy = 0.0;       // fraction
    double validation_loss = 0.0;
    double validation_accuracy = 0.0;  // fraction
    long long train_samples = 0;
};

enum class StopReason { Completed, EarlyStop };

struct TrainRecord {
    std::vector<EpochMetrics> epochs;
    int stop_epoch = 0;
    StopReason stop_reason = StopReason::Completed;
};

// Index of the lowest validation loss, earliest on ties. Record must be non-empty.
std::size_t best_epoch_index(const TrainRecord& record);

// `epoch,train_loss,train_acc,val_loss,val_acc,best` with one row per epoch;
// `best` is 1 on the best-validation-loss epoch and 0 elsewhere.
std::string export_curves(const TrainRecord& record);

// Results of one (model, mode) k-fold run.
struct ModelRun {
    std::string model;  // e.g. "VGG16"
    std::string mode;   // "transfer" or "scratch"
    std::vector<FoldResult> folds;
    std::string footnote;  // printed under the table when non-empty
};

// `fold,loss,accuracy` with accuracy in percent.
std::string format_fold_results(std::span<const FoldResult> folds);
std::vector<FoldResult> parse_fold_results(std::string_view text);
// `statistic,value` rows for average_loss, average_accuracy, std_accuracy.
std::string format_summary_csv(const RunSummary& summary);
// Fold rows plus the three summary rows; losses to 3 decimals, accuracies to
// 3 decimals with a percent sign.
std::string format_markdown_table(const ModelRun& run);
// One row per run, side by side.
std::string format_comparison(std::span<const ModelRun> runs);

// Writes `<model>_<mode>.csv`, `<model>_<mode>_summary.csv` and
// `<model>_<mode>.md` per run plus `comparison.md`, and returns the written
// paths. Writes nothing for an empty list.
std::vector<std::filesystem::path> render_report(std::span<const ModelRun> runs, const std::filesystem::path& out_dir);

}  // namespace forge
