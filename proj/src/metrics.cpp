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

#include "forge/metrics.hpp"

#include "forge/csv.hpp"
#include "forge/errors.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace forge {

namespace {

std::string fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    return buf;
}

double parse_double(const std::string& s, const char* what) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw FormatError(std::string("bad ") + what + " '" + s + "'");
    }
}

}  // namespace

double population_std(std::span<const double> values) {
    if (values.empty()) throw EmptyResults("no values");
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / static_cast<double>(values.size()));
}

RunSummary fold_stats(std::span<const FoldResult> results) {
    if (results.empty()) throw EmptyResults("fold_stats needs at least one fold result");
    RunSummary s;
    std::vector<double> acc;
    acc.reserve(results.size());
    for (const auto& r : results) {
        s.average_loss += r.loss;
        s.average_accuracy += r.accuracy;
        acc.push_back(r.accuracy);
    }
    s.average_loss /= static_cast<double>(results.size());
    s.average_accuracy /= static_cast<double>(results.size());
    s.std_accuracy = population_std(acc);
    return s;
}

std::size_t best_epoch_index(const TrainRecord& record) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < record.epochs.size(); ++i) {
        if (record.epochs[i].validation_loss < record.epochs[best].validation_loss) best = i;
    }
    return best;
}

std::string export_curves(const TrainRecord& record) {
    csv::Table t;
    t.header = {"epoch", "train_loss", "train_acc", "val_loss", "val_acc", "best"};
    const std::size_t best = record.epochs.empty() ? 0 : best_epoch_index(record);
    for (std::size_t i = 0; i < record.epochs.size(); ++i) {
        const auto& e = record.epochs[i];
        t.rows.push_back({std::to_string(e.epoch), fixed(e.train_loss, 6), fixed(e.train_accuracy, 6),
                          fixed(e.validation_loss, 6), fixed(e.validation_accuracy, 6), i == best ? "1" : "0"});
    }
    return csv::format(t);
}

std::string format_fold_results(std::span<const FoldResult> folds) {
    csv::Table t;
    t.header = {"fold", "loss", "accuracy"};
    for (const auto& f : folds) t.rows.push_back({std::to_string(f.fold), fixed(f.loss, 6), fixed(f.accuracy, 6)});
    return csv::format(t);
}

std::vector<FoldResult> parse_fold_results(std::string_view text) {
    const auto t = csv::parse(text);
    if (t.header != std::vector<std::string>{"fold", "loss", "accuracy"}) {
        throw FormatError("fold results header must be 'fold,loss,accuracy'");
    }
    std::vector<FoldResult> out;
    for (const auto& row : t.rows) {
        FoldResult f;
        f.fold = static_cast<int>(parse_double(row[0], "fold"));
        f.loss = parse_double(row[1], "loss");
        f.accuracy = parse_double(row[2], "accuracy");
        out.push_back(f);
    }
    return out;
}

std::string format_summary_csv(const RunSummary& s) {
    csv::Table t;
    t.header = {"statistic", "value"};
    t.rows = {{"average_loss", fixed(s.average_loss, 6)},
              {"average_accuracy", fixed(s.average_accuracy, 6)},
              {"std_accuracy", fixed(s.std_accuracy, 6)}};
    return csv::format(t);
}

std::string format_markdown_table(const ModelRun& run) {
    const RunSummary s = fold_stats(run.folds);
    std::ostringstream out;
    out << "### " << run.model << " (" << run.mode << ")\n\n";
    out << "| Fold | Loss | Accuracy |\n|---:|---:|---:|\n";
    for (const auto& f : run.folds) {
        out << "| " << f.fold << " | " << fixed(f.loss, 3) << " | " << fixed(f.accuracy, 3) << "% |\n";
    }
    out << "| Average Loss | " << fixed(s.average_loss, 3) << " | |\n";
    out << "| Average Accuracy | | " << fixed(s.average_accuracy, 3) << "% |\n";
    out << "| Standard Deviation | | " << fixed(s.std_accuracy, 3) << "% |\n";
    if (!run.footnote.empty()) out << "\n" << run.footnote << "\n";
    return out.str();
}

std::string format_comparison(std::span<const ModelRun> runs) {
    std::ostringstream out;
    out << "| Model | Mode | Folds | Average Loss | Average Accuracy | Standard Deviation |\n";
    out << "|---|---|---:|---:|---:|---:|\n";
    for (const auto& run : runs) {
        const RunSummary s = fold_stats(run.folds);
        out << "| " << run.model << " | " << run.mode << " | " << run.folds.size() << " | "
            << fixed(s.average_loss, 3) << " | " << fixed(s.average_accuracy, 3) << "% | "
            << fixed(s.std_accuracy, 3) << "% |\n";
    }
    return out.str();
}

std::vector<std::filesystem::path> render_report(std::span<const ModelRun> runs, const std::filesystem::path& out_dir) {
    std::vector<std::filesystem::path> written;
    if (runs.empty()) return written;
    for (const auto& run : runs) {
        const std::string stem = run.model + "_" + run.mode;
        const auto table = out_dir / (stem + ".csv");
        const auto summary = out_dir / (stem + "_summary.csv");
        const auto md = out_dir / (stem + ".md");
        csv::write_text(table, format_fold_results(run.folds));
        csv::write_text(summary, format_summary_csv(fold_stats(run.folds)));
        csv::write_text(md, format_markdown_table(run));
        written.insert(written.end(), {table, summary, md});
    }
    const auto comparison = out_dir / "comparison.md";
    csv::write_text(comparison, format_comparison(runs));
    written.push_back(comparison);
    return written;
}

}  // namespace forge
