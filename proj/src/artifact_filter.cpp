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

#include "forge/artifact_filter.hpp"

#include "forge/csv.hpp"
#include "forge/errors.hpp"

#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <mutex>
#include <thread>

namespace forge {

void FilterThresholds::validate() const {
    for (double v : {dark_mean, dark_p95, blank_contrast, review_band}) {
        if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("filter thresholds must lie in [0,1]");
    }
    if (!(review_band < dark_mean)) throw ConfigError("review_band must be below dark_mean");
    if (!(blank_contrast < dark_p95)) throw ConfigError("blank_contrast must be below dark_p95");
}

Verdict classify_stats(const RegionStats& s, const FilterThresholds& t) noexcept {
    if (s.mean < t.dark_mean || s.p95 < t.dark_p95) return Verdict::RejectDark;
    if (s.michelson < t.blank_contrast) return Verdict::RejectBlank;
    if (s.michelson < t.blank_contrast + t.review_band) return Verdict::NeedsReview;
    return Verdict::Keep;
}

PatchVerdict classify_patch(const ImageBuffer& patch, const FilterThresholds& t) {
    if (patch.width() != patch.height()) throw ShapeMismatch("classify_patch expects a square patch");
    PatchVerdict pv;
    pv.stats = region_stats(to_luminance(patch));
    pv.verdict = classify_stats(pv.stats, t);
    return pv;
}

namespace {

std::string fmt6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

}  // namespace

std::string format_filter_report(const FilterReport& r) {
    csv::Table t;
    t.header = csv::split_line(kFilterReportHeader);
    for (const auto& row : r.rows) {
        t.rows.push_back({row.patch_id, std::string(to_string(row.verdict)), fmt6(row.stats.mean),
                          fmt6(row.stats.p05), fmt6(row.stats.p95), fmt6(row.stats.michelson)});
    }
    return csv::format(t);
}

FilterReport parse_filter_report(std::string_view text) {
    const auto t = csv::parse(text);
    const auto c_id = t.column("patch_id");
    const auto c_verdict = t.column("verdict");
    const auto c_mean = t.column("mean");
    const auto c_p05 = t.column("p05");
    const auto c_p95 = t.column("p95");
    const auto c_mich = t.column("michelson");
    FilterReport r;
    for (const auto& fields : t.rows) {
        FilterReportRow row;
        row.patch_id = fields[c_id];
        const auto v = parse_verdict(fields[c_verdict]);
        if (!v) throw FormatError("filter report: unknown verdict '" + fields[c_verdict] + "'");
        row.verdict = *v;
        try {
            row.stats.mean = std::stod(fields[c_mean]);
            row.stats.p05 = std::stod(fields[c_p05]);
            row.stats.p95 = std::stod(fields[c_p95]);
            row.stats.michelson = std::stod(fields[c_mich]);
        } catch (const std::exception&) {
            throw FormatError("filter report: bad number in row " + row.patch_id);
        }
        ++r.counts[static_cast<std::size_t>(row.verdict)];
        r.rows.push_back(std::move(row));
    }
    return r;
}

FilterReport filter_run(Manifest& m, const std::filesystem::path& patch_dir, const FilterThresholds& t,
                        unsigned threads) {
    t.validate();
    m.sort_and_validate();
    for (const auto& row : m.rows) {
        if (!std::filesystem::exists(patch_path(patch_dir, row.patch_id))) {
            throw MissingPatchFile(patch_path(patch_dir, row.patch_id).string());
        }
    }

    std::vector<RegionStats> stats(m.rows.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < m.rows.size(); i = next++) {
            try {
                stats[i] = region_stats(to_luminance(read_image(patch_path(patch_dir, m.rows[i].patch_id))));
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    {
        std::vector<std::jthread> pool;
        for (unsigned i = 1; i < std::max(1u, threads); ++i) pool.emplace_back(worker);
        worker();
    }
    if (failure) std::rethrow_exception(failure);

    FilterReport report;
    for (std::size_t i = 0; i < m.rows.size(); ++i) {
        auto& row = m.rows[i];
        if (!is_manual(row.verdict)) row.verdict = classify_stats(stats[i], t);
        report.rows.push_back({row.patch_id, row.verdict, stats[i]});
        ++report.counts[static_cast<std::size_t>(row.verdict)];
    }
    return report;
}

double keep_f1(std::span<const LabeledStats> labeled, const FilterThresholds& t) {
    int tp = 0, fp = 0, fn = 0;
    for (const auto& l : labeled) {
        const bool predicted = classify_stats(l.stats, t) == Verdict::Keep;
        if (predicted && l.keep) ++tp;
        else if (predicted) ++fp;
        else if (l.keep) ++fn;
    }
    if (tp == 0) return 0.0;
    return 2.0 * tp / (2.0 * tp + fp + fn);
}

Calibration calibrate_thresholds(std::span<const LabeledStats> labeled, double review_band) {
    int keeps = 0, rejects = 0;
    for (const auto& l : labeled) (l.keep ? keeps : rejects)++;
    if (keeps < 2 || rejects < 2) {
        throw InsufficientLabels("calibration needs >= 2 keep and >= 2 reject labels, got " +
                                 std::to_string(keeps) + " keep / " + std::to_string(rejects) + " reject");
    }

    // The automatic Keep region is mean >= dm, p95 >= dp, michelson >= bc + band,
    // so each sample's three stats are all that matter.
    constexpr int kSteps = 100;
    Calibration best;
    best.f1 = -1.0;
    int best_sum = 0;
    FilterThresholds t;
    t.review_band = review_band;
    for (int i = 0; i <= kSteps; ++i) {
        t.dark_mean = i / 100.0;
        if (!(t.review_band < t.dark_mean)) continue;
        for (int j = 0; j <= kSteps; ++j) {
            t.dark_p95 = j / 100.0;
            for (int k = 0; k < j; ++k) {
                t.blank_contrast = k / 100.0;
                const double f1 = keep_f1(labeled, t);
                const int sum = i + j + k;
                if (f1 > best.f1 || (f1 == best.f1 && sum < best_sum)) {
                    best.f1 = f1;
                    best.thresholds = t;
                    best_sum = sum;
                }
            }
        }
    }
    return best;
}

Calibration calibrate_thresholds(std::span<const std::pair<ImageBuffer, bool>> labeled, double review_band) {
    std::vector<LabeledStats> stats;
    stats.reserve(labeled.size());
    for (const auto& [img, keep] : labeled) stats.push_back({region_stats(to_luminance(img)), keep});
    return calibrate_thresholds(stats, review_band);
}

}  // namespace forge
