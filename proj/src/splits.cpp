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

#include "forge/splits.hpp"

#include "forge/csv.hpp"
#include "forge/errors.hpp"
#include "forge/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

namespace forge {

namespace {

constexpr std::uint64_t kTagCap = 0xca9;
constexpr std::uint64_t kTagHoldout = 0x401d;
constexpr std::uint64_t kTagFolds = 0xf01d;

using Unit = std::vector<std::string>;  // row ids moved together

// Eligible rows per class after the optional cap, grouped into allocation
// units, in canonical (sorted) order.
struct Population {
    std::array<std::vector<Unit>, kNumClasses> units;
    std::array<bool, kNumClasses> present{};  // class has any row in the manifest
    std::vector<std::string> ids;
};

Population select_population(const Manifest& m, const SplitOptions& opt) {
    Population pop;
    std::array<std::vector<const ManifestRow*>, kNumClasses> rows;
    for (const auto& r : m.rows) {
        const auto c = static_cast<std::size_t>(class_index(r.label));
        pop.present[c] = true;
        if (is_eligible(r.verdict)) rows[c].push_back(&r);
    }
    for (std::size_t c = 0; c < kNumClasses; ++c) {
        auto& cls = rows[c];
        if (opt.per_class_cap && static_cast<int>(cls.size()) > *opt.per_class_cap) {
            Xoshiro256 rng(derive_seed(opt.seed, {kTagCap, c}));
            shuffle(std::span(cls), rng);
            cls.resize(static_cast<std::size_t>(std::max(0, *opt.per_class_cap)));
            std::sort(cls.begin(), cls.end(),
                      [](const ManifestRow* a, const ManifestRow* b) { return a->patch_id < b->patch_id; });
        }
        if (opt.group_by_source) {
            std::map<std::string, Unit> by_source;
            for (const auto* r : cls) by_source[r->source_image].push_back(r->patch_id);
            for (auto& [src, unit] : by_source) pop.units[c].push_back(std::move(unit));
        } else {
            for (const auto* r : cls) pop.units[c].push_back({r->patch_id});
        }
        for (const auto* r : cls) pop.ids.push_back(r->patch_id);
    }
    std::sort(pop.ids.begin(), pop.ids.end());
    return pop;
}

// Largest-remainder rounding of one class's units into parts, carrying the
// pooled quota across classes to break remainder ties.
class Allocator {
public:
    explicit Allocator(const SplitRatios& r) : ratios_(r) {}

    std::array<int, 3> allocate(int n) {
        std::array<std::int64_t, 3> quota{}, floor{}, rem{};
        int leftover = n;
        for (std::size_t j = 0; j < 3; ++j) {
            quota[j] = n * ratios_.parts[j];
            floor[j] = quota[j] / SplitRatios::kWhole;
            rem[j] = quota[j] % SplitRatios::kWhole;
            leftover -= static_cast<int>(floor[j]);
        }
        std::array<std::size_t, 3> order{0, 1, 2};
        auto deficit = [&](std::size_t j) {
            return cum_quota_[j] + quota[j] - SplitRatios::kWhole * (assigned_[j] + floor[j]);
        };
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (rem[a] != rem[b]) return rem[a] > rem[b];
            return deficit(a) > deficit(b);
        });
        std::array<int, 3> counts{};
        for (std::size_t j = 0; j < 3; ++j) counts[j] = static_cast<int>(floor[j]);
        for (int i = 0; i < leftover; ++i) ++counts[order[static_cast<std::size_t>(i)]];
        for (std::size_t j = 0; j < 3; ++j) {
            cum_quota_[j] += quota[j];
            assigned_[j] += counts[j];
        }
        return counts;
    }

private:
    SplitRatios ratios_;
    std::array<std::int64_t, 3> cum_quota_{};
    std::array<std::int64_t, 3> assigned_{};
};

void sort_sets(std::array<std::vector<std::string>, 3>& sets) {
    for (auto& s : sets) std::sort(s.begin(), s.end());
}

int nonzero_parts(const SplitRatios& r) {
    return static_cast<int>(std::count_if(r.parts.begin(), r.parts.end(), [](auto p) { return p > 0; }));
}

}  // namespace

SplitRatios SplitRatios::parse(std::string_view text) {
    SplitRatios r;
    r.parts = {0, 0, 0};
    const auto fields = csv::split_line(text);
    if (fields.size() < 2 || fields.size() > 3) throw ConfigError("ratios must have 2 or 3 parts");
    for (std::size_t i = 0; i < fields.size(); ++i) {
        const std::string& f = fields[i];
        const auto dot = f.find('.');
        const std::string whole = f.substr(0, dot);
        std::string frac = dot == std::string::npos ? "" : f.substr(dot + 1);
        if (whole.empty() || frac.size() > 3 || !std::all_of(whole.begin(), whole.end(), ::isdigit) ||
            !std::all_of(frac.begin(), frac.end(), ::isdigit)) {
            throw ConfigError("bad ratio '" + f + "'");
        }
        frac.resize(3, '0');
        r.parts[i] = std::stoll(whole) * 1000 + std::stoll(frac);
    }
    if (r.parts[0] + r.parts[1] + r.parts[2] != kWhole) throw ConfigError("ratios must sum to 100");
    return r;
}

SplitAssignment holdout_split(const Manifest& m, const SplitRatios& ratios, const SplitOptions& options) {
    const Population pop = select_population(m, options);
    const int needed = nonzero_parts(ratios);

    SplitAssignment a;
    a.ratios = ratios;
    a.options = options;
    a.population = pop.ids;
    Allocator alloc(ratios);
    for (std::size_t c = 0; c < kNumClasses; ++c) {
        auto units = pop.units[c];
        if (!pop.present[c]) continue;
        if (static_cast<int>(units.size()) < needed) {
            throw EmptyClass(std::string(to_string(static_cast<ClassLabel>(c))) + " has " +
                             std::to_string(units.size()) + " eligible units for " + std::to_string(needed) +
                             " split parts");
        }
        Xoshiro256 rng(derive_seed(options.seed, {kTagHoldout, c}));
        shuffle(std::span(units), rng);
        const auto counts = alloc.allocate(static_cast<int>(units.size()));
        std::size_t u = 0;
        for (std::size_t j = 0; j < 3; ++j) {
            for (int i = 0; i < counts[j]; ++i, ++u) {
                for (const auto& id : units[u]) a.sets[j].push_back(id);
                a.class_counts[c][j] += static_cast<int>(units[u].size());
            }
        }
    }
    sort_sets(a.sets);
    return a;
}

FoldPlan kfold_plan(const Manifest& m, int k, double validation_fraction, const SplitOptions& options) {
    if (k < 2) throw ConfigError("k must be >= 2");
    if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
        throw ConfigError("validation fraction must be in [0,1)");
    }
    const Population pop = select_population(m, options);

    FoldPlan plan;
    plan.k = k;
    plan.options = options;
    plan.population = pop.ids;
    const auto val = std::llround(validation_fraction * SplitRatios::kWhole);
    plan.trainval.parts = {SplitRatios::kWhole - val, val, 0};

    std::vector<std::vector<std::vector<const Unit*>>> buckets(
        kNumClasses, std::vector<std::vector<const Unit*>>(static_cast<std::size_t>(k)));
    std::vector<std::vector<Unit>> shuffled(kNumClasses);
    std::size_t deal = 0;
    for (std::size_t c = 0; c < kNumClasses; ++c) {
        if (!pop.present[c]) continue;
        if (static_cast<int>(pop.units[c].size()) < k) {
            throw ClassSmallerThanK(std::string(to_string(static_cast<ClassLabel>(c))) + " has " +
                                    std::to_string(pop.units[c].size()) + " eligible units, k = " +
                                    std::to_string(k));
        }
        shuffled[c] = pop.units[c];
        Xoshiro256 rng(derive_seed(options.seed, {kTagFolds, c}));
        shuffle(std::span(shuffled[c]), rng);
        for (const auto& unit : shuffled[c]) buckets[c][deal++ % static_cast<std::size_t>(k)].push_back(&unit);
    }

    plan.folds.resize(static_cast<std::size_t>(k));
    for (std::size_t f = 0; f < static_cast<std::size_t>(k); ++f) {
        auto& sets = plan.folds[f].sets;
        Allocator alloc(plan.trainval);
        for (std::size_t c = 0; c < kNumClasses; ++c) {
            if (!pop.present[c]) continue;
            // Remaining units keep their shuffled order, so the train/validation
            // cut is itself a seeded random draw.
            std::vector<const Unit*> rest;
            for (const auto& unit : shuffled[c]) {
                const auto& test = buckets[c][f];
                if (std::find(test.begin(), test.end(), &unit) == test.end()) rest.push_back(&unit);
            }
            for (const auto* unit : buckets[c][f]) {
                for (const auto& id : *unit) sets[2].push_back(id);
            }
            const auto counts = alloc.allocate(static_cast<int>(rest.size()));
            std::size_t u = 0;
            for (std::size_t j = 0; j < 2; ++j) {
                for (int i = 0; i < counts[j]; ++i, ++u) {
                    for (const auto& id : *rest[u]) sets[j].push_back(id);
                }
            }
        }
        sort_sets(sets);
    }
    return plan;
}

namespace {

struct RowIndex {
    std::map<std::string, const ManifestRow*> rows;
    explicit RowIndex(const Manifest& m) {
        for (const auto& r : m.rows) rows.emplace(r.patch_id, &r);
    }
    const ManifestRow* get(const std::string& id) const {
        auto it = rows.find(id);
        return it == rows.end() ? nullptr : it->second;
    }
};

void check_population(const Manifest& m, const RowIndex& index, const std::vector<std::string>& population,
                      const SplitOptions& options, VerificationReport& report) {
    std::array<int, kNumClasses> eligible{}, selected{};
    std::set<std::string> pop(population.begin(), population.end());
    for (const auto& id : population) {
        const auto* row = index.get(id);
        if (!row || !is_eligible(row->verdict)) {
            report.violations.push_back("ineligible: " + id);
            continue;
        }
        ++selected[static_cast<std::size_t>(class_index(row->label))];
    }
    for (const auto& r : m.rows) {
        if (!is_eligible(r.verdict)) continue;
        ++eligible[static_cast<std::size_t>(class_index(r.label))];
        if (!options.per_class_cap && !pop.count(r.patch_id)) report.violations.push_back("uncovered: " + r.patch_id);
    }
    if (options.per_class_cap) {
        for (std::size_t c = 0; c < kNumClasses; ++c) {
            if (selected[c] != std::min(eligible[c], *options.per_class_cap)) {
                report.violations.push_back("coverage: class " +
                                            std::string(to_string(static_cast<ClassLabel>(c))) +
                                            " population does not match the per-class cap");
            }
        }
    }
}

// Disjointness and coverage of `sets` over `population`.
void check_partition(const std::vector<std::string>& population,
                     const std::vector<const std::vector<std::string>*>& sets, VerificationReport& report) {
    std::map<std::string, int> seen;
    for (const auto* s : sets) {
        for (const auto& id : *s) {
            if (++seen[id] == 2) report.violations.push_back("overlap: " + id);
        }
    }
    std::set<std::string> pop(population.begin(), population.end());
    for (const auto& id : population) {
        if (!seen.count(id)) report.violations.push_back("uncovered: " + id);
    }
    for (const auto& [id, n] : seen) {
        if (!pop.count(id)) report.violations.push_back("ineligible: " + id);
    }
}

// Units per class in one set: rows, or distinct sources when grouped.
std::array<int, kNumClasses> unit_counts(const RowIndex& index, const std::vector<std::string>& ids, bool grouped) {
    std::array<int, kNumClasses> counts{};
    std::array<std::set<std::string>, kNumClasses> sources;
    for (const auto& id : ids) {
        const auto* row = index.get(id);
        if (!row) continue;
        const auto c = static_cast<std::size_t>(class_index(row->label));
        if (grouped) sources[c].insert(row->source_image);
        else ++counts[c];
    }
    if (grouped) {
        for (std::size_t c = 0; c < kNumClasses; ++c) counts[c] = static_cast<int>(sources[c].size());
    }
    return counts;
}

void check_leakage(const RowIndex& index, const std::vector<const std::vector<std::string>*>& sets,
                   VerificationReport& report) {
    std::map<std::string, std::size_t> home;
    std::set<std::string> reported;
    for (std::size_t j = 0; j < sets.size(); ++j) {
        for (const auto& id : *sets[j]) {
            const auto* row = index.get(id);
            if (!row) continue;
            auto [it, fresh] = home.emplace(row->source_image, j);
            if (!fresh && it->second != j && reported.insert(row->source_image).second) {
                report.violations.push_back("leakage: " + row->source_image);
            }
        }
    }
}

// |count - n * part / whole| <= 1, in integer arithmetic.
void check_ratio(const std::string& what, int count, int n, std::int64_t part, std::int64_t whole,
                 VerificationReport& report) {
    const std::int64_t diff = static_cast<std::int64_t>(count) * whole - static_cast<std::int64_t>(n) * part;
    if (diff > whole || diff < -whole) {
        report.violations.push_back("stratification: " + what + " has " + std::to_string(count) + " of " +
                                    std::to_string(n));
    }
}

}  // namespace

VerificationReport verify_split(const Manifest& m, const SplitAssignment& a) {
    VerificationReport report;
    const RowIndex index(m);
    check_population(m, index, a.population, a.options, report);
    const std::vector<const std::vector<std::string>*> sets{&a.sets[0], &a.sets[1], &a.sets[2]};
    check_partition(a.population, sets, report);
    if (a.options.group_by_source) check_leakage(index, sets, report);

    const bool grouped = a.options.group_by_source;
    const auto total = unit_counts(index, a.population, grouped);
    static constexpr const char* kNames[] = {"train", "validation", "test"};
    for (std::size_t j = 0; j < 3; ++j) {
        const auto counts = unit_counts(index, a.sets[j], grouped);
        for (std::size_t c = 0; c < kNumClasses; ++c) {
            check_ratio(std::string(to_string(static_cast<ClassLabel>(c))) + "/" + kNames[j], counts[c], total[c],
                        a.ratios.parts[j], SplitRatios::kWhole, report);
        }
    }
    return report;
}

VerificationReport verify_split(const Manifest& m, const FoldPlan& plan) {
    VerificationReport report;
    const RowIndex index(m);
    const bool grouped = plan.options.group_by_source;
    check_population(m, index, plan.population, plan.options, report);
    if (static_cast<int>(plan.folds.size()) != plan.k) {
        report.violations.push_back("fold count " + std::to_string(plan.folds.size()) + " != k");
    }

    std::vector<const std::vector<std::string>*> tests;
    for (const auto& f : plan.folds) tests.push_back(&f.sets[2]);
    check_partition(plan.population, tests, report);
    if (grouped) check_leakage(index, tests, report);

    const auto total = unit_counts(index, plan.population, grouped);
    for (std::size_t i = 0; i < plan.folds.size(); ++i) {
        const auto& sets = plan.folds[i].sets;
        const std::string tag = "fold " + std::to_string(i) + " ";
        VerificationReport fold_report;
        check_partition(plan.population, {&sets[0], &sets[1], &sets[2]}, fold_report);
        if (grouped) check_leakage(index, {&sets[0], &sets[1], &sets[2]}, fold_report);
        for (auto& v : fold_report.violations) report.violations.push_back(tag + v);

        const auto test = unit_counts(index, sets[2], grouped);
        const auto val = unit_counts(index, sets[1], grouped);
        for (std::size_t c = 0; c < kNumClasses; ++c) {
            const std::string cls(to_string(static_cast<ClassLabel>(c)));
            check_ratio(tag + cls + "/test", test[c], total[c], 1, plan.k, report);
            check_ratio(tag + cls + "/validation", val[c], total[c] - test[c], plan.trainval.parts[1],
                        SplitRatios::kWhole, report);
        }
    }
    return report;
}

Manifest apply_sets(const Manifest& m, const std::array<std::vector<std::string>, 3>& sets,
                    std::optional<int> fold_index) {
    Manifest out = m;
    for (auto& r : out.rows) {
        r.split = Split::Unassigned;
        r.fold.reset();
    }
    static constexpr Split kSplits[] = {Split::Train, Split::Validation, Split::Test};
    for (std::size_t j = 0; j < 3; ++j) {
        for (const auto& id : sets[j]) {
            if (auto* row = out.find(id)) {
                row->split = kSplits[j];
                row->fold = fold_index;
            }
        }
    }
    return out;
}

void write_fold_plan(const std::filesystem::path& dir, const Manifest& m, const FoldPlan& plan) {
    std::filesystem::create_directories(dir);
    std::map<std::string, int> bucket;
    for (std::size_t i = 0; i < plan.folds.size(); ++i) {
        for (const auto& id : plan.folds[i].sets[2]) bucket[id] = static_cast<int>(i);
    }
    for (std::size_t i = 0; i < plan.folds.size(); ++i) {
        Manifest fm = apply_sets(m, plan.folds[i].sets);
        for (auto& r : fm.rows) {
            auto it = bucket.find(r.patch_id);
            if (it != bucket.end()) r.fold = it->second;
        }
        write_manifest(dir / ("fold_" + std::to_string(i) + ".csv"), fm);
    }
}

std::vector<Manifest> read_fold_plan(const std::filesystem::path& dir) {
    std::vector<Manifest> folds;
    for (int i = 0;; ++i) {
        const auto path = dir / ("fold_" + std::to_string(i) + ".csv");
        if (!std::filesystem::exists(path)) break;
        folds.push_back(read_manifest(path));
    }
    if (folds.empty()) throw IoError("no fold_<i>.csv files in " + dir.string());
    return folds;
}

}  // namespace forge
