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

#include "forge/manifest.hpp"

#include "forge/artifact_filter.hpp"
#include "forge/csv.hpp"
#include "forge/errors.hpp"

#include <algorithm>
#include <charconv>
#include <regex>

namespace forge {

void Manifest::sort_and_validate() {
    std::sort(rows.begin(), rows.end(),
              [](const ManifestRow& a, const ManifestRow& b) { return a.patch_id < b.patch_id; });
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].patch_id == rows[i - 1].patch_id) throw DuplicatePatchId(rows[i].patch_id);
    }
}

const ManifestRow* Manifest::find(std::string_view patch_id) const {
    auto it = std::lower_bound(rows.begin(), rows.end(), patch_id,
                               [](const ManifestRow& r, std::string_view id) { return r.patch_id < id; });
    return it != rows.end() && it->patch_id == patch_id ? &*it : nullptr;
}

ManifestRow* Manifest::find(std::string_view patch_id) {
    return const_cast<ManifestRow*>(std::as_const(*this).find(patch_id));
}

std::size_t Manifest::eligible_count() const {
    return static_cast<std::size_t>(
        std::count_if(rows.begin(), rows.end(), [](const ManifestRow& r) { return is_eligible(r.verdict); }));
}

std::string format_manifest(const Manifest& m) {
    csv::Table t;
    t.header = csv::split_line(kManifestHeader);
    t.rows.reserve(m.rows.size());
    for (const auto& r : m.rows) {
        t.rows.push_back({r.patch_id, r.source_image, std::string(to_string(r.label)),
                          std::string(to_string(r.verdict)), std::string(to_string(r.split)),
                          r.fold ? std::to_string(*r.fold) : std::string{}});
    }
    return csv::format(t);
}

Manifest parse_manifest(std::string_view text) {
    const auto t = csv::parse(text);
    if (t.header != csv::split_line(kManifestHeader)) {
        throw FormatError(std::string("manifest header must be '") + kManifestHeader + "'");
    }
    Manifest m;
    m.rows.reserve(t.rows.size());
    for (const auto& f : t.rows) {
        ManifestRow row;
        row.patch_id = f[0];
        row.source_image = f[1];
        const auto label = parse_class(f[2]);
        const auto verdict = parse_verdict(f[3]);
        const auto split = parse_split(f[4]);
        if (row.patch_id.empty() || !label || !verdict || !split) {
            throw FormatError("manifest: malformed row for '" + row.patch_id + "'");
        }
        row.label = *label;
        row.verdict = *verdict;
        row.split = *split;
        if (!f[5].empty()) {
            int fold = -1;
            auto [ptr, ec] = std::from_chars(f[5].data(), f[5].data() + f[5].size(), fold);
            if (ec != std::errc{} || ptr != f[5].data() + f[5].size() || fold < 0) {
                throw FormatError("manifest: bad fold '" + f[5] + "'");
            }
            row.fold = fold;
        }
        m.rows.push_back(std::move(row));
    }
    m.sort_and_validate();
    return m;
}

Manifest read_manifest(const std::filesystem::path& path) {
    try {
        return parse_manifest(csv::read_text(path));
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

void write_manifest(const std::filesystem::path& path, const Manifest& m) {
    csv::write_text(path, format_manifest(m));
}

SourceLabels read_source_labels(const std::filesystem::path& path) {
    const auto t = csv::read(path);
    const auto c_src = t.column("source_image");
    const auto c_cls = t.column("class");
    SourceLabels labels;
    for (const auto& f : t.rows) {
        const auto label = parse_class(f[c_cls]);
        if (!label) throw FormatError("labels: unknown class '" + f[c_cls] + "'");
        labels[f[c_src]] = *label;
    }
    return labels;
}

void write_source_labels(const std::filesystem::path& path, const SourceLabels& labels) {
    csv::Table t;
    t.header = {"source_image", "class"};
    for (const auto& [src, label] : labels) t.rows.push_back({src, std::string(to_string(label))});
    csv::write(path, t);
}

std::array<int, kNumClasses> label_inventory(const SourceLabels& labels) {
    std::array<int, kNumClasses> counts{};
    for (const auto& [src, label] : labels) ++counts[static_cast<std::size_t>(class_index(label))];
    return counts;
}

std::optional<std::string> source_stem_of(std::string_view patch_id) {
    static const std::regex kSuffix(R"(^(.+)_r(\d+)_c(\d+)$)");
    std::match_results<std::string_view::const_iterator> match;
    if (!std::regex_match(patch_id.begin(), patch_id.end(), match, kSuffix)) return std::nullopt;
    return match[1].str();
}

std::filesystem::path patch_path(const std::filesystem::path& patch_dir, std::string_view patch_id) {
    return patch_dir / (std::string(patch_id) + ".png");
}

Manifest build_manifest(const std::filesystem::path& patch_dir, const SourceLabels& labels,
                        const FilterReport* report) {
    if (!std::filesystem::is_directory(patch_dir)) throw IoError("not a directory: " + patch_dir.string());

    std::map<std::string, const std::pair<const std::string, ClassLabel>*> by_stem;
    for (const auto& entry : labels) {
        const auto stem = std::filesystem::path(entry.first).stem().string();
        if (!by_stem.emplace(stem, &entry).second) {
            throw DuplicatePatchId("two labelled sources share the stem '" + stem + "'");
        }
    }

    Manifest m;
    for (const auto& entry : std::filesystem::directory_iterator(patch_dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".png") continue;
        const std::string id = entry.path().stem().string();
        const auto stem = source_stem_of(id);
        if (!stem) continue;
        const auto it = by_stem.find(*stem);
        if (it == by_stem.end()) throw UnlabeledSource("no class label for source of patch " + id);
        ManifestRow row;
        row.patch_id = id;
        row.source_image = it->second->first;
        row.label = it->second->second;
        m.rows.push_back(std::move(row));
    }
    m.sort_and_validate();

    if (report) {
        for (const auto& r : report->rows) {
            if (auto* row = m.find(r.patch_id)) row->verdict = r.verdict;
        }
    }
    return m;
}

}  // namespace forge
