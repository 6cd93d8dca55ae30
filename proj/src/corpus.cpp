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

#include "forge/corpus.hpp"

#include "forge/errors.hpp"
#include "forge/patcher.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

namespace forge {

namespace fs = std::filesystem;

Manifest patch_corpus(const fs::path& input_dir, const SourceLabels& labels, const fs::path& output_dir,
                      int patch_size, unsigned threads) {
    if (!fs::is_directory(input_dir)) throw IoError("not a directory: " + input_dir.string());
    std::error_code ec;
    fs::create_directories(output_dir, ec);
    if (ec) throw IoError("cannot create " + output_dir.string() + ": " + ec.message());

    std::vector<std::pair<std::string, ClassLabel>> sources(labels.begin(), labels.end());
    std::vector<std::vector<ManifestRow>> rows(sources.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    auto work = [&] {
        for (std::size_t i = next++; i < sources.size(); i = next++) {
            try {
                const auto& [name, label] = sources[i];
                const fs::path path = input_dir / name;
                if (!fs::exists(path)) throw IoError("labelled image not found: " + path.string());
                const ImageBuffer img = read_image(path);
                const GridPlan plan = plan_grid(img.width(), img.height(), patch_size);
                for (const auto& patch : extract_patches(img, plan)) {
                    ManifestRow row;
                    row.patch_id = patch_id(name, patch.row, patch.col);
                    row.source_image = name;
                    row.label = label;
                    write_png(patch.image, patch_path(output_dir, row.patch_id));
                    rows[i].push_back(std::move(row));
                }
            } catch (...) {
                std::lock_guard lock(failure_mu);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(sources.size())));
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 1; t < n; ++t) pool.emplace_back(work);
        work();
    }
    if (failure) std::rethrow_exception(failure);

    Manifest m;
    for (auto& r : rows) std::move(r.begin(), r.end(), std::back_inserter(m.rows));
    m.sort_and_validate();
    return m;
}

}  // namespace forge
