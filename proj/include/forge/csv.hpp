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
#include <string>
#include <string_view>
#include <vector>

namespace forge::csv {

// Plain comma-separated tables: no quoting, LF line endings, trailing CR
// tolerated on read. Fields containing ',', '"' or newlines are rejected on
// write with FormatError.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    // Index of a header column; throws FormatError if absent.
    std::size_t column(std::string_view name) const;
};

std::vector<std::string> split_line(std::string_view line);
Table parse(std::string_view text);
Table read(const std::filesystem::path& path);

std::string format(const Table& table);
// Writes atomically (temp file + rename).
void write(const std::filesystem::path& path, const Table& table);
void write_text(const std::filesystem::path& path, std::string_view text);
std::string read_text(const std::filesystem::path& path);

}  // namespace forge::csv
