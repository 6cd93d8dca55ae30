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

#include "forge/labels.hpp"

namespace forge {

namespace {
constexpr std::array<std::string_view, kNumClasses> kClassNames = {"TSH", "BASH", "GMA", "SHC", "BBH"};
constexpr std::array<std::string_view, 6> kVerdictNames = {
    "keep", "reject_dark", "reject_blank", "needs_review", "manual_keep", "manual_reject"};
constexpr std::array<std::string_view, 4> kSplitNames = {"unassigned", "train", "validation", "test"};
}  // namespace

std::string_view to_string(ClassLabel c) noexcept { return kClassNames[static_cast<std::size_t>(c)]; }

std::optional<ClassLabel> parse_class(std::string_view s) noexcept {
    for (std::size_t i = 0; i < kClassNames.size(); ++i) {
        if (kClassNames[i] == s) return static_cast<ClassLabel>(i);
    }
    return std::nullopt;
}

std::string_view to_string(Verdict v) noexcept { return kVerdictNames[static_cast<std::size_t>(v)]; }

std::optional<Verdict> parse_verdict(std::string_view s) noexcept {
    for (std::size_t i = 0; i < kVerdictNames.size(); ++i) {
        if (kVerdictNames[i] == s) return static_cast<Verdict>(i);
    }
    return std::nullopt;
}

std::string_view to_string(Split s) noexcept { return kSplitNames[static_cast<std::size_t>(s)]; }

std::optional<Split> parse_split(std::string_view s) noexcept {
    for (std::size_t i = 0; i < kSplitNames.size(); ++i) {
        if (kSplitNames[i] == s) return static_cast<Split>(i);
    }
    return std::nullopt;
}

}  // namespace forge
