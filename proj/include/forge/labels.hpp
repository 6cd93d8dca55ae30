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

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace forge {

// The five morphological classes, with fixed indices 0..4.
enum class ClassLabel : int {
    TSH = 0,   // tortuous septate hyaline hyphae
    BASH = 1,  // beaded arthroconidial septate hyaline hyphae
    GMA = 2,   // groups or mosaics of arthroconidia
    SHC = 3,   // septate hyaline hyphae with chlamydioconidia
    BBH = 4,   // broad brown hyphae
};

inline constexpr int kNumClasses = 5;
inline constexpr std::array<ClassLabel, kNumClasses> kAllClasses = {
    ClassLabel::TSH, ClassLabel::BASH, ClassLabel::GMA, ClassLabel::SHC, ClassLabel::BBH};

constexpr int class_index(ClassLabel c) noexcept { return static_cast<int>(c); }
std::string_view to_string(ClassLabel c) noexcept;
std::optional<ClassLabel> parse_class(std::string_view s) noexcept;

enum class Verdict {
    Keep,
    RejectDark,
    RejectBlank,
    NeedsReview,
    ManualKeep,
    ManualReject,
};

inline constexpr std::array<Verdict, 6> kAllVerdicts = {
    Verdict::Keep,        Verdict::RejectDark, Verdict::RejectBlank,
    Verdict::NeedsReview, Verdict::ManualKeep, Verdict::ManualReject};

std::string_view to_string(Verdict v) noexcept;
std::optional<Verdict> parse_verdict(std::string_view s) noexcept;

constexpr bool is_manual(Verdict v) noexcept {
    return v == Verdict::ManualKeep || v == Verdict::ManualReject;
}
// Only kept rows may be placed in a split or fold.
constexpr bool is_eligible(Verdict v) noexcept {
    return v == Verdict::Keep || v == Verdict::ManualKeep;
}

enum class Split { Unassigned, Train, Validation, Test };

std::string_view to_string(Split s) noexcept;
std::optional<Split> parse_split(std::string_view s) noexcept;

}  // namespace forge
