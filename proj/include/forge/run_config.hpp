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

#include "forge/artifact_filter.hpp"
#include "forge/augment.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace forge {

enum class TrainMode { Transfer, Scratch };
enum class Protocol { KFold, Holdout };

// Every experiment parameter in one place. Defaults reproduce the published
// protocol, so an empty config file runs the reference experiment:
//
//                      k-fold   holdout
//   train batch          24       26
//   validation batch     56       70
//   validation steps      6        5
//   test batch           45       45
//   steps per epoch      80       80
//   epochs (transfer)   100      100
//   epochs (scratch)    200      200
//   learning rate      1e-5     1e-5   (Adam, categorical cross-entropy)
//   early-stop patience   8        8   (epochs without validation-loss gain)
struct RunConfig {
    std::string name = "microcnn";
    TrainMode mode = TrainMode::Scratch;
    Protocol protocol = Protocol::KFold;
    int epochs = 200;
    int steps_per_epoch = 80;
    int train_batch = 24;
    int validation_batch = 56;
    int validation_steps = 6;
    int test_batch = 45;
    double learning_rate = 1e-5;
    int early_stop_patience = 8;
    std::uint64_t seed = 0;
    int k = 10;
    double validation_fraction = 0.15;
    int input_size = 64;
    unsigned threads = 1;
    std::string patch_dir;   // where <patch_id>.png files live
    std::string pretrained;  // trunk checkpoint for transfer mode
    AugmentPolicy augment;
    FilterThresholds filter;

    static RunConfig defaults(Protocol protocol, TrainMode mode);

    // Throws ConfigError on any count < 1, non-positive learning rate, or
    // invalid nested policy/thresholds.
    void validate() const;
};

std::string_view to_string(TrainMode m) noexcept;
std::string_view to_string(Protocol p) noexcept;

// JSON round trip. Missing keys take the defaults for the file's
// protocol/mode; unknown keys are rejected.
RunConfig parse_run_config(std::string_view json_text, std::optional<std::uint64_t> fallback_seed = std::nullopt);
std::string format_run_config(const RunConfig& config);
RunConfig load_run_config(const std::filesystem::path& path, std::optional<std::uint64_t> fallback_seed = std::nullopt);
void save_run_config(const std::filesystem::path& path, const RunConfig& config);

}  // namespace forge
