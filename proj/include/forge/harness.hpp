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

#include "forge/manifest.hpp"
#include "forge/metrics.hpp"
#include "forge/nn/micro_cnn.hpp"
#include "forge/run_config.hpp"

#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace forge {

// One classifier input: the patch resized to the model's input size.
struct Sample {
    std::string patch_id;
    ImageBuffer image;
    int label = 0;
};

using SampleSet = std::vector<Sample>;

// Decodes `<patch_dir>/<id>.png` for every id and resizes it to
// `input_size` squared. Throws DataUnavailable for unknown ids or
// unreadable files.
SampleSet load_samples(const Manifest& m, std::span<const std::string> ids, const std::filesystem::path& patch_dir,
                       int input_size, unsigned threads = 1);

// Ids of the rows whose split column equals `split`, in manifest order.
std::vector<std::string> ids_in_split(const Manifest& m, Split split);

// Writes `images` into the columns of `out` (CHW order, values / 255).
template <typename T>
void images_to_columns(std::span<const ImageBuffer* const> images, nn::ColMatrix<T>& out);

// True iff the last `patience` entries all fail to improve strictly on the
// best value before them. Needs at least patience + 1 entries to fire.
bool early_stop(std::span<const double> validation_losses, int patience);

// Runs `epoch` for 1..max_epochs, appending each result, and stops after the
// first epoch on which early_stop fires.
TrainRecord run_epochs(int max_epochs, int patience, const std::function<EpochMetrics(int)>& epoch);

struct EvalResult {
    double loss = 0.0;      // mean cross-entropy, nats
    double accuracy = 0.0;  // top-1, fraction
    long long samples = 0;
    int batches = 0;
};

// Batched evaluation with dropout and augmentation off. Throws
// DataUnavailable for an empty set.
EvalResult evaluate(const nn::MicroCNN<float>& model, const SampleSet& set, int batch_size);

// Fresh model for `config`: scratch initializes everything from the seed;
// transfer loads the trunk of `config.pretrained` (ConfigError when unset)
// and disables dropout.
nn::MicroCNN<float> make_model(const RunConfig& config, std::uint64_t seed);

using EpochCallback = std::function<void(const EpochMetrics&)>;

// Per epoch: steps_per_epoch Adam steps on train_batch samples drawn from a
// shuffled cursor over `train` (reshuffled on every pass), then
// validation_steps batches of validation_batch from the start of
// `validation`, wrapping as needed. Transfer mode leaves the trunk fixed.
TrainRecord train(const RunConfig& config, nn::MicroCNN<float>& model, const SampleSet& train,
                  const SampleSet& validation, const EpochCallback& on_epoch = {});

struct FoldRun {
    FoldResult result;  // accuracy in percent
    TrainRecord record;
};

// Trains and tests the MicroCNN on every fold manifest in turn.
std::vector<FoldRun> kfold_run_native(const RunConfig& config, std::span<const Manifest> folds,
                                      const std::filesystem::path& patch_dir, const EpochCallback& on_epoch = {});

// Hands the folds to an external program. Layout under `job_dir`:
//   config                      run config (JSON)
//   fold_<i>/{train,validation,test}.csv   manifest rows, i from 0
//   results.csv                 written by the backend: fold,loss,accuracy
// with fold from 0 and accuracy as a fraction. The command is run through
// the shell as `<command> <job_dir>`. Throws BackendFailed on a nonzero exit
// or missing results and MalformedResults on bad rows. Returned accuracies
// are in percent and folds numbered from 1.
std::vector<FoldResult> external_backend_run(const RunConfig& config, std::span<const Manifest> folds,
                                             const std::string& command, const std::filesystem::path& job_dir);

// Validates and converts a backend results file for `k` folds.
std::vector<FoldResult> parse_backend_results(std::string_view text, int k);

}  // namespace forge
