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

#include "forge/harness.hpp"

#include "forge/augment.hpp"
#include "forge/csv.hpp"
#include "forge/errors.hpp"
#include "forge/nn/adam.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

namespace forge {

namespace fs = std::filesystem;

namespace {

enum : std::uint64_t {
    kTagInit = 0x494e4954,
    kTagOrder = 0x4f524452,
    kTagAugment = 0x4155474d,
    kTagDropout = 0x44524f50,
    kTagFold = 0x464f4c44,
};

std::string quote_arg(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'') out += "'\\''";
        else out += c;
    }
    return out + "'";
}

}  // namespace

SampleSet load_samples(const Manifest& m, std::span<const std::string> ids, const fs::path& patch_dir,
                       int input_size, unsigned threads) {
    SampleSet out(ids.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    auto work = [&] {
        for (std::size_t i = next++; i < ids.size(); i = next++) {
            try {
                const ManifestRow* row = m.find(ids[i]);
                if (!row) throw DataUnavailable("no manifest row for '" + ids[i] + "'");
                const fs::path path = patch_path(patch_dir, ids[i]);
                ImageBuffer img;
                try {
                    img = read_image(path);
                } catch (const Error& e) {
                    throw DataUnavailable(path.string() + ": " + e.what());
                }
                out[i] = {ids[i], resize_bilinear(img, input_size, input_size), static_cast<int>(row->label)};
            } catch (...) {
                std::lock_guard lock(failure_mu);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(ids.size())));
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 1; t < n; ++t) pool.emplace_back(work);
        work();
    }
    if (failure) std::rethrow_exception(failure);
    return out;
}

std::vector<std::string> ids_in_split(const Manifest& m, Split split) {
    std::vector<std::string> ids;
    for (const auto& row : m.rows) {
        if (row.split == split) ids.push_back(row.patch_id);
    }
    return ids;
}

template <typename T>
void images_to_columns(std::span<const ImageBuffer* const> images, nn::ColMatrix<T>& out) {
    if (images.empty()) throw ShapeMismatch("no images");
    const int w = images[0]->width();
    const int h = images[0]->height();
    const Eigen::Index plane = static_cast<Eigen::Index>(w) * h;
    out.resize(plane * ImageBuffer::kChannels, static_cast<Eigen::Index>(images.size()));
    for (std::size_t j = 0; j < images.size(); ++j) {
        const ImageBuffer& img = *images[j];
        if (img.width() != w || img.height() != h) throw ShapeMismatch("images in a batch differ in size");
        const auto px = img.data();
        T* col = out.col(static_cast<Eigen::Index>(j)).data();
        for (Eigen::Index p = 0; p < plane; ++p) {
            for (int c = 0; c < ImageBuffer::kChannels; ++c) {
                col[c * plane + p] = static_cast<T>(px[p * ImageBuffer::kChannels + c]) / T(255);
            }
        }
    }
}

template void images_to_columns<float>(std::span<const ImageBuffer* const>, nn::ColMatrix<float>&);
template void images_to_columns<double>(std::span<const ImageBuffer* const>, nn::ColMatrix<double>&);

bool early_stop(std::span<const double> history, int patience) {
    if (patience < 1 || history.size() < static_cast<std::size_t>(patience) + 1) return false;
    const std::size_t window = history.size() - static_cast<std::size_t>(patience);
    const double best = *std::min_element(history.begin(), history.begin() + static_cast<std::ptrdiff_t>(window));
    for (std::size_t i = window; i < history.size(); ++i) {
        if (history[i] < best) return false;
    }
    return true;
}

TrainRecord run_epochs(int max_epochs, int patience, const std::function<EpochMetrics(int)>& epoch) {
    TrainRecord record;
    std::vector<double> losses;
    for (int e = 1; e <= max_epochs; ++e) {
        EpochMetrics metrics = epoch(e);
        metrics.epoch = e;
        record.epochs.push_back(metrics);
        losses.push_back(metrics.validation_loss);
        record.stop_epoch = e;
        if (early_stop(losses, patience)) {
            record.stop_reason = StopReason::EarlyStop;
            break;
        }
    }
    return record;
}

namespace {

struct BatchTally {
    double loss_sum = 0.0;
    long long correct = 0;
    long long samples = 0;

    void add(const nn::ColMatrix<float>& probs, std::span<const int> targets) {
        for (Eigen::Index j = 0; j < probs.cols(); ++j) {
            Eigen::Index arg = 0;
            probs.col(j).maxCoeff(&arg);
            if (arg == targets[static_cast<std::size_t>(j)]) ++correct;
            const double p = std::clamp(static_cast<double>(probs(targets[static_cast<std::size_t>(j)], j)),
                                        nn::kProbabilityFloor, 1.0);
            loss_sum += -std::log(p);
        }
        samples += probs.cols();
    }
    double loss() const { return samples ? loss_sum / static_cast<double>(samples) : 0.0; }
    double accuracy() const { return samples ? static_cast<double>(correct) / static_cast<double>(samples) : 0.0; }
};

}  // namespace

EvalResult evaluate(const nn::MicroCNN<float>& model, const SampleSet& set, int batch_size) {
    if (set.empty()) throw DataUnavailable("evaluation set is empty");
    if (batch_size < 1) throw ConfigError("batch size must be >= 1");
    EvalResult result;
    BatchTally tally;
    nn::ColMatrix<float> inputs;
    nn::ForwardCache<float> cache;
    std::vector<const ImageBuffer*> images;
    std::vector<int> targets;
    for (std::size_t start = 0; start < set.size(); start += static_cast<std::size_t>(batch_size)) {
        const std::size_t end = std::min(set.size(), start + static_cast<std::size_t>(batch_size));
        images.clear();
        targets.clear();
        for (std::size_t i = start; i < end; ++i) {
            images.push_back(&set[i].image);
            targets.push_back(set[i].label);
        }
        images_to_columns<float>(images, inputs);
        tally.add(nn::forward(model, inputs, {}, &cache), targets);
        ++result.batches;
    }
    result.loss = tally.loss();
    result.accuracy = tally.accuracy();
    result.samples = tally.samples;
    return result;
}

nn::MicroCNN<float> make_model(const RunConfig& config, std::uint64_t seed) {
    nn::Architecture arch;
    arch.input_size = config.input_size;
    nn::MicroCNN<float> model(arch);
    model.initialize(derive_seed(seed, {kTagInit}));
    if (config.mode == TrainMode::Transfer) {
        if (config.pretrained.empty()) throw ConfigError("transfer mode needs 'pretrained' (a trunk checkpoint)");
        const auto source = nn::load_checkpoint<float>(config.pretrained);
        nn::copy_trunk(source, model);
        model.use_dropout = false;
    }
    return model;
}

TrainRecord train(const RunConfig& config, nn::MicroCNN<float>& model, const SampleSet& train_set,
                  const SampleSet& validation, const EpochCallback& on_epoch) {
    if (train_set.empty()) throw DataUnavailable("training set is empty");
    if (validation.empty()) throw DataUnavailable("validation set is empty");
    const bool train_trunk = config.mode == TrainMode::Scratch;

    nn::AdamState<float> adam;
    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::size_t cursor = order.size();
    std::uint64_t pass = 0;
    long long drawn = 0;
    std::uint64_t step = 0;
    std::size_t val_cursor = 0;

    nn::ColMatrix<float> inputs;
    nn::ForwardCache<float> cache;
    std::vector<ImageBuffer> augmented(static_cast<std::size_t>(config.train_batch));
    std::vector<const ImageBuffer*> images;
    std::vector<int> targets;

    auto epoch = [&](int) {
        EpochMetrics metrics;
        BatchTally train_tally;
        for (int s = 0; s < config.steps_per_epoch; ++s, ++step) {
            images.clear();
            targets.clear();
            for (int b = 0; b < config.train_batch; ++b) {
                if (cursor == order.size()) {
                    Xoshiro256 rng(derive_seed(config.seed, {kTagOrder, pass++}));
                    shuffle(std::span<std::size_t>(order), rng);
                    cursor = 0;
                }
                const Sample& sample = train_set[order[cursor++]];
                Xoshiro256 aug(derive_seed(config.seed, {kTagAugment, static_cast<std::uint64_t>(drawn++)}));
                augmented[static_cast<std::size_t>(b)] = augment(sample.image, config.augment, aug);
                images.push_back(&augmented[static_cast<std::size_t>(b)]);
                targets.push_back(sample.label);
            }
            images_to_columns<float>(images, inputs);
            Xoshiro256 dropout(derive_seed(config.seed, {kTagDropout, step}));
            nn::ForwardOptions options{true, &dropout};
            const auto probs = nn::forward(model, inputs, options, &cache);
            train_tally.add(probs, targets);
            const auto grads = nn::backward(model, cache, targets, train_trunk);
            nn::adam_step<float>(model.parameters(), grads, adam, config.learning_rate);
        }
        metrics.train_loss = train_tally.loss();
        metrics.train_accuracy = train_tally.accuracy();
        metrics.train_samples = train_tally.samples;

        BatchTally val_tally;
        val_cursor = 0;
        for (int s = 0; s < config.validation_steps; ++s) {
            images.clear();
            targets.clear();
            for (int b = 0; b < config.validation_batch; ++b) {
                const Sample& sample = validation[val_cursor];
                val_cursor = (val_cursor + 1) % validation.size();
                images.push_back(&sample.image);
                targets.push_back(sample.label);
            }
            images_to_columns<float>(images, inputs);
            val_tally.add(nn::forward(model, inputs, {}, &cache), targets);
        }
        metrics.validation_loss = val_tally.loss();
        metrics.validation_accuracy = val_tally.accuracy();
        return metrics;
    };

    return run_epochs(config.epochs, config.early_stop_patience, [&](int e) {
        EpochMetrics metrics = epoch(e);
        metrics.epoch = e;
        if (on_epoch) on_epoch(metrics);
        return metrics;
    });
}

std::vector<FoldRun> kfold_run_native(const RunConfig& config, std::span<const Manifest> folds,
                                      const fs::path& patch_dir, const EpochCallback& on_epoch) {
    std::vector<FoldRun> runs;
    for (std::size_t i = 0; i < folds.size(); ++i) {
        const Manifest& fold = folds[i];
        const auto load = [&](Split s) {
            const auto ids = ids_in_split(fold, s);
            return load_samples(fold, ids, patch_dir, config.input_size, config.threads);
        };
        const SampleSet train_set = load(Split::Train);
        const SampleSet validation = load(Split::Validation);
        const SampleSet test = load(Split::Test);

        RunConfig fold_config = config;
        fold_config.seed = derive_seed(config.seed, {kTagFold, i});
        auto model = make_model(fold_config, fold_config.seed);
        FoldRun run;
        run.record = train(fold_config, model, train_set, validation, on_epoch);
        const EvalResult eval = evaluate(model, test, config.test_batch);
        run.result = {static_cast<int>(i) + 1, eval.loss, eval.accuracy * 100.0};
        runs.push_back(std::move(run));
    }
    return runs;
}

std::vector<FoldResult> parse_backend_results(std::string_view text, int k) {
    csv::Table t;
    try {
        t = csv::parse(text);
    } catch (const Error& e) {
        throw MalformedResults(std::string("results.csv: ") + e.what());
    }
    if (t.header != std::vector<std::string>{"fold", "loss", "accuracy"}) {
        throw MalformedResults("results.csv header must be 'fold,loss,accuracy'");
    }
    if (t.rows.size() != static_cast<std::size_t>(k)) {
        throw MalformedResults("results.csv has " + std::to_string(t.rows.size()) + " rows, expected " +
                               std::to_string(k));
    }
    auto number = [](const std::string& s, const char* what) {
        try {
            std::size_t used = 0;
            const double v = std::stod(s, &used);
            if (used == s.size() && std::isfinite(v)) return v;
        } catch (const std::exception&) {
        }
        throw MalformedResults(std::string("bad ") + what + " '" + s + "' in results.csv");
    };
    std::vector<FoldResult> out(static_cast<std::size_t>(k));
    std::vector<bool> seen(static_cast<std::size_t>(k), false);
    for (const auto& row : t.rows) {
        const double f = number(row[0], "fold");
        if (f != std::floor(f) || f < 0 || f >= k) throw MalformedResults("fold '" + row[0] + "' out of range");
        const auto idx = static_cast<std::size_t>(f);
        if (seen[idx]) throw MalformedResults("fold " + row[0] + " appears twice");
        seen[idx] = true;
        const double loss = number(row[1], "loss");
        const double acc = number(row[2], "accuracy");
        if (loss < 0) throw MalformedResults("loss " + row[1] + " is negative");
        if (acc < 0 || acc > 1) throw MalformedResults("accuracy " + row[2] + " is outside [0,1]");
        out[idx] = {static_cast<int>(idx) + 1, loss, acc * 100.0};
    }
    return out;
}

std::vector<FoldResult> external_backend_run(const RunConfig& config, std::span<const Manifest> folds,
                                             const std::string& command, const fs::path& job_dir) {
    if (folds.empty()) throw DataUnavailable("no folds to run");
    std::error_code ec;
    fs::create_directories(job_dir, ec);
    if (ec) throw IoError("cannot create " + job_dir.string() + ": " + ec.message());
    const fs::path results = job_dir / "results.csv";
    fs::remove(results, ec);
    save_run_config(job_dir / "config", config);
    for (std::size_t i = 0; i < folds.size(); ++i) {
        const fs::path dir = job_dir / ("fold_" + std::to_string(i));
        fs::create_directories(dir, ec);
        if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
        for (Split s : {Split::Train, Split::Validation, Split::Test}) {
            Manifest part;
            for (const auto& row : folds[i].rows) {
                if (row.split == s) part.rows.push_back(row);
            }
            write_manifest(dir / (std::string(to_string(s)) + ".csv"), part);
        }
    }
    const std::string line = command + " " + quote_arg(job_dir.string());
    const int status = std::system(line.c_str());
    if (status != 0) throw BackendFailed("backend '" + command + "' exited with status " + std::to_string(status));
    if (!fs::exists(results)) throw BackendFailed("backend wrote no " + results.string());
    return parse_backend_results(csv::read_text(results), static_cast<int>(folds.size()));
}

}  // namespace forge
