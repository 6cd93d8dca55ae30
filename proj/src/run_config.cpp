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

#include "forge/run_config.hpp"

#include "forge/csv.hpp"
#include "forge/errors.hpp"

#include <json.hpp>

#include <set>

namespace forge {

using nlohmann::json;

RunConfig RunConfig::defaults(Protocol protocol, TrainMode mode) {
    RunConfig c;
    c.protocol = protocol;
    c.mode = mode;
    c.epochs = mode == TrainMode::Transfer ? 100 : 200;
    if (protocol == Protocol::Holdout) {
        c.train_batch = 26;
        c.validation_batch = 70;
        c.validation_steps = 5;
    }
    c.name = std::string("microcnn-") + std::string(to_string(mode));
    return c;
}

void RunConfig::validate() const {
    for (int v : {epochs, steps_per_epoch, train_batch, validation_batch, validation_steps, test_batch,
                  early_stop_patience, input_size}) {
        if (v < 1) throw ConfigError("all counts in the run config must be >= 1");
    }
    if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
    if (k < 2) throw ConfigError("k must be >= 2");
    if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
        throw ConfigError("validation_fraction must be in [0,1)");
    }
    if (input_size % 8 != 0) throw ConfigError("input_size must be a multiple of 8");
    augment.validate();
    filter.validate();
}

std::string_view to_string(TrainMode m) noexcept { return m == TrainMode::Transfer ? "transfer" : "scratch"; }
std::string_view to_string(Protocol p) noexcept { return p == Protocol::KFold ? "kfold" : "holdout"; }

namespace {

template <typename V>
void take(const json& j, const char* key, V& out) {
    if (j.contains(key)) out = j.at(key).get<V>();
}

void reject_unknown(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
    std::set<std::string> known(keys.begin(), keys.end());
    for (const auto& [key, value] : j.items()) {
        if (!known.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
    }
}

}  // namespace

RunConfig parse_run_config(std::string_view text, std::optional<std::uint64_t> fallback_seed) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    reject_unknown(j,
                   {"name", "mode", "protocol", "epochs", "steps_per_epoch", "train_batch", "validation_batch",
                    "validation_steps", "test_batch", "learning_rate", "early_stop_patience", "seed", "k",
                    "validation_fraction", "input_size", "threads", "patch_dir", "pretrained", "augment", "filter"},
                   "run config");
    try {
        Protocol protocol = Protocol::KFold;
        TrainMode mode = TrainMode::Scratch;
        if (j.contains("protocol")) {
            const auto p = j.at("protocol").get<std::string>();
            if (p == "kfold") protocol = Protocol::KFold;
            else if (p == "holdout") protocol = Protocol::Holdout;
            else throw ConfigError("protocol must be 'kfold' or 'holdout'");
        }
        if (j.contains("mode")) {
            const auto m = j.at("mode").get<std::string>();
            if (m == "transfer") mode = TrainMode::Transfer;
            else if (m == "scratch") mode = TrainMode::Scratch;
            else throw ConfigError("mode must be 'transfer' or 'scratch'");
        }
        RunConfig c = RunConfig::defaults(protocol, mode);
        if (fallback_seed) c.seed = *fallback_seed;
        take(j, "name", c.name);
        take(j, "epochs", c.epochs);
        take(j, "steps_per_epoch", c.steps_per_epoch);
        take(j, "train_batch", c.train_batch);
        take(j, "validation_batch", c.validation_batch);
        take(j, "validation_steps", c.validation_steps);
        take(j, "test_batch", c.test_batch);
        take(j, "learning_rate", c.learning_rate);
        take(j, "early_stop_patience", c.early_stop_patience);
        take(j, "seed", c.seed);
        take(j, "k", c.k);
        take(j, "validation_fraction", c.validation_fraction);
        take(j, "input_size", c.input_size);
        take(j, "threads", c.threads);
        take(j, "patch_dir", c.patch_dir);
        take(j, "pretrained", c.pretrained);
        if (j.contains("augment")) {
            const auto& a = j.at("augment");
            reject_unknown(a, {"horizontal_flip", "vertical_flip", "rotation", "brightness_jitter"}, "augment");
            take(a, "horizontal_flip", c.augment.horizontal_flip);
            take(a, "vertical_flip", c.augment.vertical_flip);
            take(a, "rotation", c.augment.rotation);
            take(a, "brightness_jitter", c.augment.brightness_jitter);
        }
        if (j.contains("filter")) {
            const auto& f = j.at("filter");
            reject_unknown(f, {"dark_mean", "dark_p95", "blank_contrast", "review_band"}, "filter");
            take(f, "dark_mean", c.filter.dark_mean);
            take(f, "dark_p95", c.filter.dark_p95);
            take(f, "blank_contrast", c.filter.blank_contrast);
            take(f, "review_band", c.filter.review_band);
        }
        c.validate();
        return c;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config has a field of the wrong type: ") + e.what());
    }
}

std::string format_run_config(const RunConfig& c) {
    json j = {
        {"name", c.name},
        {"mode", std::string(to_string(c.mode))},
        {"protocol", std::string(to_string(c.protocol))},
        {"epochs", c.epochs},
        {"steps_per_epoch", c.steps_per_epoch},
        {"train_batch", c.train_batch},
        {"validation_batch", c.validation_batch},
        {"validation_steps", c.validation_steps},
        {"test_batch", c.test_batch},
        {"learning_rate", c.learning_rate},
        {"early_stop_patience", c.early_stop_patience},
        {"seed", c.seed},
        {"k", c.k},
        {"validation_fraction", c.validation_fraction},
        {"input_size", c.input_size},
        {"threads", c.threads},
        {"patch_dir", c.patch_dir},
        {"pretrained", c.pretrained},
        {"augment",
         {{"horizontal_flip", c.augment.horizontal_flip},
          {"vertical_flip", c.augment.vertical_flip},
          {"rotation", c.augment.rotation},
          {"brightness_jitter", c.augment.brightness_jitter}}},
        {"filter",
         {{"dark_mean", c.filter.dark_mean},
          {"dark_p95", c.filter.dark_p95},
          {"blank_contrast", c.filter.blank_contrast},
          {"review_band", c.filter.review_band}}},
    };
    return j.dump(2) + "\n";
}

RunConfig load_run_config(const std::filesystem::path& path, std::optional<std::uint64_t> fallback_seed) {
    try {
        return parse_run_config(csv::read_text(path), fallback_seed);
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

void save_run_config(const std::filesystem::path& path, const RunConfig& config) {
    csv::write_text(path, format_run_config(config));
}

}  // namespace forge
