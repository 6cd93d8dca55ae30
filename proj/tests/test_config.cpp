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

#include "forge/errors.hpp"
#include "forge/run_config.hpp"
#include "test_util.hpp"

#include <doctest.h>

using namespace forge;

TEST_CASE("run config: published defaults") {
    const auto k = RunConfig::defaults(Protocol::KFold, TrainMode::Transfer);
    CHECK(k.train_batch == 24);
    CHECK(k.validation_batch == 56);
    CHECK(k.validation_steps == 6);
    CHECK(k.test_batch == 45);
    CHECK(k.steps_per_epoch == 80);
    CHECK(k.epochs == 100);
    CHECK(k.learning_rate == 1e-5);
    CHECK(k.early_stop_patience == 8);
    CHECK(k.k == 10);

    const auto h = RunConfig::defaults(Protocol::Holdout, TrainMode::Scratch);
    CHECK(h.train_batch == 26);
    CHECK(h.validation_batch == 70);
    CHECK(h.validation_steps == 5);
    CHECK(h.epochs == 200);
}

TEST_CASE("run config: empty object and protocol-aware defaults") {
    const auto c = parse_run_config("{}");
    CHECK(c.protocol == Protocol::KFold);
    CHECK(c.mode == TrainMode::Scratch);
    CHECK(c.epochs == 200);
    const auto h = parse_run_config(R"({"protocol":"holdout","mode":"transfer"})");
    CHECK(h.train_batch == 26);
    CHECK(h.epochs == 100);
}

TEST_CASE("run config: JSON round trip") {
    auto c = RunConfig::defaults(Protocol::Holdout, TrainMode::Transfer);
    c.seed = 123456789012345ULL;
    c.learning_rate = 3e-4;
    c.augment.brightness_jitter = 0.1;
    c.filter.blank_contrast = 0.07;
    c.pretrained = "trunk.bin";
    const auto back = parse_run_config(format_run_config(c));
    CHECK(format_run_config(back) == format_run_config(c));
    CHECK(back.seed == c.seed);
    CHECK(back.filter == c.filter);

    test::TempDir dir;
    save_run_config(dir / "c.json", c);
    CHECK(format_run_config(load_run_config(dir / "c.json")) == format_run_config(c));
}

TEST_CASE("run config: seed fallback") {
    CHECK(parse_run_config("{}", 42).seed == 42);
    CHECK(parse_run_config(R"({"seed": 7})", 42).seed == 7);
    CHECK(parse_run_config("{}").seed == 0);
}

TEST_CASE("run config: rejected input") {
    CHECK_THROWS_AS(parse_run_config(R"({"epochz": 3})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"augment": {"shear": 1}})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"epochs": 0})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"train_batch": -1})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"learning_rate": 0})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"mode": "finetune"})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"epochs": "ten"})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config("[1,2]"), ConfigError);
    CHECK_THROWS_AS(parse_run_config("{"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"filter": {"review_band": 0.5}})"), ConfigError);
}
