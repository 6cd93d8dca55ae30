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

#include "forge/nn/micro_cnn.hpp"
#include "forge/rng.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace forge::test {

struct GradCheckResult {
    double max_relative_error = 0.0;
    int checked = 0;
    int skipped = 0;  // perturbation crossed a ReLU or max-pool kink
};

inline constexpr double kFiniteDifferenceStep = 1e-5;
inline constexpr double kRelativeErrorFloor = 1e-6;

namespace detail {

// Everything that decides which branch of a piecewise-linear op is taken.
struct Pattern {
    std::vector<bool> positive;
    std::vector<std::uint8_t> argmax;
    bool operator==(const Pattern&) const = default;
};

inline Pattern pattern_of(const nn::ForwardCache<double>& c) {
    Pattern p;
    for (const auto& s : c.conv) {
        for (Eigen::Index i = 0; i < s.pre.size(); ++i) p.positive.push_back(s.pre.data()[i] > 0);
        p.argmax.insert(p.argmax.end(), s.argmax.begin(), s.argmax.end());
    }
    for (Eigen::Index i = 0; i < c.hidden_pre.size(); ++i) p.positive.push_back(c.hidden_pre.data()[i] > 0);
    return p;
}

}  // namespace detail

// Random small architecture, batch and targets drawn from `seed`; compares
// every analytic partial against a central difference.
inline GradCheckResult gradient_check(std::uint64_t seed) {
    Xoshiro256 rng(seed);
    nn::Architecture arch;
    arch.input_size = rng.below(2) ? 8 : 16;
    arch.input_channels = 1 + static_cast<int>(rng.below(3));
    for (auto& c : arch.conv_channels) c = 2 + static_cast<int>(rng.below(3));
    arch.hidden = 3 + static_cast<int>(rng.below(6));
    arch.classes = 5;
    const bool with_dropout = rng.below(2) == 1;

    nn::MicroCNN<double> model(arch);
    model.initialize(rng());
    // Nonzero biases so that kinks are not aligned with zero inputs.
    for (int id : {nn::kConv1B, nn::kConv2B, nn::kConv3B, nn::kFc1B, nn::kFc2B}) {
        for (auto& b : model.tensor(static_cast<nn::TensorId>(id))) b = rng.uniform(-0.1, 0.1);
    }

    const int n = 1 + static_cast<int>(rng.below(3));
    nn::ColMatrix<double> x(arch.input_length(), n);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform();
    std::vector<int> targets;
    for (int i = 0; i < n; ++i) targets.push_back(static_cast<int>(rng.below(5)));

    const std::uint64_t dropout_seed = rng();
    auto run = [&](nn::ForwardCache<double>& cache) {
        Xoshiro256 stream(dropout_seed);
        nn::ForwardOptions opt;
        opt.training = with_dropout;
        opt.dropout_stream = &stream;
        const auto probs = nn::forward(model, x, opt, &cache);
        return nn::mean_cross_entropy(probs, targets);
    };

    nn::ForwardCache<double> base;
    run(base);
    const auto analytic = nn::backward(model, base, targets);
    const auto base_pattern = detail::pattern_of(base);

    GradCheckResult result;
    auto params = model.parameters();
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double saved = params[i];
        nn::ForwardCache<double> plus, minus;
        params[i] = saved + kFiniteDifferenceStep;
        const double lp = run(plus);
        params[i] = saved - kFiniteDifferenceStep;
        const double lm = run(minus);
        params[i] = saved;
        if (!(detail::pattern_of(plus) == base_pattern) || !(detail::pattern_of(minus) == base_pattern)) {
            ++result.skipped;
            continue;
        }
        const double numeric = (lp - lm) / (2 * kFiniteDifferenceStep);
        const double a = analytic[i];
        const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), kRelativeErrorFloor});
        result.max_relative_error = std::max(result.max_relative_error, rel);
        ++result.checked;
    }
    return result;
}

}  // namespace forge::test
