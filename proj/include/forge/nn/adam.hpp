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

#include "forge/errors.hpp"

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace forge::nn {

// Per-parameter first/second moments of Adam. Defaults follow the original
// Adam publication except epsilon, which uses the common 1e-7.
template <typename T>
struct AdamState {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-7;
    std::int64_t step = 0;
    std::vector<T> m;
    std::vector<T> v;

    AdamState() = default;
    explicit AdamState(std::size_t n) : m(n, T(0)), v(n, T(0)) {}
};

// One bias-corrected Adam update:
//   m <- b1 m + (1-b1) g,  v <- b2 v + (1-b2) g^2,
//   p <- p - lr * (m / (1-b1^t)) / (sqrt(v / (1-b2^t)) + eps).
// A parameter whose gradient has been exactly zero since the first step
// never moves, which is how a frozen trunk stays fixed.
template <typename T>
void adam_step(std::span<T> params, std::span<const T> grads, AdamState<T>& state, double learning_rate) {
    if (state.m.empty() && state.v.empty() && state.step == 0) {
        state.m.assign(params.size(), T(0));
        state.v.assign(params.size(), T(0));
    }
    if (params.size() != grads.size() || state.m.size() != params.size() || state.v.size() != params.size()) {
        throw ShapeMismatch("adam_step: parameter, gradient and moment sizes differ");
    }
    ++state.step;
    const T b1 = static_cast<T>(state.beta1);
    const T b2 = static_cast<T>(state.beta2);
    const T one_b1 = static_cast<T>(1.0 - state.beta1);
    const T one_b2 = static_cast<T>(1.0 - state.beta2);
    const T c1 = static_cast<T>(1.0 - std::pow(state.beta1, static_cast<double>(state.step)));
    const T c2 = static_cast<T>(1.0 - std::pow(state.beta2, static_cast<double>(state.step)));
    const T lr = static_cast<T>(learning_rate);
    const T eps = static_cast<T>(state.epsilon);
    T* m = state.m.data();
    T* v = state.v.data();
    for (std::size_t i = 0; i < params.size(); ++i) {
        const T g = grads[i];
        m[i] = b1 * m[i] + one_b1 * g;
        v[i] = b2 * v[i] + one_b2 * g * g;
        const T m_hat = m[i] / c1;
        const T v_hat = v[i] / c2;
        params[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
    }
}

}  // namespace forge::nn
