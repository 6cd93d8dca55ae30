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
#include "forge/nn/adam.hpp"
#include "forge/nn/micro_cnn.hpp"
#include "grad_check.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>

using namespace forge;
using namespace forge::nn;

namespace {

Architecture tiny(int input_size = 8) {
    Architecture a;
    a.input_size = input_size;
    a.conv_channels = {3, 4, 4};
    a.hidden = 6;
    return a;
}

ColMatrix<double> random_inputs(const Architecture& a, int n, std::uint64_t seed) {
    Xoshiro256 rng(seed);
    ColMatrix<double> x(a.input_length(), n);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform();
    return x;
}

// Naive exp / sum in extended precision, no max subtraction.
std::vector<long double> softmax_oracle(const std::vector<double>& logits) {
    std::vector<long double> e;
    for (double l : logits) e.push_back(std::exp(static_cast<long double>(l)));
    const long double s = std::accumulate(e.begin(), e.end(), 0.0L);
    for (auto& v : e) v /= s;
    return e;
}

}  // namespace

TEST_CASE("softmax: symmetry, shift invariance, stability") {
    const std::vector<double> zero(5, 0.0);
    for (double p : softmax(zero)) CHECK(p == doctest::Approx(0.2).epsilon(1e-15));

    const std::vector<double> l = {0.3, -1.2, 2.5, 0.0, 0.7};
    std::vector<double> shifted = l;
    for (auto& v : shifted) v += 123.0;
    const auto a = softmax(l), b = softmax(shifted);
    for (int i = 0; i < 5; ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));

    for (const auto& logits : {l, std::vector<double>{1000, 0, 0, 0, 0}, std::vector<double>{-700, 5, 700, 3, 0}}) {
        const auto p = softmax(logits);
        const auto o = softmax_oracle(logits);
        double sum = 0;
        for (int i = 0; i < 5; ++i) {
            CHECK(std::isfinite(p[i]));
            CHECK(std::abs(p[i] - static_cast<double>(o[i])) < 1e-12);
            sum += p[i];
        }
        CHECK(std::abs(sum - 1.0) < 1e-6);
    }
    CHECK(softmax(std::vector<double>{1000, 0, 0, 0, 0})[0] == doctest::Approx(1.0));
}

TEST_CASE("cross_entropy: zero, uniform, clamped") {
    CHECK(cross_entropy(std::vector<double>{1, 0, 0, 0, 0}, 0) == 0.0);
    CHECK(cross_entropy(std::vector<double>(5, 0.2), 3) == doctest::Approx(std::log(5.0)).epsilon(1e-12));
    CHECK(cross_entropy(std::vector<double>(5, 0.2), 3) == doctest::Approx(1.60944).epsilon(1e-5));
    const double clamped = cross_entropy(std::vector<double>{1, 0, 0, 0, 0}, 2);
    CHECK(std::isfinite(clamped));
    CHECK(clamped == doctest::Approx(-std::log(1e-12)));
    CHECK(clamped == doctest::Approx(27.63).epsilon(1e-3));
}

TEST_CASE("forward: zero head gives uniform output, shape and duplicates") {
    MicroCNN<double> model(tiny());
    model.initialize(3);
    for (auto& w : model.tensor(kFc2W)) w = 0;
    for (auto& b : model.tensor(kFc2B)) b = 0;
    const auto x = random_inputs(model.architecture(), 4, 1);
    const auto p = forward(model, x);
    CHECK(p.rows() == 5);
    CHECK(p.cols() == 4);
    for (Eigen::Index i = 0; i < p.size(); ++i) CHECK(p.data()[i] == doctest::Approx(0.2).epsilon(1e-15));

    model.initialize(4);
    ColMatrix<double> dup(x.rows(), 2);
    dup.col(0) = x.col(2);
    dup.col(1) = x.col(2);
    const auto q = forward(model, dup);
    CHECK(q.col(0) == q.col(1));
    CHECK(std::abs(q.col(0).sum() - 1.0) < 1e-6);

    CHECK_THROWS_AS(forward(model, ColMatrix<double>(7, 2)), ShapeMismatch);
}

TEST_CASE("forward: default architecture shape") {
    MicroCNN<float> model;
    model.initialize(1);
    CHECK(model.architecture().flat_size() == 64 * 8 * 8);
    ColMatrix<float> x = ColMatrix<float>::Constant(3 * 64 * 64, 2, 0.5f);
    const auto p = forward(model, x);
    CHECK(p.rows() == 5);
    CHECK(p.cols() == 2);
}

TEST_CASE("backward: analytic gradients match central differences") {
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
        const auto r = test::gradient_check(seed);
        CAPTURE(seed);
        CHECK(r.max_relative_error < 1e-4);
        CHECK(r.checked > 10 * std::max(1, r.skipped));
    }
}

TEST_CASE("backward: 3-sample batch in double precision") {
    MicroCNN<double> model(tiny(16));
    model.initialize(17);
    const auto x = random_inputs(model.architecture(), 3, 2);
    const std::vector<int> t = {0, 3, 4};
    ForwardCache<double> cache;
    forward(model, x, {}, &cache);
    const auto g = backward(model, cache, t);
    auto params = model.parameters();
    double worst = 0;
    for (std::size_t i = 0; i < params.size(); i += 7) {
        const double saved = params[i];
        params[i] = saved + 1e-5;
        const double lp = mean_cross_entropy(forward(model, x), t);
        params[i] = saved - 1e-5;
        const double lm = mean_cross_entropy(forward(model, x), t);
        params[i] = saved;
        const double n = (lp - lm) / 2e-5;
        worst = std::max(worst, std::abs(g[i] - n) / std::max({std::abs(g[i]), std::abs(n), 1e-6}));
    }
    CHECK(worst < 1e-4);
}

TEST_CASE("backward: head bias gradient is the mean of p - y") {
    MicroCNN<double> model(tiny());
    model.initialize(5);
    const auto x = random_inputs(model.architecture(), 3, 9);
    const std::vector<int> t = {1, 1, 4};
    ForwardCache<double> cache;
    const auto p = forward(model, x, {}, &cache);
    const auto g = backward(model, cache, t);
    const auto off = model.layout()[kFc2B].offset;
    for (int k = 0; k < 5; ++k) {
        double expect = 0;
        for (int j = 0; j < 3; ++j) expect += (p(k, j) - (t[static_cast<std::size_t>(j)] == k)) / 3.0;
        CHECK(g[off + static_cast<std::size_t>(k)] == doctest::Approx(expect).epsilon(1e-12));
    }

    // Saturated head on the targets: essentially no learning signal.
    for (auto& w : model.tensor(kFc2W)) w = 0;
    model.tensor(kFc2B)[1] = 60;
    const std::vector<int> ones = {1, 1, 1};
    forward(model, x, {}, &cache);
    for (double v : backward(model, cache, ones)) CHECK(std::abs(v) < 1e-20);
}

TEST_CASE("backward: duplicating the batch leaves the mean gradient unchanged") {
    MicroCNN<double> model(tiny());
    model.initialize(6);
    const auto x = random_inputs(model.architecture(), 2, 4);
    ColMatrix<double> x2(x.rows(), 4);
    x2 << x, x;
    const std::vector<int> t = {2, 0}, t2 = {2, 0, 2, 0};
    ForwardCache<double> c1, c2;
    forward(model, x, {}, &c1);
    forward(model, x2, {}, &c2);
    const auto g1 = backward(model, c1, t), g2 = backward(model, c2, t2);
    for (std::size_t i = 0; i < g1.size(); ++i) CHECK(g1[i] == doctest::Approx(g2[i]).epsilon(1e-10));
}

TEST_CASE("backward: frozen trunk gets zero gradient") {
    MicroCNN<double> model(tiny());
    model.initialize(8);
    const auto x = random_inputs(model.architecture(), 2, 4);
    ForwardCache<double> cache;
    forward(model, x, {}, &cache);
    const std::vector<int> t = {0, 1};
    const auto g = backward(model, cache, t, false);
    const auto full = backward(model, cache, t, true);
    const auto head = head_offset(model.layout());
    for (std::size_t i = 0; i < head; ++i) CHECK(g[i] == 0.0);
    for (std::size_t i = head; i < g.size(); ++i) CHECK(g[i] == full[i]);
}

TEST_CASE("dropout: evaluation ignores the stream, training is unbiased") {
    auto arch = tiny();
    arch.hidden = 8;
    MicroCNN<double> model(arch);
    model.initialize(10);
    // Flattened features are non-negative, so this keeps every hidden unit active.
    for (auto& w : model.tensor(kFc1W)) w = std::abs(w);
    for (auto& b : model.tensor(kFc1B)) b = 0.2;
    const auto x = random_inputs(arch, 1, 3);

    Xoshiro256 s1(1), s2(999);
    ForwardOptions e1, e2;
    e1.dropout_stream = &s1;
    e2.dropout_stream = &s2;
    ForwardCache<double> eval;
    const auto pe = forward(model, x, e1, &eval);
    CHECK(pe == forward(model, x, e2));
    CHECK(eval.mask.size() == 0);

    Xoshiro256 stream(77);
    ForwardOptions train;
    train.training = true;
    train.dropout_stream = &stream;
    constexpr int kDraws = 40000;
    ColMatrix<double> sum = ColMatrix<double>::Zero(arch.hidden, 1);
    ForwardCache<double> c;
    for (int i = 0; i < kDraws; ++i) {
        forward(model, x, train, &c);
        for (Eigen::Index k = 0; k < c.mask.size(); ++k) {
            const double m = c.mask.data()[k];
            CHECK_MESSAGE((m == 0.0 || m == 2.0), "mask value " << m);
        }
        sum += c.hidden;
    }
    for (int k = 0; k < arch.hidden; ++k) {
        const double expect = eval.hidden(k, 0);
        REQUIRE(expect > 0);
        CHECK(std::abs(sum(k, 0) / kDraws - expect) <= 0.02 * expect);
    }

    model.use_dropout = false;
    CHECK(forward(model, x, train) == pe);
}

TEST_CASE("adam: zero gradient leaves parameters, moments decay") {
    std::vector<double> p = {1.0, -2.0};
    AdamState<double> st(2);
    st.m = {0.5, -0.5};
    st.v = {0.25, 0.04};
    const std::vector<double> g = {0.0, 0.0};
    // With nonzero moments the step is not zero; start from a clean state instead.
    AdamState<double> clean;
    adam_step<double>(p, g, clean, 1e-3);
    CHECK(p == std::vector<double>{1.0, -2.0});
    CHECK(clean.step == 1);
    std::vector<double> q = {1.0, -2.0};
    adam_step<double>(q, g, st, 1e-3);
    CHECK(st.m[0] == doctest::Approx(0.45));
    CHECK(st.v[1] == doctest::Approx(0.04 * 0.999));
    CHECK_THROWS_AS(adam_step<double>(q, std::vector<double>{1.0}, st, 1e-3), ShapeMismatch);
}

TEST_CASE("adam: first step closed form") {
    for (double g : {0.3, -2.0, 1e-6}) {
        std::vector<double> p = {0.0};
        AdamState<double> st;
        adam_step<double>(p, std::vector<double>{g}, st, 1e-5);
        // m_hat = g, v_hat = g^2 at t = 1.
        const double expect = -1e-5 * g / (std::abs(g) + 1e-7);
        CHECK(p[0] == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("adam: matches a reference trace") {
    // Straight-line long double implementation of the same update.
    Xoshiro256 rng(31);
    std::vector<double> p(6), grads(6);
    for (auto& v : p) v = rng.uniform(-1, 1);
    std::vector<long double> rp(p.begin(), p.end()), rm(6, 0), rv(6, 0);
    AdamState<double> st;
    const double lr = 1e-3;
    for (int t = 1; t <= 200; ++t) {
        for (auto& g : grads) g = rng.uniform(-1, 1) * (t % 7 == 0 ? 0.0 : 1.0);
        adam_step<double>(p, grads, st, lr);
        for (std::size_t i = 0; i < 6; ++i) {
            rm[i] = 0.9L * rm[i] + 0.1L * grads[i];
            rv[i] = 0.999L * rv[i] + 0.001L * grads[i] * grads[i];
            const long double mh = rm[i] / (1 - std::pow(0.9L, t));
            const long double vh = rv[i] / (1 - std::pow(0.999L, t));
            rp[i] -= lr * mh / (std::sqrt(vh) + 1e-7L);
        }
    }
    for (std::size_t i = 0; i < 6; ++i) CHECK(std::abs(p[i] - static_cast<double>(rp[i])) < 1e-12);
}

TEST_CASE("checkpoint: round trip and trunk copy") {
    MicroCNN<float> model(tiny());
    model.initialize(12);
    model.use_dropout = false;
    test::TempDir dir;
    save_checkpoint(dir / "m.bin", model);
    const auto back = load_checkpoint<float>(dir / "m.bin");
    CHECK(back.architecture() == model.architecture());
    CHECK(back.use_dropout == false);
    CHECK(std::equal(back.parameters().begin(), back.parameters().end(), model.parameters().begin()));

    MicroCNN<float> other(tiny());
    other.initialize(13);
    copy_trunk(model, other);
    const auto head = head_offset(model.layout());
    for (std::size_t i = 0; i < head; ++i) CHECK(other.parameters()[i] == model.parameters()[i]);
    CHECK(other.parameters()[head] != model.parameters()[head]);

    MicroCNN<float> wide(tiny(16));
    CHECK_THROWS_AS(copy_trunk(model, wide), ShapeMismatch);
    test::TempDir d2;
    CHECK_THROWS(load_checkpoint<float>(d2 / "missing.bin"));
}
