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

#include "forge/rng.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace forge::nn {

// conv3x3(c0)+ReLU, pool2, conv3x3(c1)+ReLU, pool2, conv3x3(c2)+ReLU, pool2,
// flatten, dense(hidden)+ReLU, [dropout], dense(classes), softmax.
// Convolutions use stride 1 with one pixel of zero padding.
struct Architecture {
    int input_size = 64;
    int input_channels = 3;
    std::array<int, 3> conv_channels{16, 32, 64};
    int hidden = 512;
    int classes = 5;
    double dropout = 0.5;  // drop probability after the hidden layer

    int flat_size() const noexcept {
        const int s = input_size / 8;
        return conv_channels[2] * s * s;
    }
    int input_length() const noexcept { return input_channels * input_size * input_size; }

    friend bool operator==(const Architecture&, const Architecture&) = default;
};

enum TensorId : int {
    kConv1W, kConv1B, kConv2W, kConv2B, kConv3W, kConv3B, kFc1W, kFc1B, kFc2W, kFc2B,
    kTensorCount
};

// Position of one parameter tensor inside the flat parameter vector; weights
// are row-major (out, in) with conv kernels laid out as (out, in, ky, kx).
struct TensorSlot {
    std::size_t offset = 0;
    int rows = 0;
    int cols = 0;
    std::size_t size() const noexcept { return static_cast<std::size_t>(rows) * cols; }
};

// First index of the dense head in the flat parameter vector.
std::size_t head_offset(const std::array<TensorSlot, kTensorCount>& layout) noexcept;

template <typename T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using ColMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;

template <typename T>
class MicroCNN {
public:
    explicit MicroCNN(Architecture arch = {});

    const Architecture& architecture() const noexcept { return arch_; }
    const std::array<TensorSlot, kTensorCount>& layout() const noexcept { return layout_; }

    std::span<T> parameters() noexcept { return params_; }
    std::span<const T> parameters() const noexcept { return params_; }
    std::span<T> tensor(TensorId id) noexcept {
        return std::span<T>(params_).subspan(layout_[id].offset, layout_[id].size());
    }
    std::span<const T> tensor(TensorId id) const noexcept {
        return std::span<const T>(params_).subspan(layout_[id].offset, layout_[id].size());
    }

    // Fan-in scaled uniform weights U(-sqrt(6/fan_in), +sqrt(6/fan_in)), zero biases.
    void initialize(std::uint64_t seed);

    // When false, dropout is skipped even in training mode (transfer head).
    bool use_dropout = true;

    template <typename U>
    MicroCNN<U> cast() const {
        MicroCNN<U> out(arch_);
        auto dst = out.parameters();
        for (std::size_t i = 0; i < params_.size(); ++i) dst[i] = static_cast<U>(params_[i]);
        out.use_dropout = use_dropout;
        return out;
    }

private:
    Architecture arch_;
    std::array<TensorSlot, kTensorCount> layout_{};
    std::vector<T> params_;
};

// Intermediate values kept by a forward pass for the backward pass.
template <typename T>
struct ForwardCache {
    int batch = 0;
    struct ConvStage {
        int channels_in = 0, size_in = 0;
        RowMatrix<T> cols;       // im2col, (cin*9) x (n*s*s)
        RowMatrix<T> pre;        // pre-activation, cout x (n*s*s)
        RowMatrix<T> pooled;     // cout x (n*(s/2)^2)
        std::vector<std::uint8_t> argmax;  // winner within each 2x2 window
    };
    std::array<ConvStage, 3> conv;
    ColMatrix<T> flat;     // flat_size x n
    ColMatrix<T> hidden_pre;  // hidden x n
    ColMatrix<T> hidden;   // after ReLU and dropout
    ColMatrix<T> mask;     // dropout scale per unit (empty when no dropout)
    ColMatrix<T> probs;    // classes x n
};

struct ForwardOptions {
    bool training = false;
    Xoshiro256* dropout_stream = nullptr;  // required when training with dropout
};

// Numerically stable softmax of each column.
template <typename T>
ColMatrix<T> softmax_columns(const ColMatrix<T>& logits);

// Softmax of a single logit vector.
std::vector<double> softmax(std::span<const double> logits);

// -log(p_target), p clamped to [1e-12, 1].
inline constexpr double kProbabilityFloor = 1e-12;
double cross_entropy(std::span<const double> probabilities, int target);

// `inputs` is (input_length x n), each column one sample in CHW order with
// values in [0,1]. Returns (classes x n) probabilities. Throws ShapeMismatch.
template <typename T>
ColMatrix<T> forward(const MicroCNN<T>& model, const ColMatrix<T>& inputs, const ForwardOptions& options = {},
                     ForwardCache<T>* cache = nullptr);

// Mean cross-entropy of `probs` against integer targets.
template <typename T>
double mean_cross_entropy(const ColMatrix<T>& probs, std::span<const int> targets);

// Exact gradient of the mean cross-entropy with respect to every parameter,
// flat in the model's layout. With `train_trunk` false the convolutional
// gradients are left at zero and backpropagation stops at the flatten layer.
template <typename T>
std::vector<T> backward(const MicroCNN<T>& model, const ForwardCache<T>& cache, std::span<const int> targets,
                        bool train_trunk = true);

// Binary checkpoint: magic, architecture, float32 parameters.
template <typename T>
void save_checkpoint(const std::filesystem::path& path, const MicroCNN<T>& model);
template <typename T>
MicroCNN<T> load_checkpoint(const std::filesystem::path& path);

// Copies the convolutional trunk of `source` into `target`; architectures
// must agree on the trunk (ShapeMismatch otherwise).
template <typename T>
void copy_trunk(const MicroCNN<T>& source, MicroCNN<T>& target);

}  // namespace forge::nn
