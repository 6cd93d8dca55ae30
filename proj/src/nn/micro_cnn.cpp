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

#include "forge/nn/micro_cnn.hpp"

#include "forge/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

namespace forge::nn {

std::size_t head_offset(const std::array<TensorSlot, kTensorCount>& layout) noexcept {
    return layout[kFc1W].offset;
}

template <typename T>
MicroCNN<T>::MicroCNN(Architecture arch) : arch_(arch) {
    if (arch_.input_size < 8 || arch_.input_size % 8 != 0) {
        throw ShapeMismatch("input size must be a positive multiple of 8");
    }
    std::size_t offset = 0;
    auto add = [&](TensorId id, int rows, int cols) {
        layout_[id] = TensorSlot{offset, rows, cols};
        offset += layout_[id].size();
    };
    int cin = arch_.input_channels;
    for (int i = 0; i < 3; ++i) {
        const int cout = arch_.conv_channels[static_cast<std::size_t>(i)];
        add(static_cast<TensorId>(kConv1W + 2 * i), cout, cin * 9);
        add(static_cast<TensorId>(kConv1B + 2 * i), cout, 1);
        cin = cout;
    }
    add(kFc1W, arch_.hidden, arch_.flat_size());
    add(kFc1B, arch_.hidden, 1);
    add(kFc2W, arch_.classes, arch_.hidden);
    add(kFc2B, arch_.classes, 1);
    params_.assign(offset, T(0));
}

template <typename T>
void MicroCNN<T>::initialize(std::uint64_t seed) {
    Xoshiro256 rng(seed);
    std::fill(params_.begin(), params_.end(), T(0));
    for (TensorId id : {kConv1W, kConv2W, kConv3W, kFc1W, kFc2W}) {
        const double bound = std::sqrt(6.0 / layout_[id].cols);
        for (auto& w : tensor(id)) w = static_cast<T>(rng.uniform(-bound, bound));
    }
}

namespace {

template <typename T>
Eigen::Map<const RowMatrix<T>> weights(const MicroCNN<T>& model, TensorId id) {
    const auto& slot = model.layout()[id];
    return {model.parameters().data() + slot.offset, slot.rows, slot.cols};
}

template <typename T>
Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>> bias(const MicroCNN<T>& model, TensorId id) {
    const auto& slot = model.layout()[id];
    return {model.parameters().data() + slot.offset, slot.rows};
}

// in: channels x (n*s*s); cols: (channels*9) x (n*s*s).
template <typename T>
void im2col(const RowMatrix<T>& in, int channels, int s, int n, RowMatrix<T>& cols) {
    const long hw = static_cast<long>(s) * s;
    const long ncols = hw * n;
    cols.resize(channels * 9, ncols);
    for (int c = 0; c < channels; ++c) {
        const T* src = in.row(c).data();
        for (int ky = 0; ky < 3; ++ky) {
            for (int kx = 0; kx < 3; ++kx) {
                T* dst = cols.row(c * 9 + ky * 3 + kx).data();
                for (int b = 0; b < n; ++b) {
                    const T* img = src + b * hw;
                    T* out = dst + b * hw;
                    for (int y = 0; y < s; ++y) {
                        const int sy = y + ky - 1;
                        T* orow = out + static_cast<long>(y) * s;
                        if (sy < 0 || sy >= s) {
                            std::fill(orow, orow + s, T(0));
                            continue;
                        }
                        const T* irow = img + static_cast<long>(sy) * s;
                        const int x0 = kx == 0 ? 1 : 0;
                        const int x1 = kx == 2 ? s - 1 : s;
                        if (x0) orow[0] = T(0);
                        if (x1 < s) orow[s - 1] = T(0);
                        std::memcpy(orow + x0, irow + x0 + kx - 1, sizeof(T) * static_cast<std::size_t>(x1 - x0));
                    }
                }
            }
        }
    }
}

template <typename T>
void col2im(const RowMatrix<T>& cols, int channels, int s, int n, RowMatrix<T>& out) {
    const long hw = static_cast<long>(s) * s;
    out.setZero(channels, hw * n);
    for (int c = 0; c < channels; ++c) {
        T* dst = out.row(c).data();
        for (int ky = 0; ky < 3; ++ky) {
            for (int kx = 0; kx < 3; ++kx) {
                const T* src = cols.row(c * 9 + ky * 3 + kx).data();
                for (int b = 0; b < n; ++b) {
                    T* img = dst + b * hw;
                    const T* in = src + b * hw;
                    for (int y = 0; y < s; ++y) {
                        const int sy = y + ky - 1;
                        if (sy < 0 || sy >= s) continue;
                        T* irow = img + static_cast<long>(sy) * s;
                        const T* crow = in + static_cast<long>(y) * s;
                        const int x0 = kx == 0 ? 1 : 0;
                        const int x1 = kx == 2 ? s - 1 : s;
                        T* target = irow + x0 + kx - 1;
                        for (int x = x0; x < x1; ++x) target[x - x0] += crow[x];
                    }
                }
            }
        }
    }
}

// ReLU followed by 2x2 max pooling; records the winning window position.
template <typename T>
void relu_pool(const RowMatrix<T>& pre, int channels, int s, int n, RowMatrix<T>& pooled,
               std::vector<std::uint8_t>& argmax) {
    const int h = s / 2;
    const long hw = static_cast<long>(s) * s;
    const long phw = static_cast<long>(h) * h;
    pooled.resize(channels, phw * n);
    argmax.resize(static_cast<std::size_t>(channels) * phw * n);
    for (int c = 0; c < channels; ++c) {
        const T* src = pre.row(c).data();
        T* dst = pooled.row(c).data();
        std::uint8_t* arg = argmax.data() + static_cast<long>(c) * phw * n;
        for (int b = 0; b < n; ++b) {
            for (int y = 0; y < h; ++y) {
                for (int x = 0; x < h; ++x) {
                    const T* base = src + b * hw + static_cast<long>(2 * y) * s + 2 * x;
                    const T v[4] = {base[0], base[1], base[s], base[s + 1]};
                    std::uint8_t k = 0;
                    for (std::uint8_t j = 1; j < 4; ++j) {
                        if (v[j] > v[k]) k = j;
                    }
                    const long o = b * phw + static_cast<long>(y) * h + x;
                    dst[o] = std::max(v[k], T(0));
                    arg[o] = k;
                }
            }
        }
    }
}

template <typename T>
void relu_pool_backward(const RowMatrix<T>& dpooled, const RowMatrix<T>& pre, const std::vector<std::uint8_t>& argmax,
                        int channels, int s, int n, RowMatrix<T>& dpre) {
    const int h = s / 2;
    const long hw = static_cast<long>(s) * s;
    const long phw = static_cast<long>(h) * h;
    dpre.setZero(channels, hw * n);
    for (int c = 0; c < channels; ++c) {
        const T* g = dpooled.row(c).data();
        const T* z = pre.row(c).data();
        T* d = dpre.row(c).data();
        const std::uint8_t* arg = argmax.data() + static_cast<long>(c) * phw * n;
        for (int b = 0; b < n; ++b) {
            for (int y = 0; y < h; ++y) {
                for (int x = 0; x < h; ++x) {
                    const long o = b * phw + static_cast<long>(y) * h + x;
                    const int k = arg[o];
                    const long pos = b * hw + static_cast<long>(2 * y + k / 2) * s + 2 * x + k % 2;
                    if (z[pos] > T(0)) d[pos] = g[o];
                }
            }
        }
    }
}

}  // namespace

template <typename T>
ColMatrix<T> softmax_columns(const ColMatrix<T>& logits) {
    ColMatrix<T> probs(logits.rows(), logits.cols());
    for (Eigen::Index j = 0; j < logits.cols(); ++j) {
        const T mx = logits.col(j).maxCoeff();
        T sum = T(0);
        for (Eigen::Index i = 0; i < logits.rows(); ++i) {
            probs(i, j) = std::exp(logits(i, j) - mx);
            sum += probs(i, j);
        }
        probs.col(j) /= sum;
    }
    return probs;
}

std::vector<double> softmax(std::span<const double> logits) {
    ColMatrix<double> l(static_cast<Eigen::Index>(logits.size()), 1);
    for (std::size_t i = 0; i < logits.size(); ++i) l(static_cast<Eigen::Index>(i), 0) = logits[i];
    const auto p = softmax_columns<double>(l);
    return std::vector<double>(p.data(), p.data() + p.size());
}

double cross_entropy(std::span<const double> probabilities, int target) {
    if (target < 0 || static_cast<std::size_t>(target) >= probabilities.size()) {
        throw ShapeMismatch("target index outside the probability vector");
    }
    return -std::log(std::clamp(probabilities[static_cast<std::size_t>(target)], kProbabilityFloor, 1.0));
}

template <typename T>
double mean_cross_entropy(const ColMatrix<T>& probs, std::span<const int> targets) {
    if (static_cast<Eigen::Index>(targets.size()) != probs.cols()) throw ShapeMismatch("target count != batch size");
    double sum = 0.0;
    for (Eigen::Index j = 0; j < probs.cols(); ++j) {
        const int t = targets[static_cast<std::size_t>(j)];
        if (t < 0 || t >= probs.rows()) throw ShapeMismatch("target class out of range");
        sum += -std::log(std::clamp(static_cast<double>(probs(t, j)), kProbabilityFloor, 1.0));
    }
    return probs.cols() ? sum / static_cast<double>(probs.cols()) : 0.0;
}

template <typename T>
ColMatrix<T> forward(const MicroCNN<T>& model, const ColMatrix<T>& inputs, const ForwardOptions& options,
                     ForwardCache<T>* cache) {
    const Architecture& arch = model.architecture();
    if (inputs.rows() != arch.input_length()) {
        throw ShapeMismatch("input rows " + std::to_string(inputs.rows()) + " != " +
                            std::to_string(arch.input_length()));
    }
    const int n = static_cast<int>(inputs.cols());
    const bool dropout = options.training && model.use_dropout && arch.dropout > 0.0;
    if (dropout && !options.dropout_stream) throw ShapeMismatch("training with dropout needs a random stream");

    ForwardCache<T> local;
    ForwardCache<T>& c = cache ? *cache : local;
    c.batch = n;

    // Reorder NCHW columns into channel-major feature rows.
    int s = arch.input_size;
    int cin = arch.input_channels;
    RowMatrix<T> feature(cin, static_cast<long>(n) * s * s);
    const long hw = static_cast<long>(s) * s;
    for (int b = 0; b < n; ++b) {
        for (int ch = 0; ch < cin; ++ch) {
            std::memcpy(feature.row(ch).data() + b * hw, inputs.col(b).data() + ch * hw, sizeof(T) * hw);
        }
    }

    for (int stage = 0; stage < 3; ++stage) {
        auto& st = c.conv[static_cast<std::size_t>(stage)];
        const int cout = arch.conv_channels[static_cast<std::size_t>(stage)];
        st.channels_in = cin;
        st.size_in = s;
        im2col(feature, cin, s, n, st.cols);
        const auto w = weights(model, static_cast<TensorId>(kConv1W + 2 * stage));
        const auto bvec = bias(model, static_cast<TensorId>(kConv1B + 2 * stage));
        st.pre.noalias() = w * st.cols;
        st.pre.colwise() += bvec;
        relu_pool(st.pre, cout, s, n, st.pooled, st.argmax);
        feature = st.pooled;
        cin = cout;
        s /= 2;
    }

    const long q = static_cast<long>(s) * s;
    c.flat.resize(arch.flat_size(), n);
    for (int b = 0; b < n; ++b) {
        for (int ch = 0; ch < cin; ++ch) {
            std::memcpy(c.flat.col(b).data() + ch * q, feature.row(ch).data() + b * q, sizeof(T) * q);
        }
    }

    c.hidden_pre.noalias() = weights(model, kFc1W) * c.flat;
    c.hidden_pre.colwise() += bias(model, kFc1B);
    c.hidden = c.hidden_pre.cwiseMax(T(0));
    if (dropout) {
        const T keep_scale = static_cast<T>(1.0 / (1.0 - arch.dropout));
        c.mask.resize(c.hidden.rows(), c.hidden.cols());
        for (Eigen::Index i = 0; i < c.mask.size(); ++i) {
            c.mask.data()[i] = options.dropout_stream->bernoulli(arch.dropout) ? T(0) : keep_scale;
        }
        c.hidden.array() *= c.mask.array();
    } else {
        c.mask.resize(0, 0);
    }

    ColMatrix<T> logits = weights(model, kFc2W) * c.hidden;
    logits.colwise() += bias(model, kFc2B);
    c.probs = softmax_columns<T>(logits);
    return c.probs;
}

template <typename T>
std::vector<T> backward(const MicroCNN<T>& model, const ForwardCache<T>& c, std::span<const int> targets,
                        bool train_trunk) {
    const Architecture& arch = model.architecture();
    const int n = c.batch;
    if (static_cast<int>(targets.size()) != n || c.probs.cols() != n) throw ShapeMismatch("target count != batch size");

    std::vector<T> grads(model.parameters().size(), T(0));
    auto gmat = [&](TensorId id) {
        const auto& slot = model.layout()[id];
        return Eigen::Map<RowMatrix<T>>(grads.data() + slot.offset, slot.rows, slot.cols);
    };
    auto gvec = [&](TensorId id) {
        const auto& slot = model.layout()[id];
        return Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>>(grads.data() + slot.offset, slot.rows);
    };

    ColMatrix<T> dlogits = c.probs;
    for (int j = 0; j < n; ++j) {
        const int t = targets[static_cast<std::size_t>(j)];
        if (t < 0 || t >= arch.classes) throw ShapeMismatch("target class out of range");
        dlogits(t, j) -= T(1);
    }
    dlogits /= static_cast<T>(n);

    gmat(kFc2W).noalias() = dlogits * c.hidden.transpose();
    gvec(kFc2B) = dlogits.rowwise().sum();

    ColMatrix<T> dhidden = weights(model, kFc2W).transpose() * dlogits;
    if (c.mask.size()) dhidden.array() *= c.mask.array();
    dhidden.array() *= (c.hidden_pre.array() > T(0)).template cast<T>();

    gmat(kFc1W).noalias() = dhidden * c.flat.transpose();
    gvec(kFc1B) = dhidden.rowwise().sum();
    if (!train_trunk) return grads;

    const ColMatrix<T> dflat = weights(model, kFc1W).transpose() * dhidden;

    const auto& last = c.conv[2];
    const int c3 = arch.conv_channels[2];
    const long q = last.pooled.cols() / n;
    RowMatrix<T> dpooled(c3, q * n);
    for (int b = 0; b < n; ++b) {
        for (int ch = 0; ch < c3; ++ch) {
            std::memcpy(dpooled.row(ch).data() + b * q, dflat.col(b).data() + ch * q, sizeof(T) * q);
        }
    }

    RowMatrix<T> dpre, dcols;
    for (int stage = 2; stage >= 0; --stage) {
        const auto& st = c.conv[static_cast<std::size_t>(stage)];
        const int cout = arch.conv_channels[static_cast<std::size_t>(stage)];
        relu_pool_backward(dpooled, st.pre, st.argmax, cout, st.size_in, n, dpre);
        gmat(static_cast<TensorId>(kConv1W + 2 * stage)).noalias() = dpre * st.cols.transpose();
        gvec(static_cast<TensorId>(kConv1B + 2 * stage)) = dpre.rowwise().sum();
        if (stage > 0) {
            dcols.noalias() = weights(model, static_cast<TensorId>(kConv1W + 2 * stage)).transpose() * dpre;
            col2im(dcols, st.channels_in, st.size_in, n, dpooled);
        }
    }
    return grads;
}

namespace {
constexpr char kMagic[8] = {'F', 'R', 'G', 'C', 'N', 'N', '0', '1'};

template <typename V>
void put(std::ofstream& out, V v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(V));
}
template <typename V>
V get(std::ifstream& in) {
    V v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(V));
    return v;
}
}  // namespace

template <typename T>
void save_checkpoint(const std::filesystem::path& path, const MicroCNN<T>& model) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write checkpoint " + path.string());
    const Architecture& a = model.architecture();
    out.write(kMagic, sizeof(kMagic));
    for (int v : {a.input_size, a.input_channels, a.conv_channels[0], a.conv_channels[1], a.conv_channels[2],
                  a.hidden, a.classes}) {
        put<std::int32_t>(out, v);
    }
    put<double>(out, a.dropout);
    put<std::uint8_t>(out, model.use_dropout ? 1 : 0);
    put<std::uint64_t>(out, model.parameters().size());
    for (T p : model.parameters()) put<float>(out, static_cast<float>(p));
    if (!out) throw IoError("short write to " + path.string());
}

template <typename T>
MicroCNN<T> load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint " + path.string());
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) throw FormatError("not a checkpoint: " + path.string());
    Architecture a;
    a.input_size = get<std::int32_t>(in);
    a.input_channels = get<std::int32_t>(in);
    for (auto& ch : a.conv_channels) ch = get<std::int32_t>(in);
    a.hidden = get<std::int32_t>(in);
    a.classes = get<std::int32_t>(in);
    a.dropout = get<double>(in);
    const bool use_dropout = get<std::uint8_t>(in) != 0;
    const auto count = get<std::uint64_t>(in);
    if (!in) throw FormatError("truncated checkpoint header: " + path.string());
    MicroCNN<T> model(a);
    model.use_dropout = use_dropout;
    if (count != model.parameters().size()) throw FormatError("checkpoint parameter count mismatch");
    for (auto& p : model.parameters()) p = static_cast<T>(get<float>(in));
    if (!in) throw FormatError("truncated checkpoint: " + path.string());
    return model;
}

template <typename T>
void copy_trunk(const MicroCNN<T>& source, MicroCNN<T>& target) {
    const auto& a = source.architecture();
    const auto& b = target.architecture();
    if (a.input_size != b.input_size || a.input_channels != b.input_channels || a.conv_channels != b.conv_channels) {
        throw ShapeMismatch("checkpoint trunk does not match the model architecture");
    }
    const std::size_t n = head_offset(source.layout());
    std::copy_n(source.parameters().begin(), n, target.parameters().begin());
}

#define FORGE_INSTANTIATE(T)                                                                               \
    template class MicroCNN<T>;                                                                            \
    template ColMatrix<T> softmax_columns<T>(const ColMatrix<T>&);                                         \
    template double mean_cross_entropy<T>(const ColMatrix<T>&, std::span<const int>);                      \
    template ColMatrix<T> forward<T>(const MicroCNN<T>&, const ColMatrix<T>&, const ForwardOptions&,       \
                                     ForwardCache<T>*);                                                    \
    template std::vector<T> backward<T>(const MicroCNN<T>&, const ForwardCache<T>&, std::span<const int>, \
                                        bool);                                                             \
    template void save_checkpoint<T>(const std::filesystem::path&, const MicroCNN<T>&);                    \
    template MicroCNN<T> load_checkpoint<T>(const std::filesystem::path&);                                 \
    template void copy_trunk<T>(const MicroCNN<T>&, MicroCNN<T>&);

FORGE_INSTANTIATE(float)
FORGE_INSTANTIATE(double)

#undef FORGE_INSTANTIATE

}  // namespace forge::nn
