#include "cnn.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "errors.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace revgender {

std::vector<ConvSpec> paper_conv_plan() {
    return {{7, true}, {7, true}, {3, false}, {3, false}, {3, false}, {3, true}};
}

std::vector<ConvSpec> tiny_conv_plan() {
    return {{7, true}, {3, true}};
}

StackShape conv_stack_shape(int window, std::span<const ConvSpec> plan, int filters) {
    if (window < 1) throw NumericError("window must be positive");
    if (filters < 1) throw NumericError("filter count must be positive");
    StackShape s;
    int len = window;
    for (const auto& spec : plan) {
        len = len - spec.kernel + 1;
        if (len < 1) {
            throw NumericError("conv stack does not fit window " + std::to_string(window) +
                               ": layer output length would be " + std::to_string(len));
        }
        s.conv_out.push_back(len);
        if (spec.pool) len /= 3;
        if (len < 1) throw NumericError("pool output empty for window " + std::to_string(window));
        s.pooled.push_back(len);
    }
    s.flattened = filters * len;
    return s;
}

namespace {

template <typename S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <typename S>
using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;
template <typename S>
using MatMap = Eigen::Map<Mat<S>>;
template <typename S>
using CMatMap = Eigen::Map<const Mat<S>>;
template <typename S>
using VecMap = Eigen::Map<Vec<S>>;
template <typename S>
using CVecMap = Eigen::Map<const Vec<S>>;

template <typename S>
S sigmoid(S z) {
    return S(1) / (S(1) + std::exp(-z));
}

/// Single-sample forward/backward state; one instance per worker.
template <typename S>
struct Workspace {
    std::vector<Mat<S>> conv_out; // post-ReLU, pre-pool
    std::vector<Mat<S>> pooled;
    std::vector<std::vector<int32_t>> argmax; // source column per pooled cell
    std::vector<Mat<S>> cols;                 // im2col inputs of layers >= 1
    Vec<S> h1, h1d, h2, h2d;
    Vec<S> mask1, mask2; // dropout scale per unit (1/keep or 0)
    // backward scratch
    Mat<S> dpooled, dconv, dcol;
    Vec<S> dh;

    Workspace(const HyperParams& hp, const StackShape& shape, int vocab_rows) {
        const int f = hp.conv_filters;
        const auto n_conv = hp.conv_plan.size();
        conv_out.resize(n_conv);
        pooled.resize(n_conv);
        argmax.resize(n_conv);
        cols.resize(n_conv);
        int max_conv_len = 0, max_pool_len = 0, max_col_rows = 0;
        for (size_t i = 0; i < n_conv; ++i) {
            conv_out[i].resize(f, shape.conv_out[i]);
            pooled[i].resize(f, shape.pooled[i]);
            if (hp.conv_plan[i].pool) argmax[i].resize(static_cast<size_t>(f) * shape.pooled[i]);
            if (i > 0) {
                cols[i].resize(hp.conv_plan[i].kernel * f, shape.conv_out[i]);
                max_col_rows = std::max(max_col_rows, hp.conv_plan[i].kernel * f);
            }
            max_conv_len = std::max(max_conv_len, shape.conv_out[i]);
            max_pool_len = std::max(max_pool_len, shape.pooled[i]);
        }
        h1.resize(hp.hidden);
        h1d.resize(hp.hidden);
        h2.resize(hp.hidden);
        h2d.resize(hp.hidden);
        mask1.resize(hp.hidden);
        mask2.resize(hp.hidden);
        dpooled.resize(f, std::max(max_pool_len, 1));
        dconv.resize(f, std::max(max_conv_len, 1));
        dcol.resize(std::max(max_col_rows, 1), std::max(max_conv_len, 1));
        dh.resize(std::max(hp.hidden, 1));
        (void)vocab_rows;
    }
};

template <typename S>
struct ParamViews {
    std::vector<CMatMap<S>> conv_w;
    std::vector<CVecMap<S>> conv_b;
    CMatMap<S> fc1_w, fc2_w, fc3_w;
    CVecMap<S> fc1_b, fc2_b, fc3_b;
};

} // namespace

template <typename Scalar>
CharCnn<Scalar>::CharCnn(HyperParams hp, int vocab_rows)
    : hp_(std::move(hp)), vocab_rows_(vocab_rows) {
    if (hp_.hidden < 1 || hp_.dropout_keep <= 0.0 || hp_.dropout_keep > 1.0 ||
        hp_.batch_size < 1) {
        throw UsageError("invalid hyperparameters");
    }
    shape_ = conv_stack_shape(hp_.window, hp_.conv_plan, hp_.conv_filters);

    const int f = hp_.conv_filters;
    int in_ch = vocab_rows_;
    int tensor_index = 0;
    auto add_tensor = [&](const std::string& name, std::vector<int> shape, bool is_bias,
                          int fan_in) {
        Tensor<Scalar> t;
        t.name = name;
        t.shape = std::move(shape);
        int64_t n = 1;
        for (int d : t.shape) n *= d;
        t.data.assign(static_cast<size_t>(n), Scalar(0));
        if (!is_bias) {
            Rng rng(seed_combine(hp_.seed, static_cast<uint64_t>(tensor_index)));
            const double s = 1.0 / std::sqrt(static_cast<double>(fan_in));
            for (auto& w : t.data) w = static_cast<Scalar>(rng.uniform(-s, s));
        }
        ++tensor_index;
        params_.push_back(std::move(t));
    };

    for (size_t i = 0; i < hp_.conv_plan.size(); ++i) {
        const int k = hp_.conv_plan[i].kernel;
        add_tensor("conv" + std::to_string(i + 1) + ".weight", {f, k, in_ch}, false, k * in_ch);
        add_tensor("conv" + std::to_string(i + 1) + ".bias", {f}, true, 0);
        in_ch = f;
    }
    add_tensor("fc1.weight", {hp_.hidden, shape_.flattened}, false, shape_.flattened);
    add_tensor("fc1.bias", {hp_.hidden}, true, 0);
    add_tensor("fc2.weight", {hp_.hidden, hp_.hidden}, false, hp_.hidden);
    add_tensor("fc2.bias", {hp_.hidden}, true, 0);
    add_tensor("fc3.weight", {1, hp_.hidden}, false, hp_.hidden);
    add_tensor("fc3.bias", {1}, true, 0);
}

template <typename Scalar>
std::vector<Tensor<Scalar>> CharCnn<Scalar>::zero_like_params() const {
    std::vector<Tensor<Scalar>> out = params_;
    for (auto& t : out) std::fill(t.data.begin(), t.data.end(), Scalar(0));
    return out;
}

template <typename Scalar>
int64_t CharCnn<Scalar>::parameter_count() const {
    int64_t n = 0;
    for (const auto& t : params_) n += t.size();
    return n;
}

namespace {

template <typename S>
ParamViews<S> make_views(const std::vector<Tensor<S>>& params, const HyperParams& hp,
                         const StackShape& shape, int vocab_rows) {
    const size_t n = 2 * hp.conv_plan.size();
    ParamViews<S> v{{},
                    {},
                    CMatMap<S>(params[n].data.data(), hp.hidden, shape.flattened),
                    CMatMap<S>(params[n + 2].data.data(), hp.hidden, hp.hidden),
                    CMatMap<S>(params[n + 4].data.data(), 1, hp.hidden),
                    CVecMap<S>(params[n + 1].data.data(), hp.hidden),
                    CVecMap<S>(params[n + 3].data.data(), hp.hidden),
                    CVecMap<S>(params[n + 5].data.data(), 1)};
    const int f = hp.conv_filters;
    size_t p = 0;
    int in_ch = vocab_rows;
    for (size_t i = 0; i < hp.conv_plan.size(); ++i) {
        const int k = hp.conv_plan[i].kernel;
        v.conv_w.emplace_back(params[p++].data.data(), f, k * in_ch);
        v.conv_b.emplace_back(params[p++].data.data(), f);
        in_ch = f;
    }
    return v;
}

template <typename S>
void apply_pool(const Mat<S>& conv, Mat<S>& pooled, std::vector<int32_t>& argmax) {
    const int f = static_cast<int>(conv.rows());
    const int out_len = static_cast<int>(pooled.cols());
    for (int t = 0; t < out_len; ++t) {
        for (int r = 0; r < f; ++r) {
            int best = 3 * t;
            S best_v = conv(r, best);
            for (int d = 1; d < 3; ++d) {
                const S val = conv(r, 3 * t + d);
                if (val > best_v) {
                    best_v = val;
                    best = 3 * t + d;
                }
            }
            pooled(r, t) = best_v;
            argmax[static_cast<size_t>(t) * f + r] = best;
        }
    }
}

template <typename S>
void im2col(const Mat<S>& x, int kernel, Mat<S>& col) {
    const int out_len = static_cast<int>(col.cols());
    const int in_ch = static_cast<int>(x.rows());
    for (int t = 0; t < out_len; ++t) {
        for (int dt = 0; dt < kernel; ++dt) {
            col.col(t).segment(dt * in_ch, in_ch) = x.col(t + dt);
        }
    }
}

/// Forward to the pre-sigmoid logit; all intermediates land in `ws`.
/// `dropout_rng` non-null only in train mode with keep < 1.
template <typename S>
S forward_logit(const ParamViews<S>& v, const HyperParams& hp, const StackShape& shape,
                int vocab_rows, const QuantizedText& text, Rng* dropout_rng, Workspace<S>& ws) {
    const int f = hp.conv_filters;
    // First convolution reads the one-hot input as a gather.
    {
        const int k = hp.conv_plan[0].kernel;
        const int out_len = shape.conv_out[0];
        ws.conv_out[0] = v.conv_b[0].replicate(1, out_len);
        for (int t = 0; t < out_len; ++t) {
            auto y = ws.conv_out[0].col(t);
            for (int dt = 0; dt < k; ++dt) {
                const int c = text.column_index(t + dt);
                if (c >= 0) y += v.conv_w[0].col(dt * vocab_rows + c);
            }
        }
        ws.conv_out[0] = ws.conv_out[0].cwiseMax(S(0));
        if (hp.conv_plan[0].pool) {
            apply_pool(ws.conv_out[0], ws.pooled[0], ws.argmax[0]);
        } else {
            ws.pooled[0] = ws.conv_out[0];
        }
    }
    for (size_t i = 1; i < hp.conv_plan.size(); ++i) {
        const int k = hp.conv_plan[i].kernel;
        im2col(ws.pooled[i - 1], k, ws.cols[i]);
        ws.conv_out[i].noalias() = v.conv_w[i] * ws.cols[i];
        ws.conv_out[i].colwise() += v.conv_b[i];
        ws.conv_out[i] = ws.conv_out[i].cwiseMax(S(0));
        if (hp.conv_plan[i].pool) {
            apply_pool(ws.conv_out[i], ws.pooled[i], ws.argmax[i]);
        } else {
            ws.pooled[i] = ws.conv_out[i];
        }
    }

    const auto& last = ws.pooled.back();
    CVecMap<S> flat(last.data(), last.size());

    const S keep = static_cast<S>(hp.dropout_keep);
    auto fill_mask = [&](Vec<S>& mask) {
        if (!dropout_rng) {
            mask.setOnes();
            return;
        }
        for (int j = 0; j < mask.size(); ++j) {
            mask[j] = dropout_rng->next_unit() < hp.dropout_keep ? S(1) / keep : S(0);
        }
    };

    ws.h1.noalias() = v.fc1_w * flat;
    ws.h1 += v.fc1_b;
    ws.h1 = ws.h1.cwiseMax(S(0));
    fill_mask(ws.mask1);
    ws.h1d = ws.h1.cwiseProduct(ws.mask1);

    ws.h2.noalias() = v.fc2_w * ws.h1d;
    ws.h2 += v.fc2_b;
    ws.h2 = ws.h2.cwiseMax(S(0));
    fill_mask(ws.mask2);
    ws.h2d = ws.h2.cwiseProduct(ws.mask2);

    return (v.fc3_w * ws.h2d)(0, 0) + v.fc3_b(0);
}

/// Accumulates parameter gradients for one sample given dL/dz.
template <typename S>
void backward(const ParamViews<S>& v, const HyperParams& hp, const StackShape& shape,
              int vocab_rows, const QuantizedText& text, S dz, Workspace<S>& ws,
              std::vector<Tensor<S>>& grads) {
    const int f = hp.conv_filters;
    const size_t n_conv = hp.conv_plan.size();
    const size_t g_fc1 = 2 * n_conv;

    auto gmat = [&](size_t idx, int rows, int cols) {
        return MatMap<S>(grads[idx].data.data(), rows, cols);
    };
    auto gvec = [&](size_t idx, int n) { return VecMap<S>(grads[idx].data.data(), n); };

    // fc3
    {
        auto dw = gmat(g_fc1 + 4, 1, hp.hidden);
        dw.noalias() += dz * ws.h2d.transpose();
        gvec(g_fc1 + 5, 1)(0) += dz;
    }
    ws.dh = v.fc3_w.transpose() * dz; // dL/dh2d
    ws.dh = ws.dh.cwiseProduct(ws.mask2);
    ws.dh = ws.dh.cwiseProduct((ws.h2.array() > S(0)).template cast<S>().matrix()); // ReLU

    {
        auto dw = gmat(g_fc1 + 2, hp.hidden, hp.hidden);
        dw.noalias() += ws.dh * ws.h1d.transpose();
        gvec(g_fc1 + 3, hp.hidden) += ws.dh;
    }
    Vec<S> dh1 = v.fc2_w.transpose() * ws.dh;
    dh1 = dh1.cwiseProduct(ws.mask1);
    dh1 = dh1.cwiseProduct((ws.h1.array() > S(0)).template cast<S>().matrix());

    const auto& last = ws.pooled.back();
    CVecMap<S> flat(last.data(), last.size());
    {
        auto dw = gmat(g_fc1, hp.hidden, shape.flattened);
        dw.noalias() += dh1 * flat.transpose();
        gvec(g_fc1 + 1, hp.hidden) += dh1;
    }
    Vec<S> dflat = v.fc1_w.transpose() * dh1;

    // Walk the conv stack backwards; dpooled holds dL/d(pooled output of i).
    MatMap<S> dpooled_last(dflat.data(), f, shape.pooled.back());
    ws.dpooled.topLeftCorner(f, shape.pooled.back()) = dpooled_last;

    for (size_t ii = n_conv; ii-- > 0;) {
        const int conv_len = shape.conv_out[ii];
        const int pool_len = shape.pooled[ii];
        auto dpool = ws.dpooled.topLeftCorner(f, pool_len);
        auto dconv = ws.dconv.topLeftCorner(f, conv_len);
        if (hp.conv_plan[ii].pool) {
            dconv.setZero();
            for (int t = 0; t < pool_len; ++t) {
                for (int r = 0; r < f; ++r) {
                    dconv(r, ws.argmax[ii][static_cast<size_t>(t) * f + r]) += dpool(r, t);
                }
            }
        } else {
            dconv = dpool;
        }
        // ReLU mask (conv_out stores post-activation values)
        dconv = dconv.cwiseProduct((ws.conv_out[ii].array() > S(0)).template cast<S>().matrix());

        const int k = hp.conv_plan[ii].kernel;
        if (ii == 0) {
            auto dw = gmat(0, f, k * vocab_rows);
            gvec(1, f) += dconv.rowwise().sum();
            for (int t = 0; t < conv_len; ++t) {
                for (int dt = 0; dt < k; ++dt) {
                    const int c = text.column_index(t + dt);
                    if (c >= 0) dw.col(dt * vocab_rows + c) += dconv.col(t);
                }
            }
        } else {
            auto dw = gmat(2 * ii, f, k * f);
            dw.noalias() += dconv * ws.cols[ii].transpose();
            gvec(2 * ii + 1, f) += dconv.rowwise().sum();
            auto dcol = ws.dcol.topLeftCorner(k * f, conv_len);
            dcol.noalias() = v.conv_w[ii].transpose() * dconv;
            // col2im: scatter-add back to the previous pooled activation
            auto dprev = ws.dpooled.topLeftCorner(f, shape.pooled[ii - 1]);
            dprev.setZero();
            for (int t = 0; t < conv_len; ++t) {
                for (int dt = 0; dt < k; ++dt) {
                    dprev.col(t + dt) += dcol.col(t).segment(dt * f, f);
                }
            }
        }
    }
}

} // namespace

template <typename Scalar>
Scalar CharCnn<Scalar>::predict(const QuantizedText& text) const {
    Workspace<Scalar> ws(hp_, shape_, vocab_rows_);
    const auto views = make_views<Scalar>(params_, hp_, shape_, vocab_rows_);
    const Scalar z = forward_logit<Scalar>(views, hp_, shape_, vocab_rows_, text, nullptr, ws);
    const Scalar p = sigmoid(z);
    return std::min(Scalar(1) - kProbEps, std::max(kProbEps, p));
}

template <typename Scalar>
std::vector<Scalar> CharCnn<Scalar>::predict_many(std::span<const QuantizedText> texts,
                                                  int threads) const {
    std::vector<Scalar> out(texts.size());
    if (texts.empty()) return out;
    const int chunk_count = static_cast<int>(std::min<size_t>(texts.size(), 64));
    const size_t per = (texts.size() + chunk_count - 1) / chunk_count;
    const auto views = make_views<Scalar>(params_, hp_, shape_, vocab_rows_);
    parallel_chunks(chunk_count, threads, [&](int c) {
        Workspace<Scalar> ws(hp_, shape_, vocab_rows_);
        const size_t lo = static_cast<size_t>(c) * per;
        const size_t hi = std::min(texts.size(), lo + per);
        for (size_t i = lo; i < hi; ++i) {
            const Scalar z =
                forward_logit<Scalar>(views, hp_, shape_, vocab_rows_, texts[i], nullptr, ws);
            const Scalar p = sigmoid(z);
            out[i] = std::min(Scalar(1) - kProbEps, std::max(kProbEps, p));
        }
    });
    return out;
}

template <typename Scalar>
Scalar CharCnn<Scalar>::loss_and_gradient(std::span<const QuantizedText> texts,
                                          std::span<const int> labels, bool train_mode,
                                          uint64_t mask_seed,
                                          std::vector<Tensor<Scalar>>* grads) const {
    if (texts.empty() || texts.size() != labels.size()) {
        throw UsageError("loss_and_gradient needs a non-empty batch with matching labels");
    }
    Workspace<Scalar> ws(hp_, shape_, vocab_rows_);
    const auto views = make_views<Scalar>(params_, hp_, shape_, vocab_rows_);
    const Scalar inv_n = Scalar(1) / static_cast<Scalar>(texts.size());
    Scalar loss = 0;
    const bool dropout_active = train_mode && hp_.dropout_keep < 1.0;
    for (size_t i = 0; i < texts.size(); ++i) {
        Rng rng(seed_combine(mask_seed, static_cast<uint64_t>(i)));
        const Scalar z = forward_logit<Scalar>(views, hp_, shape_, vocab_rows_, texts[i],
                                               dropout_active ? &rng : nullptr, ws);
        Scalar p = sigmoid(z);
        const bool clamped = p < kProbEps || p > Scalar(1) - kProbEps;
        p = std::min(Scalar(1) - kProbEps, std::max(kProbEps, p));
        const Scalar y = static_cast<Scalar>(labels[i]);
        loss += -(y * std::log(p) + (Scalar(1) - y) * std::log(Scalar(1) - p)) * inv_n;
        if (grads) {
            const Scalar dz = clamped ? Scalar(0) : (p - y) * inv_n;
            backward<Scalar>(views, hp_, shape_, vocab_rows_, texts[i], dz, ws, *grads);
        }
    }
    return loss;
}

template class CharCnn<float>;
template class CharCnn<double>;

} // namespace revgender
