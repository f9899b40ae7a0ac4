#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "quantize.hpp"

namespace revgender {

struct ConvSpec {
    int kernel = 3;
    bool pool = false; // width-3 non-overlapping max pool after the layer
    bool operator==(const ConvSpec&) const = default;
};

/// Six convolutions (kernels 7,7,3,3,3,3) with pooling after layers 1, 2
/// and 6, then three fully connected layers.
std::vector<ConvSpec> paper_conv_plan();

/// Two convolutions with pooling; small enough for a 64-character window.
/// Used by gradient checks, which need cheap full parameter sweeps.
std::vector<ConvSpec> tiny_conv_plan();

struct HyperParams {
    int conv_filters = 64;   // paper default 256; desk default 64
    int hidden = 128;        // paper default 1024; desk default 128
    int window = 1014;
    std::vector<ConvSpec> conv_plan = paper_conv_plan();
    double dropout_keep = 0.5;
    int batch_size = 512;
    double learning_rate = 0.01;
    double momentum = 0.9;
    double plateau_factor = 0.5;    // lr multiplier when the epoch loss plateaus
    double plateau_tolerance = 1e-3; // required relative improvement
    int epochs = 3;
    uint64_t seed = 1;
    bool reverse_input = false;

    bool operator==(const HyperParams&) const = default;
};

/// Per-layer output lengths under the conv/pool arithmetic
/// (conv: L-K+1, pool: floor(L/3)). Throws NumericError when a layer
/// length would drop below 1.
struct StackShape {
    std::vector<int> conv_out; // length after each convolution
    std::vector<int> pooled;   // length after the optional pool
    int flattened = 0;         // filters * pooled.back()
};
StackShape conv_stack_shape(int window, std::span<const ConvSpec> plan, int filters);

template <typename Scalar>
struct Tensor {
    std::string name;
    std::vector<int> shape;
    std::vector<Scalar> data;

    int64_t size() const { return static_cast<int64_t>(data.size()); }
};

/// Character-level convolutional classifier. The scalar type is a template
/// parameter: training uses float, gradient tests instantiate double.
template <typename Scalar>
class CharCnn {
public:
    /// Seeded construction: biases zero, weights uniform in
    /// [-1/sqrt(fan_in), 1/sqrt(fan_in)].
    explicit CharCnn(HyperParams hp, int vocab_rows = CharVocabulary::kSize);

    const HyperParams& hyper() const { return hp_; }
    const StackShape& shape() const { return shape_; }
    int vocab_rows() const { return vocab_rows_; }

    std::vector<Tensor<Scalar>>& params() { return params_; }
    const std::vector<Tensor<Scalar>>& params() const { return params_; }
    std::vector<Tensor<Scalar>> zero_like_params() const;
    int64_t parameter_count() const;

    /// Eval-mode probability that the text performs the male-labeled class.
    /// Output is clamped to [kProbEps, 1-kProbEps], so it is always in (0,1).
    Scalar predict(const QuantizedText& text) const;

    /// Deterministic multi-threaded eval over many texts.
    std::vector<Scalar> predict_many(std::span<const QuantizedText> texts, int threads) const;

    /// Mean binary cross-entropy over the batch plus, when `grads` is given,
    /// gradients for every parameter tensor. Dropout is applied only in
    /// train mode, with masks derived from `mask_seed` (so finite-difference
    /// probes can replay the identical masks).
    Scalar loss_and_gradient(std::span<const QuantizedText> texts, std::span<const int> labels,
                             bool train_mode, uint64_t mask_seed,
                             std::vector<Tensor<Scalar>>* grads) const;

    static constexpr Scalar kProbEps = static_cast<Scalar>(1e-7);

private:
    HyperParams hp_;
    int vocab_rows_;
    StackShape shape_;
    std::vector<Tensor<Scalar>> params_;
};

extern template class CharCnn<float>;
extern template class CharCnn<double>;

} // namespace revgender
