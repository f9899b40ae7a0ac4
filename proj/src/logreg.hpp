#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace revgender {

struct LogRegConfig {
    int64_t min_token_count = 1;  // tokens below this frequency are dropped
    size_t max_vocabulary = 50000; // keep the most frequent tokens
    double learning_rate = 0.5;
    double tolerance = 1e-6; // stop when the loss improvement falls below this
    int max_iterations = 2000;
    uint64_t seed = 1;
};

struct LabeledDocument {
    std::string text;
    int label = 0;
};

struct TokenWeight {
    std::string token;
    double weight = 0.0; // positive pulls toward label 1
};

/// Bag-of-words logistic regression trained by full-batch gradient descent.
/// Deterministic: zero initialization, fixed vocabulary order.
class LinearModel {
public:
    static LinearModel train(std::span<const LabeledDocument> docs, const LogRegConfig& cfg);

    double predict(std::string_view text) const;
    double training_accuracy(std::span<const LabeledDocument> docs) const;

    /// The k tokens of `text` with the largest absolute coefficient, signed
    /// toward the predicted class (exact attribution, no sampling).
    std::vector<TokenWeight> explain_tokens(std::string_view text, size_t k) const;

    size_t vocabulary_size() const { return vocab_.size(); }
    const std::vector<double>& weights() const { return weights_; }
    double bias() const { return bias_; }

    /// Global top coefficients per class, for the diagnostic report.
    std::vector<TokenWeight> top_tokens(size_t k_per_class) const;

private:
    std::unordered_map<std::string, uint32_t> vocab_;
    std::vector<std::string> tokens_; // index -> token
    std::vector<double> weights_;
    double bias_ = 0.0;
};

} // namespace revgender
