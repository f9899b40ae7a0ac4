#include "logreg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "errors.hpp"
#include "textutil.hpp"

namespace revgender {

namespace {

std::vector<std::pair<uint32_t, double>> featurize(
    std::string_view text, const std::unordered_map<std::string, uint32_t>& vocab) {
    std::unordered_map<uint32_t, double> counts;
    for (const auto& tok : word_tokens(text)) {
        auto it = vocab.find(tok);
        if (it != vocab.end()) counts[it->second] += 1.0;
    }
    std::vector<std::pair<uint32_t, double>> out(counts.begin(), counts.end());
    std::sort(out.begin(), out.end());
    return out;
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

} // namespace

LinearModel LinearModel::train(std::span<const LabeledDocument> docs, const LogRegConfig& cfg) {
    bool has0 = false, has1 = false;
    for (const auto& d : docs) {
        if (d.label == 0) has0 = true;
        else if (d.label == 1) has1 = true;
        else throw UsageError("labels must be 0 or 1");
    }
    if (!has0 || !has1) throw UsageError("training set must contain both labels");

    // Frequency-capped vocabulary; deterministic order (count desc, token asc).
    std::map<std::string, int64_t> counts;
    for (const auto& d : docs) {
        for (const auto& tok : word_tokens(d.text)) ++counts[tok];
    }
    std::vector<std::pair<std::string, int64_t>> ranked;
    for (auto& [tok, n] : counts) {
        if (n >= cfg.min_token_count) ranked.emplace_back(tok, n);
    }
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (ranked.size() > cfg.max_vocabulary) ranked.resize(cfg.max_vocabulary);
    if (ranked.empty()) throw UsageError("empty vocabulary after frequency cap");

    LinearModel model;
    for (const auto& [tok, _] : ranked) {
        model.vocab_.emplace(tok, static_cast<uint32_t>(model.tokens_.size()));
        model.tokens_.push_back(tok);
    }
    model.weights_.assign(model.tokens_.size(), 0.0);

    std::vector<std::vector<std::pair<uint32_t, double>>> feats;
    feats.reserve(docs.size());
    for (const auto& d : docs) feats.push_back(featurize(d.text, model.vocab_));

    const double n = static_cast<double>(docs.size());
    std::vector<double> grad(model.weights_.size());
    double prev_loss = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < cfg.max_iterations; ++iter) {
        std::fill(grad.begin(), grad.end(), 0.0);
        double grad_bias = 0.0;
        double loss = 0.0;
        for (size_t i = 0; i < feats.size(); ++i) {
            double z = model.bias_;
            for (const auto& [j, v] : feats[i]) z += model.weights_[j] * v;
            const double p = sigmoid(z);
            const double y = docs[i].label;
            const double pc = std::clamp(p, 1e-12, 1.0 - 1e-12);
            loss += -(y * std::log(pc) + (1.0 - y) * std::log(1.0 - pc));
            const double d = (p - y) / n;
            for (const auto& [j, v] : feats[i]) grad[j] += d * v;
            grad_bias += d;
        }
        loss /= n;
        for (size_t j = 0; j < grad.size(); ++j) model.weights_[j] -= cfg.learning_rate * grad[j];
        model.bias_ -= cfg.learning_rate * grad_bias;
        if (prev_loss - loss < cfg.tolerance && iter > 0) break;
        prev_loss = loss;
    }
    return model;
}

double LinearModel::predict(std::string_view text) const {
    double z = bias_;
    for (const auto& [j, v] : featurize(text, vocab_)) z += weights_[j] * v;
    return sigmoid(z);
}

double LinearModel::training_accuracy(std::span<const LabeledDocument> docs) const {
    if (docs.empty()) return 0.0;
    int64_t correct = 0;
    for (const auto& d : docs) {
        if ((predict(d.text) >= 0.5 ? 1 : 0) == d.label) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(docs.size());
}

std::vector<TokenWeight> LinearModel::explain_tokens(std::string_view text, size_t k) const {
    const int toward = predict(text) >= 0.5 ? 1 : -1;
    std::map<std::string, double> seen;
    for (const auto& tok : word_tokens(text)) {
        auto it = vocab_.find(tok);
        if (it != vocab_.end()) seen.emplace(tok, weights_[it->second]);
    }
    std::vector<TokenWeight> out;
    for (const auto& [tok, w] : seen) out.push_back({tok, w * toward});
    std::sort(out.begin(), out.end(), [](const TokenWeight& a, const TokenWeight& b) {
        if (std::abs(a.weight) != std::abs(b.weight)) return std::abs(a.weight) > std::abs(b.weight);
        return a.token < b.token;
    });
    if (out.size() > k) out.resize(k);
    return out;
}

std::vector<TokenWeight> LinearModel::top_tokens(size_t k_per_class) const {
    std::vector<TokenWeight> all;
    for (size_t j = 0; j < tokens_.size(); ++j) all.push_back({tokens_[j], weights_[j]});
    std::sort(all.begin(), all.end(),
              [](const TokenWeight& a, const TokenWeight& b) { return a.weight > b.weight; });
    std::vector<TokenWeight> out;
    for (size_t i = 0; i < std::min(k_per_class, all.size()); ++i) out.push_back(all[i]);
    std::sort(all.begin(), all.end(),
              [](const TokenWeight& a, const TokenWeight& b) { return a.weight < b.weight; });
    for (size_t i = 0; i < std::min(k_per_class, all.size()); ++i) out.push_back(all[i]);
    return out;
}

} // namespace revgender
