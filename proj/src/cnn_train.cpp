#include "cnn_train.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>

#include "csvio.hpp"
#include "errors.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace revgender {

namespace {

constexpr char kMagic[8] = {'R', 'G', 'C', 'N', 'N', 'C', 'K', 'P'};
constexpr uint32_t kFormatVersion = 1;
constexpr int kChunksPerBatch = 32; // fixed so results do not depend on thread count

void check_two_labels(std::span<const LabeledText> data) {
    bool has0 = false, has1 = false;
    for (const auto& d : data) {
        if (d.label == 0) has0 = true;
        else if (d.label == 1) has1 = true;
        else throw UsageError("labels must be 0 or 1");
    }
    if (!has0 || !has1) throw UsageError("training set must contain both labels");
}

std::vector<float> all_probs(const CharCnn<float>& model, std::span<const LabeledText> data,
                             int threads) {
    std::vector<QuantizedText> texts;
    texts.reserve(data.size());
    for (const auto& d : data) texts.push_back(d.text);
    return model.predict_many(texts, threads == 0 ? default_thread_count() : threads);
}

} // namespace

double review_accuracy(const CharCnn<float>& model, std::span<const LabeledText> data,
                       int threads) {
    if (data.empty()) return std::numeric_limits<double>::quiet_NaN();
    const auto probs = all_probs(model, data, threads);
    int64_t correct = 0;
    for (size_t i = 0; i < data.size(); ++i) {
        const int pred = probs[i] >= 0.5f ? 1 : 0;
        if (pred == data[i].label) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(data.size());
}

double user_accuracy(const CharCnn<float>& model, std::span<const LabeledText> data,
                     int threads) {
    if (data.empty()) return std::numeric_limits<double>::quiet_NaN();
    const auto probs = all_probs(model, data, threads);
    struct Tally {
        int label = 0;
        int votes_for = 0;
        int votes_against = 0;
    };
    std::map<std::string, Tally> users;
    for (size_t i = 0; i < data.size(); ++i) {
        auto& t = users[data[i].reviewer_id];
        t.label = data[i].label;
        const int pred = probs[i] >= 0.5f ? 1 : 0;
        if (pred == data[i].label) ++t.votes_for;
        else ++t.votes_against;
    }
    int64_t correct = 0;
    for (const auto& [_, t] : users) {
        if (t.votes_for > t.votes_against) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(users.size());
}

TrainResult cnn_train(std::span<const LabeledText> train, const HyperParams& hp,
                      std::span<const LabeledText> holdout, int threads) {
    if (train.empty()) throw UsageError("training set is empty");
    check_two_labels(train);
    if (threads == 0) threads = default_thread_count();

    TrainResult result{CharCnn<float>(hp), {}};
    auto& model = result.model;

    // Momentum buffers and per-chunk gradient accumulators.
    auto velocity = model.zero_like_params();
    std::vector<std::vector<Tensor<float>>> chunk_grads;
    for (int c = 0; c < kChunksPerBatch; ++c) chunk_grads.push_back(model.zero_like_params());
    std::vector<double> chunk_loss(kChunksPerBatch, 0.0);

    std::vector<size_t> order(train.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;

    double lr = hp.learning_rate;
    double best_loss = std::numeric_limits<double>::infinity();

    for (int epoch = 0; epoch < hp.epochs; ++epoch) {
        // Seeded shuffle, independent of prior epochs' draw counts.
        Rng shuffle_rng(seed_combine(hp.seed, 0x50000ULL + static_cast<uint64_t>(epoch)));
        for (size_t i = order.size(); i > 1; --i) {
            std::swap(order[i - 1], order[shuffle_rng.below(i)]);
        }

        double epoch_loss_sum = 0.0;
        int64_t epoch_samples = 0;

        const size_t n = train.size();
        const auto batch_size = static_cast<size_t>(hp.batch_size);
        size_t batch_index = 0;
        for (size_t start = 0; start < n; start += batch_size, ++batch_index) {
            const size_t end = std::min(n, start + batch_size);
            const size_t bn = end - start;
            const int chunk_count = static_cast<int>(std::min<size_t>(kChunksPerBatch, bn));
            const size_t per = (bn + chunk_count - 1) / chunk_count;

            const uint64_t batch_seed = seed_combine(
                hp.seed, 0xb0000ULL + static_cast<uint64_t>(epoch) * 1000003ULL + batch_index);

            parallel_chunks(chunk_count, threads, [&](int c) {
                const size_t lo = start + static_cast<size_t>(c) * per;
                const size_t hi = std::min(end, lo + per);
                auto& grads = chunk_grads[static_cast<size_t>(c)];
                for (auto& g : grads) std::fill(g.data.begin(), g.data.end(), 0.0f);
                chunk_loss[static_cast<size_t>(c)] = 0.0;
                if (lo >= hi) return;
                std::vector<QuantizedText> texts;
                std::vector<int> labels;
                texts.reserve(hi - lo);
                labels.reserve(hi - lo);
                for (size_t i = lo; i < hi; ++i) {
                    texts.push_back(train[order[i]].text);
                    labels.push_back(train[order[i]].label);
                }
                const float loss = model.loss_and_gradient(
                    texts, labels, /*train_mode=*/true,
                    seed_combine(batch_seed, static_cast<uint64_t>(c)), &grads);
                // loss_and_gradient means over the chunk; rescale to a sum.
                chunk_loss[static_cast<size_t>(c)] =
                    static_cast<double>(loss) * static_cast<double>(hi - lo);
                const float scale = static_cast<float>(hi - lo);
                for (auto& g : grads) {
                    for (auto& x : g.data) x *= scale;
                }
            });

            // Reduce in fixed chunk order, then one momentum step.
            auto& params = model.params();
            const auto inv_bn = static_cast<float>(1.0 / static_cast<double>(bn));
            for (size_t t = 0; t < params.size(); ++t) {
                auto& w = params[t].data;
                auto& v = velocity[t].data;
                for (size_t j = 0; j < w.size(); ++j) {
                    float g = 0.0f;
                    for (int c = 0; c < chunk_count; ++c) g += chunk_grads[c][t].data[j];
                    g *= inv_bn;
                    v[j] = static_cast<float>(hp.momentum) * v[j] - static_cast<float>(lr) * g;
                    w[j] += v[j];
                }
            }
            for (int c = 0; c < chunk_count; ++c) epoch_loss_sum += chunk_loss[c];
            epoch_samples += static_cast<int64_t>(bn);
        }

        const double epoch_loss = epoch_loss_sum / static_cast<double>(epoch_samples);
        TrainingLogEntry entry;
        entry.epoch = epoch + 1;
        entry.mean_loss = epoch_loss;
        entry.holdout_accuracy = holdout.empty()
                                     ? std::numeric_limits<double>::quiet_NaN()
                                     : review_accuracy(model, holdout, threads);
        result.log.push_back(entry);

        if (epoch_loss > best_loss * (1.0 - hp.plateau_tolerance)) {
            lr *= hp.plateau_factor;
        }
        best_loss = std::min(best_loss, epoch_loss);
    }
    return result;
}

namespace {

void put_u32(std::ostream& out, uint32_t v) {
    char b[4] = {static_cast<char>(v), static_cast<char>(v >> 8), static_cast<char>(v >> 16),
                 static_cast<char>(v >> 24)};
    out.write(b, 4);
}

void put_u64(std::ostream& out, uint64_t v) {
    put_u32(out, static_cast<uint32_t>(v));
    put_u32(out, static_cast<uint32_t>(v >> 32));
}

void put_f64(std::ostream& out, double v) {
    uint64_t bits;
    std::memcpy(&bits, &v, 8);
    put_u64(out, bits);
}

void put_f32(std::ostream& out, float v) {
    uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32(out, bits);
}

uint32_t get_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
           (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

uint64_t get_u64(std::istream& in) {
    const uint64_t lo = get_u32(in);
    const uint64_t hi = get_u32(in);
    return lo | (hi << 32);
}

double get_f64(std::istream& in) {
    const uint64_t bits = get_u64(in);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

float get_f32(std::istream& in) {
    const uint32_t bits = get_u32(in);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
}

} // namespace

void save_checkpoint(const std::filesystem::path& path, const CharCnn<float>& model,
                     const std::string& vocabulary) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write checkpoint: " + path.string());
    out.write(kMagic, 8);
    put_u32(out, kFormatVersion);
    put_u32(out, static_cast<uint32_t>(vocabulary.size()));
    out.write(vocabulary.data(), static_cast<std::streamsize>(vocabulary.size()));
    const auto& hp = model.hyper();
    put_u32(out, static_cast<uint32_t>(hp.conv_filters));
    put_u32(out, static_cast<uint32_t>(hp.hidden));
    put_u32(out, static_cast<uint32_t>(hp.window));
    put_u32(out, static_cast<uint32_t>(hp.batch_size));
    put_u32(out, static_cast<uint32_t>(hp.epochs));
    put_f64(out, hp.dropout_keep);
    put_f64(out, hp.learning_rate);
    put_f64(out, hp.momentum);
    put_f64(out, hp.plateau_factor);
    put_f64(out, hp.plateau_tolerance);
    put_u64(out, hp.seed);
    out.put(hp.reverse_input ? 1 : 0);
    put_u32(out, static_cast<uint32_t>(hp.conv_plan.size()));
    for (const auto& spec : hp.conv_plan) {
        put_u32(out, static_cast<uint32_t>(spec.kernel));
        out.put(spec.pool ? 1 : 0);
    }
    put_u32(out, static_cast<uint32_t>(model.params().size()));
    for (const auto& t : model.params()) {
        put_u32(out, static_cast<uint32_t>(t.name.size()));
        out.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
        put_u32(out, static_cast<uint32_t>(t.shape.size()));
        for (int d : t.shape) put_u32(out, static_cast<uint32_t>(d));
        for (float x : t.data) put_f32(out, x);
    }
    out.flush();
    if (!out) throw DataError("failed writing checkpoint: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open checkpoint: " + path.string() +
                             "; run the train stage first");
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMagic, 8) != 0) {
        throw DataError("not a model checkpoint: " + path.string());
    }
    const uint32_t version = get_u32(in);
    if (version != kFormatVersion) {
        throw DataError("unsupported checkpoint version " + std::to_string(version));
    }
    const uint32_t vlen = get_u32(in);
    std::string vocab(vlen, '\0');
    in.read(vocab.data(), vlen);
    HyperParams hp;
    hp.conv_filters = static_cast<int>(get_u32(in));
    hp.hidden = static_cast<int>(get_u32(in));
    hp.window = static_cast<int>(get_u32(in));
    hp.batch_size = static_cast<int>(get_u32(in));
    hp.epochs = static_cast<int>(get_u32(in));
    hp.dropout_keep = get_f64(in);
    hp.learning_rate = get_f64(in);
    hp.momentum = get_f64(in);
    hp.plateau_factor = get_f64(in);
    hp.plateau_tolerance = get_f64(in);
    hp.seed = get_u64(in);
    hp.reverse_input = in.get() != 0;
    const uint32_t plan_len = get_u32(in);
    hp.conv_plan.clear();
    for (uint32_t i = 0; i < plan_len; ++i) {
        ConvSpec spec;
        spec.kernel = static_cast<int>(get_u32(in));
        spec.pool = in.get() != 0;
        hp.conv_plan.push_back(spec);
    }
    if (!in) throw DataError("truncated checkpoint: " + path.string());

    Checkpoint ck{CharCnn<float>(hp, static_cast<int>(vlen)), std::move(vocab)};
    const uint32_t tensor_count = get_u32(in);
    if (tensor_count != ck.model.params().size()) {
        throw DataError("checkpoint tensor count mismatch");
    }
    for (auto& t : ck.model.params()) {
        const uint32_t name_len = get_u32(in);
        std::string name(name_len, '\0');
        in.read(name.data(), name_len);
        const uint32_t ndim = get_u32(in);
        std::vector<int> dims(ndim);
        for (auto& d : dims) d = static_cast<int>(get_u32(in));
        if (name != t.name || dims != t.shape) {
            throw DataError("checkpoint tensor layout mismatch at " + name);
        }
        for (auto& x : t.data) x = get_f32(in);
    }
    if (!in) throw DataError("truncated checkpoint: " + path.string());
    return ck;
}

void write_training_log_csv(const std::filesystem::path& path,
                            std::span<const TrainingLogEntry> log) {
    CsvWriter csv(path.string(), {"epoch", "mean_loss", "holdout_accuracy"});
    for (const auto& e : log) {
        csv.field(static_cast<int64_t>(e.epoch)).field(e.mean_loss).field(e.holdout_accuracy);
        csv.end_row();
    }
    csv.close();
}

} // namespace revgender
