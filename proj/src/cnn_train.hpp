#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "cnn.hpp"

namespace revgender {

struct LabeledText {
    QuantizedText text;
    int label = 0; // 1 = male-signaling class, 0 = female-signaling class
    std::string reviewer_id;
};

struct TrainingLogEntry {
    int epoch = 0;
    double mean_loss = 0.0;
    double holdout_accuracy = 0.0; // NaN when no holdout set was given
};

struct TrainResult {
    CharCnn<float> model;
    std::vector<TrainingLogEntry> log;
};

/// Minibatch gradient descent with momentum; the learning rate halves
/// whenever the epoch mean loss fails to improve on the best seen so far.
/// Deterministic for a fixed HyperParams::seed, including under threading
/// (fixed chunk boundaries, reduction in chunk order).
TrainResult cnn_train(std::span<const LabeledText> train, const HyperParams& hp,
                      std::span<const LabeledText> holdout = {}, int threads = 0);

/// Fraction of texts whose hard 0.5-threshold prediction matches the label.
double review_accuracy(const CharCnn<float>& model, std::span<const LabeledText> data,
                       int threads = 0);

/// Fraction of reviewers whose majority-voted prediction matches their
/// (shared) label; strict majority, ties count as wrong.
double user_accuracy(const CharCnn<float>& model, std::span<const LabeledText> data,
                     int threads = 0);

// Checkpoint container, all integers little-endian:
//   magic   8 bytes  "RGCNNCKP"
//   u32     format version (1)
//   u32     vocabulary length V, then V raw bytes
//   u32     conv_filters, u32 hidden, u32 window, u32 batch_size, u32 epochs
//   f64     dropout_keep, f64 learning_rate, f64 momentum,
//   f64     plateau_factor, f64 plateau_tolerance
//   u64     seed, u8 reverse_input
//   u32     conv layer count, per layer: u32 kernel, u8 pool
//   u32     tensor count, per tensor:
//             u32 name length + bytes, u32 ndim, u32 dims[ndim],
//             f32 data (row-count-major flat order as stored in memory)
void save_checkpoint(const std::filesystem::path& path, const CharCnn<float>& model,
                     const std::string& vocabulary);

struct Checkpoint {
    CharCnn<float> model;
    std::string vocabulary;
};
Checkpoint load_checkpoint(const std::filesystem::path& path);

void write_training_log_csv(const std::filesystem::path& path,
                            std::span<const TrainingLogEntry> log);

} // namespace revgender
