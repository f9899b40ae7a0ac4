#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>

#include "corpus.hpp"

namespace revgender {

/// The five numeric matching covariates. Component order is fixed; it
/// defines the covariance matrix layout used by matching:
///   0 timestamp_days, 1 length_words, 2 readability, 3 sentiment, 4 rating.
struct ConfounderVector {
    int64_t timestamp_days = 0;
    int64_t length_words = 0;
    double readability = 0.0;
    double sentiment = 0.0;
    int rating = 0;

    std::array<double, 5> as_array() const {
        return {static_cast<double>(timestamp_days), static_cast<double>(length_words),
                readability, sentiment, static_cast<double>(rating)};
    }

    bool operator==(const ConfounderVector&) const = default;
};

/// token -> valence in [-1, 1]; file format "token<TAB>valence" per line.
class SentimentLexicon {
public:
    static SentimentLexicon load(const std::string& path);
    static SentimentLexicon from_entries(std::unordered_map<std::string, double> entries);

    const std::unordered_map<std::string, double>& entries() const { return entries_; }

    /// Mean valence over in-lexicon tokens; 0 when none match.
    double score(std::string_view text) const;

private:
    std::unordered_map<std::string, double> entries_;
};

/// Flesch Reading Ease: 206.835 - 1.015*(words/sentences) - 84.6*(syllables/words).
/// Sentences are maximal runs of ".!?" (at least 1); syllables use a vowel-group
/// heuristic (runs of [aeiouy], minus a trailing silent 'e', floor 1 per word
/// with letters). Empty text scores 0.
double readability(std::string_view text);

/// Syllables for one already-lowercased word; exposed for tests.
int syllables_in_word(std::string_view word);

ConfounderVector confounder_vector(const Review& review, const SentimentLexicon& lexicon);

} // namespace revgender
