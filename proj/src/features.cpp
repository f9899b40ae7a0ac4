#include "features.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

#include "errors.hpp"
#include "lineio.hpp"
#include "textutil.hpp"

namespace revgender {

SentimentLexicon SentimentLexicon::load(const std::string& path) {
    LineReader in(path);
    std::unordered_map<std::string, double> entries;
    std::string line;
    while (in.next(line)) {
        if (line.empty() || line[0] == '#') continue;
        const size_t tab = line.find('\t');
        if (tab == std::string::npos) {
            throw DataError("sentiment lexicon line " + std::to_string(in.line_number()) +
                            ": expected token<TAB>valence");
        }
        const std::string token = ascii_lower(line.substr(0, tab));
        char* end = nullptr;
        const double v = std::strtod(line.c_str() + tab + 1, &end);
        if (end == line.c_str() + tab + 1 || !std::isfinite(v) || v < -1.0 || v > 1.0) {
            throw DataError("sentiment lexicon line " + std::to_string(in.line_number()) +
                            ": valence must be in [-1,1]");
        }
        entries[token] = v;
    }
    return from_entries(std::move(entries));
}

SentimentLexicon SentimentLexicon::from_entries(std::unordered_map<std::string, double> entries) {
    SentimentLexicon lex;
    lex.entries_ = std::move(entries);
    return lex;
}

double SentimentLexicon::score(std::string_view text) const {
    double sum = 0.0;
    int64_t n = 0;
    for (const auto& tok : word_tokens(text)) {
        auto it = entries_.find(tok);
        if (it != entries_.end()) {
            sum += it->second;
            ++n;
        }
    }
    return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

namespace {

bool is_vowel(char c) {
    return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u' || c == 'y';
}

// Sentence terminators: maximal runs of '.', '!' or '?' count once.
int64_t sentence_count(std::string_view text) {
    int64_t n = 0;
    bool in_run = false;
    for (char c : text) {
        const bool term = c == '.' || c == '!' || c == '?';
        if (term && !in_run) ++n;
        in_run = term;
    }
    return n > 0 ? n : 1;
}

} // namespace

int syllables_in_word(std::string_view word) {
    std::string letters;
    for (char c : word) {
        if (std::isalpha(static_cast<unsigned char>(c))) {
            letters.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        }
    }
    if (letters.empty()) return 0;
    int groups = 0;
    bool in_group = false;
    for (char c : letters) {
        const bool v = is_vowel(c);
        if (v && !in_group) ++groups;
        in_group = v;
    }
    // Trailing silent 'e' ("make"), but keep it for "-le" endings ("table").
    const size_t n = letters.size();
    if (groups > 1 && letters.back() == 'e' &&
        !(n >= 2 && letters[n - 2] == 'l' && (n < 3 || !is_vowel(letters[n - 3])))) {
        --groups;
    }
    return groups > 0 ? groups : 1;
}

double readability(std::string_view text) {
    int64_t words = 0;
    int64_t syllables = 0;
    bool in_word = false;
    size_t word_begin = 0;
    for (size_t i = 0; i <= text.size(); ++i) {
        const bool ws = i == text.size() || std::isspace(static_cast<unsigned char>(text[i])) != 0;
        if (!ws && !in_word) {
            in_word = true;
            word_begin = i;
        } else if (ws && in_word) {
            in_word = false;
            ++words;
            syllables += syllables_in_word(text.substr(word_begin, i - word_begin));
        }
    }
    if (words == 0) return 0.0;
    const double w = static_cast<double>(words);
    return 206.835 - 1.015 * (w / static_cast<double>(sentence_count(text))) -
           84.6 * (static_cast<double>(syllables) / w);
}

ConfounderVector confounder_vector(const Review& review, const SentimentLexicon& lexicon) {
    ConfounderVector v;
    v.timestamp_days = review.timestamp_days;
    v.length_words = word_count(review.text);
    v.readability = readability(review.text);
    v.sentiment = lexicon.score(review.text);
    v.rating = review.rating;
    return v;
}

} // namespace revgender
