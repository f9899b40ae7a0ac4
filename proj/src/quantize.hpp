#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace revgender {

/// The 69-character alphabet of the character-level classifier: 26 lowercase
/// letters, 10 digits, and 33 specials (32 printable punctuation marks plus
/// newline). Space and anything else quantize to an all-zero column.
class CharVocabulary {
public:
    static constexpr int kSize = 69;

    static const CharVocabulary& standard();

    /// Row index for a byte, or -1 when out of vocabulary. Uppercase ASCII
    /// maps to its lowercase row.
    int index_of(char c) const { return index_[static_cast<unsigned char>(c)]; }

    char at(int index) const { return alphabet_[static_cast<size_t>(index)]; }
    const std::string& alphabet() const { return alphabet_; }
    int size() const { return kSize; }

private:
    CharVocabulary();
    std::string alphabet_;
    int index_[256];
};

/// One review text quantized to a 69 x window one-hot matrix, stored as one
/// row index per column (-1 for padding and out-of-vocabulary characters).
struct QuantizedText {
    int window = 0;
    std::vector<int16_t> cols; // size == window

    bool one_at(int row, int col) const { return cols[static_cast<size_t>(col)] == row; }
    int column_index(int col) const { return cols[static_cast<size_t>(col)]; }
};

/// Encodes `text` column-by-column in forward reading order (set `reverse`
/// to read backward, matching the original character-CNN convention).
/// Characters beyond `window` are dropped; missing ones pad as zeros.
QuantizedText quantize_text(std::string_view text, const CharVocabulary& vocab,
                            int window = 1014, bool reverse = false);

} // namespace revgender
