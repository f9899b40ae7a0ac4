#include "quantize.hpp"

#include <cassert>

namespace revgender {

const CharVocabulary& CharVocabulary::standard() {
    static const CharVocabulary vocab;
    return vocab;
}

CharVocabulary::CharVocabulary() {
    alphabet_ =
        "abcdefghijklmnopqrstuvwxyz"
        "0123456789"
        "-,;.!?:'\"/\\|_@#$%^&*~`+=<>()[]{}"
        "\n";
    assert(alphabet_.size() == kSize);
    for (int i = 0; i < 256; ++i) index_[i] = -1;
    for (int i = 0; i < kSize; ++i) index_[static_cast<unsigned char>(alphabet_[i])] = i;
    for (int c = 'A'; c <= 'Z'; ++c) index_[c] = index_[c - 'A' + 'a'];
}

QuantizedText quantize_text(std::string_view text, const CharVocabulary& vocab, int window,
                            bool reverse) {
    QuantizedText q;
    q.window = window;
    q.cols.assign(static_cast<size_t>(window), int16_t{-1});
    const size_t n = std::min(text.size(), static_cast<size_t>(window));
    for (size_t j = 0; j < n; ++j) {
        const char c = reverse ? text[text.size() - 1 - j] : text[j];
        q.cols[j] = static_cast<int16_t>(vocab.index_of(c));
    }
    return q;
}

} // namespace revgender
