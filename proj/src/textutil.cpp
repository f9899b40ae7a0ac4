#include "textutil.hpp"

#include <cctype>

namespace revgender {

bool is_letter_cp(uint32_t cp) {
    if (cp < 0x80) return (cp >= 'A' && cp <= 'Z') || (cp >= 'a' && cp <= 'z');
    if (cp >= 0xC0 && cp <= 0xFF) return cp != 0xD7 && cp != 0xF7;
    if (cp >= 0x100 && cp <= 0x17F) return true;
    return false;
}

uint32_t fold_letter_cp(uint32_t cp) {
    if (cp < 0x80) {
        if (cp >= 'A' && cp <= 'Z') return cp + 0x20;
        return cp;
    }
    if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 0x20;
    if (cp >= 0x100 && cp <= 0x17F) {
        switch (cp) {
            case 0x130: return 'i'; // dotted capital I
            case 0x131: return cp;  // dotless i is already lowercase
            case 0x138: return cp;  // kra has no uppercase pair
            case 0x149: return cp;  // deprecated 'n
            case 0x178: return 0xFF; // Y with diaeresis
            case 0x17F: return 's'; // long s
            default: break;
        }
        // Latin Extended-A pairs upper/lower on alternating codepoints.
        if (cp <= 0x137 || (cp >= 0x14A && cp <= 0x177)) {
            return (cp % 2 == 0) ? cp + 1 : cp;
        }
        // 0x139..0x148 and 0x179..0x17E: odd codepoint is the uppercase one.
        return (cp % 2 == 1) ? cp + 1 : cp;
    }
    return cp;
}

uint32_t utf8_next(std::string_view s, size_t& i) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    if (b0 < 0x80) {
        ++i;
        return b0;
    }
    int extra = 0;
    uint32_t cp = 0;
    if ((b0 & 0xE0) == 0xC0) {
        extra = 1;
        cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
        extra = 2;
        cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
        extra = 3;
        cp = b0 & 0x07;
    } else {
        ++i;
        return 0xFFFD;
    }
    if (i + 1 + extra > s.size()) {
        ++i;
        return 0xFFFD;
    }
    for (int k = 1; k <= extra; ++k) {
        const auto b = static_cast<unsigned char>(s[i + k]);
        if ((b & 0xC0) != 0x80) {
            ++i;
            return 0xFFFD;
        }
        cp = (cp << 6) | (b & 0x3F);
    }
    i += 1 + extra;
    return cp;
}

void utf8_append(std::string& out, uint32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

std::vector<std::string> letter_tokens(std::string_view s) {
    std::vector<std::string> out;
    std::string cur;
    size_t i = 0;
    while (i < s.size()) {
        const uint32_t cp = utf8_next(s, i);
        if (is_letter_cp(cp)) {
            utf8_append(cur, fold_letter_cp(cp));
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

std::vector<std::string> word_tokens(std::string_view s) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        const auto c = static_cast<unsigned char>(ch);
        if (std::isalnum(c)) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

int64_t word_count(std::string_view s) {
    int64_t n = 0;
    bool in_word = false;
    for (char ch : s) {
        const bool ws = std::isspace(static_cast<unsigned char>(ch)) != 0;
        if (!ws && !in_word) ++n;
        in_word = !ws;
    }
    return n;
}

std::string ascii_lower(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char ch : s) out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    return out;
}

} // namespace revgender
