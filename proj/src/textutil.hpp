#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace revgender {

// Letter handling covers ASCII plus Latin-1 Supplement and Latin Extended-A
// (U+00C0..U+017F), which is where the bundled name lexicon lives. Codepoints
// outside that range act as token boundaries.

bool is_letter_cp(uint32_t cp);

/// Simple case folding for the supported letter range.
uint32_t fold_letter_cp(uint32_t cp);

/// Decodes one UTF-8 codepoint at `i`; advances `i`. Invalid bytes decode as
/// U+FFFD and consume one byte.
uint32_t utf8_next(std::string_view s, size_t& i);

void utf8_append(std::string& out, uint32_t cp);

/// Maximal runs of letters, case-folded. "  J. Smith" -> {"j", "smith"}.
std::vector<std::string> letter_tokens(std::string_view s);

/// Lowercased maximal runs of ASCII alphanumerics; used for bag-of-words and
/// sentiment lookups.
std::vector<std::string> word_tokens(std::string_view s);

/// Number of maximal non-whitespace runs.
int64_t word_count(std::string_view s);

std::string ascii_lower(std::string_view s);

} // namespace revgender
