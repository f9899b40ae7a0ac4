#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace revgender {

enum class DictLabel { Male, Female, MostlyMale, MostlyFemale, Androgynous };

enum class GenderSignal { SignalMale, SignalFemale, NoSignal };

std::string_view to_string(GenderSignal s);
std::optional<GenderSignal> gender_signal_from_string(std::string_view s);

/// Given-name dictionary: lowercase first-name token -> likely gender label.
/// File format: one "name<TAB>label" per line, labels in {male, female,
/// mostly_male, mostly_female, androgynous}; '#' lines are comments.
class NameLexicon {
public:
    static NameLexicon load(const std::string& path);
    static NameLexicon from_entries(std::vector<std::pair<std::string, DictLabel>> entries);

    std::optional<DictLabel> lookup(std::string_view lowercase_token) const;
    size_t size() const { return entries_.size(); }

    /// All names carrying `label`, sorted; synth draws its name pools here.
    std::vector<std::string> names_with_label(DictLabel label) const;

private:
    std::unordered_map<std::string, DictLabel> entries_;
};

/// Two disjoint keyword sets that indicate a gender without being given
/// names ("girl", "dude", ...). One lowercase token per line per file.
struct KeywordLists {
    std::unordered_set<std::string> female;
    std::unordered_set<std::string> male;

    static KeywordLists load(const std::string& female_path, const std::string& male_path);
};

/// Lowercased first maximal run of letters; empty when the name contains no
/// letters. "  J. Smith" -> "j".
std::string first_token(std::string_view user_name);

/// Scans every token of the user name against both keyword lists. Tokens
/// hitting both lists (necessarily different tokens) cancel to nullopt.
std::optional<GenderSignal> keyword_scan(std::string_view user_name, const KeywordLists& lists);

/// Full procedure: definite lexicon label on the first token wins; mostly_*
/// and androgynous labels count as absent and fall through to the keyword
/// scan; otherwise NoSignal.
GenderSignal classify_signal(std::string_view user_name, const NameLexicon& lexicon,
                             const KeywordLists& lists);

} // namespace revgender
