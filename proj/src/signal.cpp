#include "signal.hpp"

#include <algorithm>

#include "errors.hpp"
#include "lineio.hpp"
#include "textutil.hpp"

namespace revgender {

std::string_view to_string(GenderSignal s) {
    switch (s) {
        case GenderSignal::SignalMale: return "signal_male";
        case GenderSignal::SignalFemale: return "signal_female";
        case GenderSignal::NoSignal: return "no_signal";
    }
    return "no_signal";
}

std::optional<GenderSignal> gender_signal_from_string(std::string_view s) {
    if (s == "signal_male") return GenderSignal::SignalMale;
    if (s == "signal_female") return GenderSignal::SignalFemale;
    if (s == "no_signal") return GenderSignal::NoSignal;
    return std::nullopt;
}

namespace {

std::optional<DictLabel> label_from_string(std::string_view s) {
    if (s == "male") return DictLabel::Male;
    if (s == "female") return DictLabel::Female;
    if (s == "mostly_male") return DictLabel::MostlyMale;
    if (s == "mostly_female") return DictLabel::MostlyFemale;
    if (s == "androgynous") return DictLabel::Androgynous;
    return std::nullopt;
}

std::string fold_key(std::string_view raw) {
    std::string out;
    size_t i = 0;
    while (i < raw.size()) {
        const uint32_t cp = utf8_next(raw, i);
        utf8_append(out, fold_letter_cp(cp));
    }
    return out;
}

std::string strip(std::string_view s) {
    size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
    return std::string(s.substr(b, e - b));
}

} // namespace

NameLexicon NameLexicon::load(const std::string& path) {
    LineReader in(path);
    std::vector<std::pair<std::string, DictLabel>> entries;
    std::string line;
    while (in.next(line)) {
        if (line.empty() || line[0] == '#') continue;
        const size_t tab = line.find('\t');
        if (tab == std::string::npos) {
            throw DataError("lexicon line " + std::to_string(in.line_number()) +
                            ": expected name<TAB>label");
        }
        const std::string name = fold_key(strip(line.substr(0, tab)));
        const auto label = label_from_string(strip(line.substr(tab + 1)));
        if (name.empty() || !label) {
            throw DataError("lexicon line " + std::to_string(in.line_number()) +
                            ": bad name or label");
        }
        entries.emplace_back(name, *label);
    }
    return from_entries(std::move(entries));
}

NameLexicon NameLexicon::from_entries(std::vector<std::pair<std::string, DictLabel>> entries) {
    NameLexicon lex;
    for (auto& [name, label] : entries) lex.entries_[fold_key(name)] = label;
    return lex;
}

std::optional<DictLabel> NameLexicon::lookup(std::string_view lowercase_token) const {
    auto it = entries_.find(std::string(lowercase_token));
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

std::vector<std::string> NameLexicon::names_with_label(DictLabel label) const {
    std::vector<std::string> out;
    for (const auto& [name, l] : entries_) {
        if (l == label) out.push_back(name);
    }
    std::sort(out.begin(), out.end());
    return out;
}

KeywordLists KeywordLists::load(const std::string& female_path, const std::string& male_path) {
    KeywordLists lists;
    auto read_into = [](const std::string& path, std::unordered_set<std::string>& set) {
        LineReader in(path);
        std::string line;
        while (in.next(line)) {
            const std::string tok = fold_key(strip(line));
            if (tok.empty() || tok[0] == '#') continue;
            set.insert(tok);
        }
    };
    read_into(female_path, lists.female);
    read_into(male_path, lists.male);
    for (const auto& t : lists.female) {
        if (lists.male.count(t)) throw DataError("keyword lists overlap on token: " + t);
    }
    return lists;
}

std::string first_token(std::string_view user_name) {
    auto toks = letter_tokens(user_name);
    return toks.empty() ? std::string() : std::move(toks.front());
}

std::optional<GenderSignal> keyword_scan(std::string_view user_name, const KeywordLists& lists) {
    bool saw_female = false, saw_male = false;
    for (const auto& tok : letter_tokens(user_name)) {
        if (lists.female.count(tok)) saw_female = true;
        if (lists.male.count(tok)) saw_male = true;
    }
    if (saw_female == saw_male) return std::nullopt; // no hit, or conflicting hits
    return saw_female ? GenderSignal::SignalFemale : GenderSignal::SignalMale;
}

GenderSignal classify_signal(std::string_view user_name, const NameLexicon& lexicon,
                             const KeywordLists& lists) {
    const std::string tok = first_token(user_name);
    if (!tok.empty()) {
        const auto label = lexicon.lookup(tok);
        if (label == DictLabel::Male) return GenderSignal::SignalMale;
        if (label == DictLabel::Female) return GenderSignal::SignalFemale;
        // mostly_male / mostly_female / androgynous / absent: keep scanning
    }
    if (auto kw = keyword_scan(user_name, lists)) return *kw;
    return GenderSignal::NoSignal;
}

} // namespace revgender
