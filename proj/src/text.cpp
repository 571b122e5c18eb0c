#include "gazecap/text.hpp"

#include "gazecap/types.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace gazecap {

Tokens tokenize(std::string_view text) {
    Tokens out;
    std::string cur;
    for (char ch : text) {
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

std::string join(const Tokens& tokens, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) out += sep;
        out += tokens[i];
    }
    return out;
}

namespace {

bool ends_with(const std::string& s, std::string_view suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

// -ing / -ed stem repair: "runn" -> "run" (but keep ll, ss, zz, ff).
std::string undouble(std::string stem) {
    const std::size_t n = stem.size();
    if (n >= 3 && stem[n - 1] == stem[n - 2] && !is_vowel(stem[n - 1]) && stem[n - 1] != 'l' &&
        stem[n - 1] != 's' && stem[n - 1] != 'z' && stem[n - 1] != 'f') {
        stem.pop_back();
    }
    return stem;
}

const std::map<std::string, std::string>& irregular() {
    static const std::map<std::string, std::string> table = {
        {"children", "child"}, {"feet", "foot"},   {"geese", "goose"}, {"men", "man"},
        {"mice", "mouse"},     {"people", "person"}, {"teeth", "tooth"}, {"women", "woman"},
        {"knives", "knife"},   {"leaves", "leaf"},   {"wolves", "wolf"}, {"shelves", "shelf"},
    };
    return table;
}

}  // namespace

std::string lemmatize(const std::string& word) {
    if (auto it = irregular().find(word); it != irregular().end()) return it->second;
    const std::size_t n = word.size();
    if (n <= 3) return word;
    if (ends_with(word, "ies") && n > 4) return word.substr(0, n - 3) + "y";
    if (ends_with(word, "sses")) return word.substr(0, n - 2);
    if (ends_with(word, "xes") || ends_with(word, "ches") || ends_with(word, "shes") || ends_with(word, "zzes")) {
        return word.substr(0, n - 2);
    }
    if (ends_with(word, "ing") && n >= 6) {
        std::string stem = word.substr(0, n - 3);
        if (std::any_of(stem.begin(), stem.end(), is_vowel)) return undouble(stem);
        return word;
    }
    if (ends_with(word, "ed") && n >= 5 && !ends_with(word, "eed")) {
        std::string stem = word.substr(0, n - 2);
        if (std::any_of(stem.begin(), stem.end(), is_vowel)) return undouble(stem);
        return word;
    }
    if (ends_with(word, "s") && !ends_with(word, "ss") && !ends_with(word, "us") && !ends_with(word, "is")) {
        return word.substr(0, n - 1);
    }
    return word;
}

Vocabulary::Vocabulary() {
    for (const char* t : {"<pad>", "<start>", "<end>", "<unk>"}) {
        index_[t] = static_cast<int>(tokens_.size());
        tokens_.emplace_back(t);
    }
}

Vocabulary Vocabulary::build(const std::vector<Tokens>& captions, int min_freq) {
    std::map<std::string, int> counts;
    for (const auto& c : captions) {
        for (const auto& t : c) ++counts[t];
    }
    Vocabulary v;
    for (const auto& [tok, n] : counts) {  // std::map iterates lexicographically
        if (n >= min_freq && v.index_.count(tok) == 0) {
            v.index_[tok] = static_cast<int>(v.tokens_.size());
            v.tokens_.push_back(tok);
        }
    }
    return v;
}

Vocabulary Vocabulary::from_tokens(const std::vector<std::string>& tokens) {
    Vocabulary v;
    if (tokens.size() < 4) throw InputError("vocabulary: missing reserved tokens");
    for (std::size_t i = 0; i < 4; ++i) {
        if (tokens[i] != v.tokens_[i]) throw InputError("vocabulary: reserved token mismatch at " + std::to_string(i));
    }
    for (std::size_t i = 4; i < tokens.size(); ++i) {
        if (!v.index_.emplace(tokens[i], static_cast<int>(i)).second) {
            throw InputError("vocabulary: duplicate token '" + tokens[i] + "'");
        }
        v.tokens_.push_back(tokens[i]);
    }
    return v;
}

int Vocabulary::index(const std::string& token) const {
    auto it = index_.find(token);
    return it == index_.end() ? unknown : it->second;
}

const std::string& Vocabulary::token(int index) const {
    if (index < 0 || index >= size()) throw InputError("vocabulary: index " + std::to_string(index) + " out of range");
    return tokens_[static_cast<std::size_t>(index)];
}

std::vector<int> Vocabulary::encode(const Tokens& caption) const {
    std::vector<int> ids;
    ids.reserve(caption.size() + 1);
    for (const auto& t : caption) ids.push_back(index(t));
    ids.push_back(end);
    return ids;
}

Tokens Vocabulary::decode(const std::vector<int>& ids) const {
    Tokens out;
    for (int id : ids) {
        if (id == end) break;
        if (id == pad || id == start) continue;
        out.push_back(token(id));
    }
    return out;
}

}  // namespace gazecap
