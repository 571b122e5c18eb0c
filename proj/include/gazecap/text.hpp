#ifndef GAZECAP_TEXT_HPP
#define GAZECAP_TEXT_HPP

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace gazecap {

using Tokens = std::vector<std::string>;

/// Lowercases and splits on anything that is not an ASCII letter or digit.
Tokens tokenize(std::string_view text);

std::string join(const Tokens& tokens, std::string_view sep = " ");

/// Deterministic English suffix stripper (plurals, -ing, -ed). See README for
/// the rule table.
std::string lemmatize(const std::string& word);

/// Token <-> index map with four reserved entries at fixed indices.
class Vocabulary {
public:
    static constexpr int pad = 0;
    static constexpr int start = 1;
    static constexpr int end = 2;
    static constexpr int unknown = 3;

    Vocabulary();

    /// Keeps tokens occurring at least `min_freq` times; others map to <unk>.
    /// Regular tokens are indexed in lexicographic order.
    static Vocabulary build(const std::vector<Tokens>& captions, int min_freq);
    /// Inverse of tokens(): rebuilds from the full ordered token list.
    static Vocabulary from_tokens(const std::vector<std::string>& tokens);

    int size() const { return static_cast<int>(tokens_.size()); }
    int index(const std::string& token) const;
    const std::string& token(int index) const;
    const std::vector<std::string>& tokens() const { return tokens_; }

    /// Token ids followed by the end token.
    std::vector<int> encode(const Tokens& caption) const;
    /// Stops at the first end token; reserved tokens other than <unk> are dropped.
    Tokens decode(const std::vector<int>& ids) const;

private:
    std::vector<std::string> tokens_;
    std::map<std::string, int> index_;
};

}  // namespace gazecap

#endif  // GAZECAP_TEXT_HPP
