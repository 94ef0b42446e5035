#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace qibitz::text {

/// ASCII letters and digits are word bytes. Bytes >= 0x80 (UTF-8 sequences)
/// are treated as word bytes too, so a match never splits a multibyte letter.
constexpr bool is_word_byte(unsigned char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
}

constexpr char fold_ascii(char c) {
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

/// Case-folded text where every run of non-word bytes is one space, with a
/// map back to byte positions of the source.
struct NormalizedText {
    std::string text;
    std::vector<std::size_t> origin;  // origin[i] is the source offset of text[i]
};

NormalizedText normalize_for_phrase(std::string_view source);

/// Normalized form of a vocabulary phrase (same folding as the text side).
std::string normalize_phrase(std::string_view phrase);

/// Lowercased word tokens (maximal runs of word bytes).
std::vector<std::string> word_tokens(std::string_view source);

/// True when [begin, end) in `s` is flanked by non-word bytes or string edges.
bool bounded_by_non_word(std::string_view s, std::size_t begin, std::size_t end);

/// Aho-Corasick automaton over byte strings. Reports every (possibly
/// overlapping) occurrence of every pattern in one pass.
class PatternSet {
public:
    PatternSet() = default;
    explicit PatternSet(const std::vector<std::string>& patterns);

    std::size_t pattern_count() const { return pattern_lengths_.size(); }

    /// Calls fn(pattern_index, begin, end) for every occurrence, ordered by end.
    template <class Fn>
    void for_each_match(std::string_view haystack, Fn&& fn) const {
        if (nodes_.empty())
            return;
        std::int32_t state = 0;
        for (std::size_t i = 0; i < haystack.size(); ++i) {
            state = step(state, static_cast<unsigned char>(haystack[i]));
            for (std::int32_t out = nodes_[state].terminal ? state : nodes_[state].dict_link; out >= 0;
                 out = nodes_[out].dict_link) {
                for (std::uint32_t id : nodes_[out].outputs)
                    fn(id, i + 1 - pattern_lengths_[id], i + 1);
            }
        }
    }

private:
    struct Node {
        std::vector<std::pair<unsigned char, std::int32_t>> next;  // sorted by byte
        std::int32_t fail = 0;
        std::int32_t dict_link = -1;  // nearest proper suffix node with outputs
        bool terminal = false;
        std::vector<std::uint32_t> outputs;
    };

    std::int32_t child(std::int32_t node, unsigned char c) const;
    std::int32_t step(std::int32_t state, unsigned char c) const;

    std::vector<Node> nodes_;
    std::vector<std::size_t> pattern_lengths_;
};

}  // namespace qibitz::text
