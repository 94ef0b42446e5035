#include "qibitz/text_match.hpp"

#include <algorithm>
#include <deque>

namespace qibitz::text {

NormalizedText normalize_for_phrase(std::string_view source) {
    NormalizedText out;
    out.text.reserve(source.size());
    out.origin.reserve(source.size());
    bool pending_space = false;
    for (std::size_t i = 0; i < source.size(); ++i) {
        const auto c = static_cast<unsigned char>(source[i]);
        if (!is_word_byte(c)) {
            pending_space = !out.text.empty();
            continue;
        }
        if (pending_space) {
            out.text.push_back(' ');
            out.origin.push_back(i);
            pending_space = false;
        }
        out.text.push_back(fold_ascii(static_cast<char>(c)));
        out.origin.push_back(i);
    }
    return out;
}

std::string normalize_phrase(std::string_view phrase) { return normalize_for_phrase(phrase).text; }

std::vector<std::string> word_tokens(std::string_view source) {
    std::vector<std::string> tokens;
    std::string current;
    for (char ch : source) {
        if (is_word_byte(static_cast<unsigned char>(ch))) {
            current.push_back(fold_ascii(ch));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty())
        tokens.push_back(std::move(current));
    return tokens;
}

bool bounded_by_non_word(std::string_view s, std::size_t begin, std::size_t end) {
    if (begin > 0 && is_word_byte(static_cast<unsigned char>(s[begin - 1])))
        return false;
    if (end < s.size() && is_word_byte(static_cast<unsigned char>(s[end])))
        return false;
    return true;
}

PatternSet::PatternSet(const std::vector<std::string>& patterns) {
    nodes_.emplace_back();
    pattern_lengths_.reserve(patterns.size());
    for (std::uint32_t id = 0; id < patterns.size(); ++id) {
        const std::string& p = patterns[id];
        pattern_lengths_.push_back(p.size());
        if (p.empty())
            continue;
        std::int32_t node = 0;
        for (char ch : p) {
            const auto c = static_cast<unsigned char>(ch);
            std::int32_t nxt = child(node, c);
            if (nxt < 0) {
                nxt = static_cast<std::int32_t>(nodes_.size());
                nodes_.emplace_back();
                auto& edges = nodes_[node].next;
                edges.insert(std::lower_bound(edges.begin(), edges.end(), std::make_pair(c, std::int32_t{0}),
                                              [](const auto& a, const auto& b) { return a.first < b.first; }),
                             {c, nxt});
            }
            node = nxt;
        }
        nodes_[node].terminal = true;
        nodes_[node].outputs.push_back(id);
    }

    // Breadth-first construction of failure and dictionary links.
    std::deque<std::int32_t> queue;
    for (const auto& [c, nxt] : nodes_[0].next) {
        nodes_[nxt].fail = 0;
        queue.push_back(nxt);
    }
    while (!queue.empty()) {
        const std::int32_t node = queue.front();
        queue.pop_front();
        for (const auto& [c, nxt] : nodes_[node].next) {
            std::int32_t f = nodes_[node].fail;
            while (f != 0 && child(f, c) < 0)
                f = nodes_[f].fail;
            const std::int32_t target = child(f, c);
            nodes_[nxt].fail = (target >= 0 && target != nxt) ? target : 0;
            const std::int32_t fl = nodes_[nxt].fail;
            nodes_[nxt].dict_link = nodes_[fl].terminal ? fl : nodes_[fl].dict_link;
            queue.push_back(nxt);
        }
    }
}

std::int32_t PatternSet::child(std::int32_t node, unsigned char c) const {
    const auto& edges = nodes_[node].next;
    auto it = std::lower_bound(edges.begin(), edges.end(), c,
                               [](const auto& edge, unsigned char key) { return edge.first < key; });
    return (it != edges.end() && it->first == c) ? it->second : -1;
}

std::int32_t PatternSet::step(std::int32_t state, unsigned char c) const {
    while (true) {
        const std::int32_t nxt = child(state, c);
        if (nxt >= 0)
            return nxt;
        if (state == 0)
            return 0;
        state = nodes_[state].fail;
    }
}

}  // namespace qibitz::text
