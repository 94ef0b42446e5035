#include "qibitz/drug_indexer.hpp"

#include <algorithm>
#include <set>
#include <tuple>

namespace qibitz {

namespace {

std::vector<std::string> collect_patterns(const DrugVocabulary& vocab, std::vector<std::string>& tokens) {
    std::vector<std::string> patterns;
    for (const auto& e : vocab.entries()) {
        for (const auto& syn : e.synonyms) {
            std::string p = text::normalize_phrase(syn);
            if (p.empty())
                continue;
            patterns.push_back(std::move(p));
            tokens.push_back(e.token);
        }
    }
    return patterns;
}

void dedupe(std::vector<DrugMatch>& matches) {
    std::set<std::tuple<std::string, DrugChannel, SourceField>> seen;
    std::erase_if(matches, [&](const DrugMatch& m) { return !seen.emplace(m.token, m.channel, m.field).second; });
}

}  // namespace

DrugIndexer::DrugIndexer(const DrugVocabulary& vocab)
    : vocab_(&vocab), automaton_(collect_patterns(vocab, pattern_tokens_)) {}

void DrugIndexer::scan_text(std::string_view source, SourceField field, std::vector<DrugMatch>& out) const {
    if (source.empty())
        return;
    const auto norm = text::normalize_for_phrase(source);
    const std::string& t = norm.text;
    automaton_.for_each_match(t, [&](std::uint32_t id, std::size_t begin, std::size_t end) {
        // Normalized text only holds word bytes and single spaces, so a phrase
        // boundary is a space or an edge.
        if (begin > 0 && t[begin - 1] != ' ')
            return;
        if (end < t.size() && t[end] != ' ')
            return;
        const std::size_t from = norm.origin[begin];
        const std::size_t to = norm.origin[end - 1] + 1;
        out.push_back({pattern_tokens_[id], DrugChannel::Text, std::string(source.substr(from, to - from)), field});
    });
}

std::vector<DrugMatch> DrugIndexer::index(const PubMedRecord& record) const {
    std::vector<DrugMatch> out;
    scan_text(record.title, SourceField::TI, out);
    scan_text(record.abstract, SourceField::AB, out);
    for (const auto& term : record.other_terms)
        scan_text(term, SourceField::OT, out);
    for (const auto& d : record.mesh_descriptors) {
        if (auto tok = vocab_->token_for_mesh(d))
            out.push_back({std::string(*tok), DrugChannel::Mesh, d, SourceField::MH});
    }
    for (const auto& d : record.substance_names) {
        if (auto tok = vocab_->token_for_mesh(d))
            out.push_back({std::string(*tok), DrugChannel::Mesh, d, SourceField::NM});
    }
    for (const auto& rn : record.registry_numbers) {
        if (auto tok = vocab_->token_for_registry(rn))
            out.push_back({std::string(*tok), DrugChannel::Registry, rn, SourceField::RN});
    }
    dedupe(out);
    return out;
}

std::vector<DrugMatch> index_drugs(const PubMedRecord& record, const DrugVocabulary& vocab) {
    return DrugIndexer(vocab).index(record);
}

}  // namespace qibitz
