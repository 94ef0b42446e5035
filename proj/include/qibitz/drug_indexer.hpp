#pragma once

#include "qibitz/matches.hpp"
#include "qibitz/pubmed_record.hpp"
#include "qibitz/text_match.hpp"
#include "qibitz/vocabulary.hpp"

#include <vector>

namespace qibitz {

/// Derives the drug field from three evidence channels: synonyms in free text
/// (TI, AB, OT), descriptor UIs (MH, NM) and registry numbers (RN).
///
/// The synonym automaton is built once here; `vocab` must outlive the indexer.
/// index() is const and safe to call from many threads.
class DrugIndexer {
public:
    explicit DrugIndexer(const DrugVocabulary& vocab);

    /// One DrugMatch per (token, channel, field), first evidence kept.
    std::vector<DrugMatch> index(const PubMedRecord& record) const;

    const DrugVocabulary& vocabulary() const { return *vocab_; }

private:
    void scan_text(std::string_view text, SourceField field, std::vector<DrugMatch>& out) const;

    const DrugVocabulary* vocab_;
    std::vector<std::string> pattern_tokens_;  // pattern index -> token
    text::PatternSet automaton_;
};

std::vector<DrugMatch> index_drugs(const PubMedRecord& record, const DrugVocabulary& vocab);

}  // namespace qibitz
