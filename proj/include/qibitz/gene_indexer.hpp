#pragma once

#include "qibitz/errors.hpp"
#include "qibitz/matches.hpp"
#include "qibitz/pubmed_record.hpp"
#include "qibitz/text_match.hpp"
#include "qibitz/vocabulary.hpp"

#include <atomic>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace qibitz {

/// Inputs substituted into the disambiguation prompt.
struct DisambiguationRequest {
    std::string symbol;
    std::string gene_name;
    std::string text;  // title and abstract of the article
};

/// Prompt sent to the language model, byte for byte. Substitution is a single
/// pass; placeholder-like text inside the inputs is left alone and nothing is
/// escaped.
std::string render_prompt(const DisambiguationRequest& req);

/// Stable digest of a request, used as the verdict cache key.
std::string request_digest(const DisambiguationRequest& req);

struct Verdict {
    enum class Kind { True, False, Indeterminate };
    Kind kind = Kind::Indeterminate;
    std::string raw;  // original reply, kept for indeterminate verdicts

    static Verdict yes() { return {Kind::True, "true"}; }
    static Verdict no() { return {Kind::False, "false"}; }
    static Verdict unclear(std::string raw_reply) { return {Kind::Indeterminate, std::move(raw_reply)}; }
};

/// Whitespace and trailing punctuation trimmed, case folded; "true" / "false"
/// map to verdicts, anything else is indeterminate.
Verdict parse_verdict(std::string_view raw);

/// Raised by a disambiguator that could not produce any reply.
class OracleUnavailable : public RetryableError {
public:
    explicit OracleUnavailable(const std::string& message) : RetryableError("oracle-unavailable", message) {}
};

/// Semantic check for highly polysemic symbols. Implementations must be
/// deterministic for identical requests and safe to call concurrently.
class Disambiguator {
public:
    virtual ~Disambiguator() = default;
    virtual Verdict verdict(const DisambiguationRequest& req) = 0;
};

/// A semantic candidate that was not resolved and can be replayed later.
struct DroppedCandidate {
    Pmid pmid = 0;
    std::string symbol;
    std::string reason;
    std::optional<std::string> raw_reply;

    bool operator==(const DroppedCandidate&) const = default;
};

std::string to_json_line(const DroppedCandidate& d);
DroppedCandidate dropped_candidate_from_json(std::string_view line);

/// Words whose presence marks a text as discussing genetics. Compared
/// case-insensitively against whole word tokens.
class ContextLexicon {
public:
    static const ContextLexicon& defaults();
    static ContextLexicon from_words(const std::vector<std::string>& words);
    /// One word per line; blank lines and '#' comments ignored.
    static ContextLexicon from_file(const std::string& path);

    bool matches_text(std::string_view text) const;
    const std::set<std::string>& words() const { return words_; }

private:
    std::set<std::string> words_;
};

bool has_genetic_context(const PubMedRecord& record, const ContextLexicon& lexicon = ContextLexicon::defaults());

/// Prompt text for a record: title and abstract joined by one space.
std::string prompt_text(const PubMedRecord& record);

using DropSink = std::function<void(const DroppedCandidate&)>;

/// Gene field derivation: MeSH descriptors mapped through the vocabulary, plus
/// exact symbol occurrences in TI/AB/OT gated by each symbol's ambiguity class:
///   UNAMBIGUOUS     emitted directly
///   CONTEXT_GATED   emitted when the record discusses genetics
///   SEMANTIC_GATED  emitted when the record discusses genetics and the
///                   disambiguator answers true
/// Registry numbers are never consulted.
class GeneIndexer {
public:
    GeneIndexer(const GeneVocabulary& vocab, Disambiguator& oracle,
                ContextLexicon lexicon = ContextLexicon::defaults());

    std::vector<GeneMatch> index(const PubMedRecord& record, const DropSink& on_drop = {}) const;

    /// Disambiguator invocations made so far, across all threads.
    std::uint64_t oracle_calls() const { return oracle_calls_.load(std::memory_order_relaxed); }

    const GeneVocabulary& vocabulary() const { return *vocab_; }
    const ContextLexicon& lexicon() const { return lexicon_; }

private:
    const GeneVocabulary* vocab_;
    Disambiguator* oracle_;
    ContextLexicon lexicon_;
    std::vector<const GeneEntry*> pattern_entries_;
    text::PatternSet automaton_;
    mutable std::atomic<std::uint64_t> oracle_calls_{0};
};

std::vector<GeneMatch> index_genes(const PubMedRecord& record, const GeneVocabulary& vocab, Disambiguator& oracle,
                                   const DropSink& on_drop = {});

}  // namespace qibitz
