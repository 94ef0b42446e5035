#include "qibitz/gene_indexer.hpp"

#include "qibitz/digest.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <map>
#include <tuple>

namespace qibitz {

std::string render_prompt(const DisambiguationRequest& req) {
    std::string out;
    out.reserve(220 + req.symbol.size() + req.gene_name.size() + req.text.size());
    out += "Answer the following question by true or false. Do not add anything else.  "
           "In the text between single quotes that follows this question, does the acronym ";
    out += req.symbol;
    out += " refer to the gene ";
    out += req.gene_name;
    out += "? \"";
    out += req.text;
    out += "\"";
    return out;
}

std::string request_digest(const DisambiguationRequest& req) {
    Sha256 h;
    h.update(req.symbol);
    h.update(std::string_view("\x1f", 1));
    h.update(req.gene_name);
    h.update(std::string_view("\x1f", 1));
    h.update(req.text);
    return h.hex_final();
}

Verdict parse_verdict(std::string_view raw) {
    std::string_view s = raw;
    auto strip = [&] {
        bool changed = true;
        while (changed) {
            changed = false;
            while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
                s.remove_prefix(1);
                changed = true;
            }
            while (!s.empty() && (std::isspace(static_cast<unsigned char>(s.back())) ||
                                  std::ispunct(static_cast<unsigned char>(s.back())))) {
                s.remove_suffix(1);
                changed = true;
            }
        }
    };
    strip();
    std::string folded(s);
    std::transform(folded.begin(), folded.end(), folded.begin(), [](unsigned char c) { return std::tolower(c); });
    if (folded == "true")
        return Verdict{Verdict::Kind::True, std::string(raw)};
    if (folded == "false")
        return Verdict{Verdict::Kind::False, std::string(raw)};
    return Verdict::unclear(std::string(raw));
}

std::string to_json_line(const DroppedCandidate& d) {
    nlohmann::json j = {{"pmid", d.pmid}, {"symbol", d.symbol}, {"reason", d.reason}};
    if (d.raw_reply)
        j["raw_reply"] = *d.raw_reply;
    return j.dump();
}

DroppedCandidate dropped_candidate_from_json(std::string_view line) {
    const auto j = nlohmann::json::parse(line);
    DroppedCandidate d;
    d.pmid = j.at("pmid").get<Pmid>();
    d.symbol = j.at("symbol").get<std::string>();
    d.reason = j.at("reason").get<std::string>();
    if (j.contains("raw_reply"))
        d.raw_reply = j["raw_reply"].get<std::string>();
    return d;
}

// ---------------------------------------------------------------------------
// Context lexicon

const ContextLexicon& ContextLexicon::defaults() {
    static const ContextLexicon lexicon = from_words({"gene", "genes", "genetic", "genetics", "genome", "genomic",
                                                      "genomics", "mutation", "mutations", "mutant", "allele", "exon",
                                                      "mRNA", "oncogene"});
    return lexicon;
}

ContextLexicon ContextLexicon::from_words(const std::vector<std::string>& words) {
    ContextLexicon lex;
    for (const auto& w : words) {
        for (auto& tok : text::word_tokens(w))
            lex.words_.insert(std::move(tok));
    }
    return lex;
}

ContextLexicon ContextLexicon::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw FileNotFoundError(path);
    std::vector<std::string> words;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line.front() == '#')
            continue;
        words.push_back(line);
    }
    return from_words(words);
}

bool ContextLexicon::matches_text(std::string_view text) const {
    for (const auto& tok : text::word_tokens(text)) {
        if (words_.count(tok))
            return true;
    }
    return false;
}

bool has_genetic_context(const PubMedRecord& record, const ContextLexicon& lexicon) {
    if (lexicon.matches_text(record.title) || lexicon.matches_text(record.abstract))
        return true;
    return std::any_of(record.other_terms.begin(), record.other_terms.end(),
                       [&](const std::string& t) { return lexicon.matches_text(t); });
}

std::string prompt_text(const PubMedRecord& record) {
    if (record.abstract.empty())
        return record.title;
    if (record.title.empty())
        return record.abstract;
    return record.title + " " + record.abstract;
}

// ---------------------------------------------------------------------------
// Indexer

namespace {

std::vector<std::string> symbol_patterns(const GeneVocabulary& vocab, std::vector<const GeneEntry*>& entries) {
    std::vector<std::string> patterns;
    for (const auto& e : vocab.entries()) {
        patterns.push_back(e.symbol);
        entries.push_back(&e);
    }
    return patterns;
}

}  // namespace

GeneIndexer::GeneIndexer(const GeneVocabulary& vocab, Disambiguator& oracle, ContextLexicon lexicon)
    : vocab_(&vocab), oracle_(&oracle), lexicon_(std::move(lexicon)),
      automaton_(symbol_patterns(vocab, pattern_entries_)) {}

std::vector<GeneMatch> GeneIndexer::index(const PubMedRecord& record, const DropSink& on_drop) const {
    std::vector<GeneMatch> out;

    for (const auto& d : record.mesh_descriptors) {
        if (auto sym = vocab_->symbol_for_mesh(d)) {
            const bool dup = std::any_of(out.begin(), out.end(), [&](const GeneMatch& m) { return m.symbol == *sym; });
            if (!dup)
                out.push_back({std::string(*sym), GeneChannel::Mesh, std::nullopt, d, SourceField::MH});
        }
    }

    // Text occurrences grouped by symbol, symbols in first-occurrence order.
    std::vector<const GeneEntry*> order;
    std::map<const GeneEntry*, std::vector<SourceField>> fields;
    auto scan = [&](std::string_view text, SourceField field) {
        automaton_.for_each_match(text, [&](std::uint32_t id, std::size_t begin, std::size_t end) {
            if (!text::bounded_by_non_word(text, begin, end))
                return;
            const GeneEntry* e = pattern_entries_[id];
            auto [it, inserted] = fields.try_emplace(e);
            if (inserted)
                order.push_back(e);
            if (std::find(it->second.begin(), it->second.end(), field) == it->second.end())
                it->second.push_back(field);
        });
    };
    scan(record.title, SourceField::TI);
    scan(record.abstract, SourceField::AB);
    for (const auto& term : record.other_terms)
        scan(term, SourceField::OT);
    if (order.empty())
        return out;

    std::optional<bool> context;
    auto in_context = [&] {
        if (!context)
            context = has_genetic_context(record, lexicon_);
        return *context;
    };
    auto drop = [&](const GeneEntry& e, std::string reason, std::optional<std::string> raw = std::nullopt) {
        if (on_drop)
            on_drop(DroppedCandidate{record.pmid, e.symbol, std::move(reason), std::move(raw)});
    };

    for (const GeneEntry* e : order) {
        std::optional<GeneTier> tier;
        switch (e->ambiguity_class) {
        case AmbiguityClass::Unambiguous:
            tier = GeneTier::Direct;
            break;
        case AmbiguityClass::ContextGated:
            if (in_context())
                tier = GeneTier::Context;
            break;
        case AmbiguityClass::SemanticGated: {
            if (!in_context())
                break;
            DisambiguationRequest req{e->symbol, e->gene_name, prompt_text(record)};
            if (req.text.empty()) {
                drop(*e, "empty-text");
                break;
            }
            oracle_calls_.fetch_add(1, std::memory_order_relaxed);
            try {
                const Verdict v = oracle_->verdict(req);
                if (v.kind == Verdict::Kind::True)
                    tier = GeneTier::Semantic;
                else if (v.kind == Verdict::Kind::Indeterminate)
                    drop(*e, "indeterminate", v.raw);
            } catch (const std::exception& ex) {
                drop(*e, std::string("oracle-error: ") + ex.what());
            }
            break;
        }
        }
        if (!tier)
            continue;
        for (SourceField f : fields[e])
            out.push_back({e->symbol, GeneChannel::Text, tier, e->symbol, f});
    }
    return out;
}

std::vector<GeneMatch> index_genes(const PubMedRecord& record, const GeneVocabulary& vocab, Disambiguator& oracle,
                                   const DropSink& on_drop) {
    return GeneIndexer(vocab, oracle).index(record, on_drop);
}

}  // namespace qibitz
