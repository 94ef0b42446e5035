#pragma once

#include "qibitz/drug_indexer.hpp"
#include "qibitz/gene_indexer.hpp"
#include "qibitz/matches.hpp"
#include "qibitz/pubmed_record.hpp"

#include <span>
#include <string>
#include <vector>

namespace qibitz {

/// A parsed record plus the derived drug and gene fields. `drugs` and `genes`
/// are the sorted distinct values of the provenance lists.
struct EnrichedRecord {
    PubMedRecord record;
    std::vector<std::string> drugs;
    std::vector<std::string> genes;
    std::vector<DrugMatch> drug_matches;
    std::vector<GeneMatch> gene_matches;

    Pmid pmid() const { return record.pmid; }
    bool operator==(const EnrichedRecord&) const = default;
};

struct EnrichedChunk {
    std::vector<EnrichedRecord> records;  // same order as the input
    std::vector<DroppedCandidate> drops;  // in input order
};

/// Runs both indexers over records. Stateless apart from the disambiguator
/// behind the gene indexer.
class Enricher {
public:
    Enricher(const DrugIndexer& drugs, const GeneIndexer& genes) : drugs_(&drugs), genes_(&genes) {}

    EnrichedRecord enrich(const PubMedRecord& record, const DropSink& on_drop = {}) const;

    /// Reference implementation, one record after another.
    EnrichedChunk enrich_serial(std::span<const PubMedRecord> records) const;

    /// OpenMP parallel-for over records with `threads` workers. Output equals
    /// enrich_serial() for a deterministic disambiguator.
    EnrichedChunk enrich_parallel(std::span<const PubMedRecord> records, int threads) const;

    const GeneIndexer& gene_indexer() const { return *genes_; }

private:
    const DrugIndexer* drugs_;
    const GeneIndexer* genes_;
};

}  // namespace qibitz
