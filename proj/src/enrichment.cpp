#include "qibitz/enrichment.hpp"

#include <omp.h>

#include <algorithm>
#include <exception>

namespace qibitz {

EnrichedRecord Enricher::enrich(const PubMedRecord& record, const DropSink& on_drop) const {
    EnrichedRecord out;
    out.record = record;
    out.drug_matches = drugs_->index(record);
    out.gene_matches = genes_->index(record, on_drop);
    out.drugs = distinct_tokens(out.drug_matches);
    out.genes = distinct_symbols(out.gene_matches);
    std::sort(out.drugs.begin(), out.drugs.end());
    std::sort(out.genes.begin(), out.genes.end());
    return out;
}

EnrichedChunk Enricher::enrich_serial(std::span<const PubMedRecord> records) const {
    EnrichedChunk chunk;
    chunk.records.reserve(records.size());
    for (const auto& r : records)
        chunk.records.push_back(enrich(r, [&](const DroppedCandidate& d) { chunk.drops.push_back(d); }));
    return chunk;
}

EnrichedChunk Enricher::enrich_parallel(std::span<const PubMedRecord> records, int threads) const {
    const auto n = static_cast<std::ptrdiff_t>(records.size());
    std::vector<EnrichedRecord> enriched(records.size());
    std::vector<std::vector<DroppedCandidate>> drops(records.size());
    std::exception_ptr failure;

#pragma omp parallel for schedule(dynamic, 16) num_threads(std::max(1, threads))
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        try {
            enriched[i] = enrich(records[i], [&, i](const DroppedCandidate& d) { drops[i].push_back(d); });
        } catch (...) {
#pragma omp critical(qibitz_enrich_failure)
            if (!failure)
                failure = std::current_exception();
        }
    }
    if (failure)
        std::rethrow_exception(failure);

    EnrichedChunk chunk;
    chunk.records = std::move(enriched);
    for (auto& d : drops)
        chunk.drops.insert(chunk.drops.end(), std::make_move_iterator(d.begin()), std::make_move_iterator(d.end()));
    return chunk;
}

}  // namespace qibitz
