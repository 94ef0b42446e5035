#pragma once

#include "qibitz/enrichment.hpp"
#include "qibitz/facet_index.hpp"
#include "qibitz/pubmed_record.hpp"
#include "qibitz/vocabulary.hpp"

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

// Deterministic generators for PubMed-style XML, record corpora and queries.
// Used by the test suites, the benchmark and the qibitz_synth tool.
namespace qibitz::synth {

std::string xml_escape(std::string_view text);

/// One <PubmedArticle> element carrying every field the parser reads.
std::string citation_xml(const PubMedRecord& record);

/// A complete <PubmedArticleSet> document: the articles in order, then one
/// <DeleteCitation> block when `deletes` is non-empty.
std::string batch_xml(std::span<const PubMedRecord> upserts, std::span<const Pmid> deletes = {});

/// batch_xml() gzip-compressed, ready to drop into an archive directory.
std::string batch_gz(std::span<const PubMedRecord> upserts, std::span<const Pmid> deletes = {});

/// Shape of a random enriched corpus for facet tests.
struct FacetCorpusOptions {
    std::size_t records = 500;
    std::size_t drug_values = 30;
    std::size_t gene_values = 20;
    std::size_t mesh_values = 25;
    std::size_t max_values_per_facet = 4;
    int year_min = 1990;
    int year_max = 2024;
    double missing_year_rate = 0.05;
    Pmid first_pmid = 1000;
    std::uint64_t seed = 1;
};

/// Value pools the corpus draws from, in a stable order.
std::vector<std::string> drug_pool(std::size_t n);
std::vector<std::string> gene_pool(std::size_t n);
std::vector<std::string> mesh_pool(std::size_t n);
/// Small closed vocabulary used for titles and abstracts.
const std::vector<std::string>& word_pool();

std::vector<EnrichedRecord> random_facet_corpus(const FacetCorpusOptions& options);

/// A query over the value pools of `options`: random subsets of filters,
/// sometimes a year range or text terms, random pagination.
FacetQuery random_query(std::mt19937_64& rng, const FacetCorpusOptions& options);

/// Shape of a random text corpus for the extraction path.
struct TextCorpusOptions {
    std::size_t records = 1000;
    Pmid first_pmid = 1;
    double genetics_rate = 0.5;      // records whose abstract mentions genetics
    double drug_mention_rate = 0.6;  // records that name at least one drug synonym
    double gene_mention_rate = 0.6;  // records that name at least one gene symbol
    double mesh_rate = 0.3;          // records carrying a mapped MeSH descriptor
    std::uint64_t seed = 7;
};

/// Records whose text mentions vocabulary synonyms and symbols at random.
std::vector<PubMedRecord> random_text_corpus(const DrugVocabulary& drugs, const GeneVocabulary& genes,
                                             const TextCorpusOptions& options);

}  // namespace qibitz::synth
