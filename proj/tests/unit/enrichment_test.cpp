#include "qibitz/disambiguator.hpp"
#include "qibitz/enrichment.hpp"
#include "qibitz/facet_index.hpp"
#include "qibitz/record_json.hpp"
#include "qibitz/synthetic.hpp"
#include "support/fixtures.hpp"

#include <doctest.h>

using namespace qibitz;
using qibitz::testing::sample_drugs;
using qibitz::testing::sample_genes;
using qibitz::testing::ScriptedOracle;

TEST_CASE("enriched fields are the sorted distinct provenance values") {
    ScriptedOracle oracle({{"CAD", "true"}});
    DrugIndexer drugs(sample_drugs());
    GeneIndexer genes(sample_genes(), oracle);
    Enricher enricher(drugs, genes);
    PubMedRecord r = testing::text_record(1, "Metformin and aspirin", "VHL gene and CAD gene; GNAQ; aspirin again");
    r.mesh_descriptors = {"D000075924"};
    const EnrichedRecord e = enricher.enrich(r);
    CHECK(e.drugs == std::vector<std::string>{"acetylsalicylic-acid", "metformin"});
    CHECK(e.genes == std::vector<std::string>{"ATRX", "CAD", "GNAQ", "VHL"});
    CHECK(e.drugs == [&] {
        auto t = distinct_tokens(e.drug_matches);
        std::sort(t.begin(), t.end());
        return t;
    }());
    CHECK(e.record == r);
}

TEST_CASE("parallel enrichment equals the serial reference") {
    ScriptedOracle oracle({{"CAD", "true"}, {"MS", "false"}, {"AR", "maybe"}});
    DrugIndexer drugs(sample_drugs());
    GeneIndexer genes(sample_genes(), oracle);
    Enricher enricher(drugs, genes);
    synth::TextCorpusOptions o;
    o.records = 3000;
    const auto corpus = synth::random_text_corpus(sample_drugs(), sample_genes(), o);
    const auto serial = enricher.enrich_serial(corpus);
    for (int threads : {1, 2, 4, 7}) {
        const auto parallel = enricher.enrich_parallel(corpus, threads);
        CHECK(parallel.records == serial.records);
        CHECK(parallel.drops == serial.drops);
    }
    std::size_t with_drugs = 0, with_genes = 0;
    for (const auto& r : serial.records) {
        with_drugs += !r.drugs.empty();
        with_genes += !r.genes.empty();
    }
    CHECK(with_drugs > 1000);
    CHECK(with_genes > 500);
}

TEST_CASE("exceptions inside a parallel chunk surface to the caller") {
    class Exploding : public Disambiguator {
    public:
        Verdict verdict(const DisambiguationRequest&) override { throw std::logic_error("bug"); }
    } oracle;
    DrugIndexer drugs(sample_drugs());
    GeneIndexer genes(sample_genes(), oracle);
    Enricher enricher(drugs, genes);
    // logic_error is a std::exception, which the gene indexer converts into a
    // drop; the chunk itself completes.
    std::vector<PubMedRecord> rs = {testing::text_record(1, "", "CAD gene")};
    const auto out = enricher.enrich_parallel(rs, 2);
    CHECK(out.records.size() == 1);
    CHECK(out.drops.size() == 1);
}

TEST_CASE("facet counting kernels agree") {
    synth::FacetCorpusOptions o;
    o.records = 5000;
    const auto corpus = synth::random_facet_corpus(o);
    std::vector<const EnrichedRecord*> ptrs;
    for (const auto& r : corpus)
        ptrs.push_back(&r);
    const auto serial = count_facets_serial(ptrs);
    for (int threads : {1, 3, 4})
        CHECK(count_facets_parallel(ptrs, threads) == serial);
    CHECK(count_facets_parallel({}, 4) == FacetCounts{});
}

TEST_CASE("enriched record JSON round trip") {
    ScriptedOracle oracle({{"CAD", "true"}});
    DrugIndexer drugs(sample_drugs());
    GeneIndexer genes(sample_genes(), oracle);
    Enricher enricher(drugs, genes);
    PubMedRecord r = testing::text_record(5, "Aspirin in CAD gene \"carriers\"", "unicode \xC3\xA9t\xC3\xA9");
    r.mesh_descriptors = {"D000075924"};
    r.registry_numbers = {"R16CO5Y76E"};
    r.other_terms = {"k1"};
    r.pub_year = 2001;
    r.journal = "J";
    r.authors = {"A B"};
    r.revision = 20200101;
    const EnrichedRecord e = enricher.enrich(r);
    const nlohmann::json j = e;
    CHECK(j.at("pmid") == 5);
    CHECK(j.contains("drug_matches"));
    CHECK(j.get<EnrichedRecord>() == e);

    EnrichedRecord bare;
    bare.record.pmid = 6;
    const nlohmann::json jb = bare;
    CHECK(jb.at("pub_year").is_null());
    CHECK(jb.get<EnrichedRecord>() == bare);
}
