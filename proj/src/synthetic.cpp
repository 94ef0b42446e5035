#include "qibitz/synthetic.hpp"

#include "qibitz/pubmed_ingest.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>

namespace qibitz::synth {

std::string xml_escape(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

namespace {

void split_author(const std::string& author, std::string& last, std::string& initials) {
    const auto space = author.rfind(' ');
    if (space == std::string::npos) {
        last = author;
        initials.clear();
    } else {
        last = author.substr(0, space);
        initials = author.substr(space + 1);
    }
}

}  // namespace

std::string citation_xml(const PubMedRecord& r) {
    std::ostringstream x;
    x << "<PubmedArticle>\n<MedlineCitation Status=\"MEDLINE\" Owner=\"NLM\">\n";
    x << "<PMID Version=\"1\">" << r.pmid << "</PMID>\n";
    if (r.revision > 0) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "<DateRevised><Year>%04d</Year><Month>%02d</Month><Day>%02d</Day></DateRevised>\n",
                      static_cast<int>(r.revision / 10000), static_cast<int>(r.revision / 100 % 100),
                      static_cast<int>(r.revision % 100));
        x << buf;
    }
    x << "<Article PubModel=\"Print\">\n<Journal>\n<JournalIssue CitedMedium=\"Print\">";
    if (r.pub_year)
        x << "<PubDate><Year>" << *r.pub_year << "</Year></PubDate>";
    x << "</JournalIssue>\n";
    if (r.journal)
        x << "<Title>" << xml_escape(*r.journal) << "</Title>\n";
    x << "</Journal>\n";
    x << "<ArticleTitle>" << xml_escape(r.title) << "</ArticleTitle>\n";
    if (!r.abstract.empty())
        x << "<Abstract><AbstractText>" << xml_escape(r.abstract) << "</AbstractText></Abstract>\n";
    if (!r.authors.empty()) {
        x << "<AuthorList CompleteYN=\"Y\">\n";
        for (const auto& a : r.authors) {
            std::string last, initials;
            split_author(a, last, initials);
            x << "<Author ValidYN=\"Y\"><LastName>" << xml_escape(last) << "</LastName>";
            if (!initials.empty())
                x << "<Initials>" << xml_escape(initials) << "</Initials>";
            x << "</Author>\n";
        }
        x << "</AuthorList>\n";
    }
    x << "</Article>\n";

    const std::size_t chemicals = std::max(r.substance_names.size(), r.registry_numbers.size());
    if (chemicals > 0) {
        x << "<ChemicalList>\n";
        for (std::size_t i = 0; i < chemicals; ++i) {
            x << "<Chemical><RegistryNumber>"
              << (i < r.registry_numbers.size() ? xml_escape(r.registry_numbers[i]) : std::string("0"))
              << "</RegistryNumber>";
            if (i < r.substance_names.size())
                x << "<NameOfSubstance UI=\"" << xml_escape(r.substance_names[i]) << "\">substance</NameOfSubstance>";
            x << "</Chemical>\n";
        }
        x << "</ChemicalList>\n";
    }
    if (!r.legacy_gene_symbols.empty()) {
        x << "<GeneSymbolList>";
        for (const auto& g : r.legacy_gene_symbols)
            x << "<GeneSymbol>" << xml_escape(g) << "</GeneSymbol>";
        x << "</GeneSymbolList>\n";
    }
    if (!r.mesh_descriptors.empty()) {
        x << "<MeshHeadingList>\n";
        for (const auto& m : r.mesh_descriptors)
            x << "<MeshHeading><DescriptorName UI=\"" << xml_escape(m) << "\" MajorTopicYN=\"N\">heading</DescriptorName></MeshHeading>\n";
        x << "</MeshHeadingList>\n";
    }
    if (!r.other_terms.empty()) {
        x << "<KeywordList Owner=\"NOTNLM\">";
        for (const auto& k : r.other_terms)
            x << "<Keyword MajorTopicYN=\"N\">" << xml_escape(k) << "</Keyword>";
        x << "</KeywordList>\n";
    }
    x << "</MedlineCitation>\n<PubmedData><PublicationStatus>ppublish</PublicationStatus></PubmedData>\n";
    x << "</PubmedArticle>\n";
    return x.str();
}

std::string batch_xml(std::span<const PubMedRecord> upserts, std::span<const Pmid> deletes) {
    std::string out = "<?xml version=\"1.0\" encoding=\"utf-8\"?>\n<PubmedArticleSet>\n";
    for (const auto& r : upserts)
        out += citation_xml(r);
    if (!deletes.empty()) {
        out += "<DeleteCitation>\n";
        for (Pmid p : deletes)
            out += "<PMID Version=\"1\">" + std::to_string(p) + "</PMID>\n";
        out += "</DeleteCitation>\n";
    }
    out += "</PubmedArticleSet>\n";
    return out;
}

std::string batch_gz(std::span<const PubMedRecord> upserts, std::span<const Pmid> deletes) {
    return gzip_compress(batch_xml(upserts, deletes));
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> numbered(const char* pattern, std::size_t n) {
    std::vector<std::string> out;
    out.reserve(n);
    char buf[32];
    for (std::size_t i = 0; i < n; ++i) {
        std::snprintf(buf, sizeof buf, pattern, static_cast<unsigned>(i));
        out.emplace_back(buf);
    }
    return out;
}

bool chance(std::mt19937_64& rng, double p) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p; }

std::size_t pick(std::mt19937_64& rng, std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); }

/// Up to `max` distinct values from `pool`, skewed toward the front so some
/// values are common and many are rare.
std::vector<std::string> sample(std::mt19937_64& rng, const std::vector<std::string>& pool, std::size_t max) {
    const std::size_t k = std::uniform_int_distribution<std::size_t>(0, max)(rng);
    std::set<std::string> chosen;
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t a = pick(rng, pool.size());
        const std::size_t b = pick(rng, pool.size());
        chosen.insert(pool[std::min(a, b)]);
    }
    return {chosen.begin(), chosen.end()};
}

std::string sentence(std::mt19937_64& rng, std::size_t words) {
    const auto& pool = word_pool();
    std::string out;
    for (std::size_t i = 0; i < words; ++i) {
        if (i)
            out += ' ';
        out += pool[pick(rng, pool.size())];
    }
    return out;
}

}  // namespace

std::vector<std::string> drug_pool(std::size_t n) { return numbered("drug-%03u", n); }
std::vector<std::string> gene_pool(std::size_t n) { return numbered("GENE%u", n); }
std::vector<std::string> mesh_pool(std::size_t n) { return numbered("D%06u", n); }

const std::vector<std::string>& word_pool() {
    static const std::vector<std::string> words = {
        "tumor",   "therapy",  "melanoma", "cell",    "patients", "cohort",  "response", "survival",
        "trial",   "dose",     "uveal",    "kinase",  "pathway",  "protein", "receptor", "inhibitor",
        "clinical", "outcome", "risk",     "model",   "mouse",    "analysis", "review",  "expression"};
    return words;
}

std::vector<EnrichedRecord> random_facet_corpus(const FacetCorpusOptions& o) {
    std::mt19937_64 rng(o.seed);
    const auto drugs = drug_pool(o.drug_values);
    const auto genes = gene_pool(o.gene_values);
    const auto mesh = mesh_pool(o.mesh_values);

    std::vector<EnrichedRecord> out;
    out.reserve(o.records);
    for (std::size_t i = 0; i < o.records; ++i) {
        EnrichedRecord e;
        e.record.pmid = o.first_pmid + i;
        e.record.title = sentence(rng, 3 + pick(rng, 5));
        e.record.abstract = sentence(rng, pick(rng, 12));
        if (!chance(rng, o.missing_year_rate))
            e.record.pub_year = std::uniform_int_distribution<int>(o.year_min, o.year_max)(rng);
        e.record.mesh_descriptors = sample(rng, mesh, o.max_values_per_facet);
        e.drugs = sample(rng, drugs, o.max_values_per_facet);
        e.genes = sample(rng, genes, o.max_values_per_facet);
        for (const auto& d : e.drugs)
            e.drug_matches.push_back({d, DrugChannel::Text, d, SourceField::AB});
        for (const auto& g : e.genes)
            e.gene_matches.push_back({g, GeneChannel::Text, GeneTier::Direct, g, SourceField::AB});
        out.push_back(std::move(e));
    }
    return out;
}

FacetQuery random_query(std::mt19937_64& rng, const FacetCorpusOptions& o) {
    const auto drugs = drug_pool(o.drug_values);
    const auto genes = gene_pool(o.gene_values);
    const auto mesh = mesh_pool(o.mesh_values);

    FacetQuery q;
    if (chance(rng, 0.4))
        q.drugs = sample(rng, drugs, 3);
    if (chance(rng, 0.4))
        q.genes = sample(rng, genes, 3);
    if (chance(rng, 0.3))
        q.mesh = sample(rng, mesh, 2);
    if (chance(rng, 0.25))
        q.year_min = std::uniform_int_distribution<int>(o.year_min - 2, o.year_max)(rng);
    if (chance(rng, 0.25))
        q.year_max = std::uniform_int_distribution<int>(q.year_min.value_or(o.year_min - 2), o.year_max + 2)(rng);
    if (chance(rng, 0.2))
        q.text = sentence(rng, 1 + pick(rng, 2));
    if (chance(rng, 0.1))
        q.drugs.push_back("drug-unknown");
    q.page_size = 1 + pick(rng, 50);
    q.page = chance(rng, 0.7) ? 0 : pick(rng, 5);
    q.facet_limit = chance(rng, 0.5) ? 1000 : 1 + pick(rng, 10);
    return q;
}

std::vector<PubMedRecord> random_text_corpus(const DrugVocabulary& drugs, const GeneVocabulary& genes,
                                             const TextCorpusOptions& o) {
    std::mt19937_64 rng(o.seed);
    std::vector<std::string> synonyms;
    for (const auto& d : drugs.entries())
        for (const auto& s : d.synonyms)
            synonyms.push_back(s);
    std::vector<std::string> descriptors;
    for (const auto& [ui, symbol] : genes.mesh_map())
        descriptors.push_back(ui);
    for (const auto& [ui, token] : drugs.mesh_map())
        descriptors.push_back(ui);

    std::vector<PubMedRecord> out;
    out.reserve(o.records);
    for (std::size_t i = 0; i < o.records; ++i) {
        PubMedRecord r;
        r.pmid = o.first_pmid + i;
        r.title = sentence(rng, 4 + pick(rng, 6));
        std::string abstract = sentence(rng, 20 + pick(rng, 40));
        if (!synonyms.empty() && chance(rng, o.drug_mention_rate))
            abstract += " treated with " + synonyms[pick(rng, synonyms.size())] + ".";
        if (genes.size() > 0 && chance(rng, o.gene_mention_rate))
            abstract += " Variants of " + genes.entries()[pick(rng, genes.size())].symbol + " were observed.";
        if (chance(rng, o.genetics_rate))
            abstract += " Genetic analysis of the cohort followed.";
        abstract += " " + sentence(rng, 10 + pick(rng, 20)) + ".";
        r.abstract = std::move(abstract);
        if (!descriptors.empty() && chance(rng, o.mesh_rate))
            r.mesh_descriptors.push_back(descriptors[pick(rng, descriptors.size())]);
        r.pub_year = std::uniform_int_distribution<int>(1995, 2024)(rng);
        r.journal = "Journal of Synthetic Studies";
        r.authors = {"Doe J", "Roe R"};
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace qibitz::synth
