#include "qibitz/gene_indexer.hpp"
#include "support/fixtures.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <algorithm>

using namespace qibitz;
using qibitz::testing::sample_genes;
using qibitz::testing::ScriptedOracle;
using qibitz::testing::text_record;

namespace {

const std::string kCadName = "carbamoyl-phosphate synthetase 2, aspartate transcarbamylase, and dihydroorotase";

GeneMatch text_match(const std::string& symbol, GeneTier tier, SourceField field) {
    return {symbol, GeneChannel::Text, tier, symbol, field};
}

}  // namespace

TEST_CASE("ATRX descriptor without text gives a MESH match") {
    ScriptedOracle oracle;
    PubMedRecord r;
    r.pmid = 1;
    r.mesh_descriptors = {"D000075924"};
    const auto ms = index_genes(r, sample_genes(), oracle);
    REQUIRE(ms.size() == 1);
    CHECK(ms[0] == GeneMatch{"ATRX", GeneChannel::Mesh, std::nullopt, "D000075924", SourceField::MH});
    CHECK(oracle.calls() == 0);
}

TEST_CASE("unambiguous symbols are emitted directly") {
    ScriptedOracle oracle;
    const auto ms = index_genes(text_record(1, "", "We sequenced DNMT3A in 40 patients."), sample_genes(), oracle);
    CHECK(ms == std::vector<GeneMatch>{text_match("DNMT3A", GeneTier::Direct, SourceField::AB)});
    const auto c11 = index_genes(text_record(2, "C11orf30 amplification"), sample_genes(), oracle);
    CHECK(c11 == std::vector<GeneMatch>{text_match("C11orf30", GeneTier::Direct, SourceField::TI)});
}

TEST_CASE("context gated symbols need genetics in the record") {
    ScriptedOracle oracle;
    CHECK(index_genes(text_record(1, "", "Articles were retrieved from the VHL."), sample_genes(), oracle).empty());
    const auto ms = index_genes(text_record(2, "", "the VHL gene is mutated"), sample_genes(), oracle);
    CHECK(ms == std::vector<GeneMatch>{text_match("VHL", GeneTier::Context, SourceField::AB)});
    CHECK(oracle.calls() == 0);
}

TEST_CASE("semantic gated symbols follow the oracle verdict") {
    const auto r = text_record(1, "", "CAD is a gene regulating pyrimidine synthesis");
    SUBCASE("true") {
        ScriptedOracle oracle({{"CAD", "true"}});
        CHECK(index_genes(r, sample_genes(), oracle) ==
              std::vector<GeneMatch>{text_match("CAD", GeneTier::Semantic, SourceField::AB)});
        REQUIRE(oracle.calls() == 1);
        const auto req = oracle.requests()[0];
        CHECK(req.symbol == "CAD");
        CHECK(req.gene_name == kCadName);
        CHECK(req.text == "CAD is a gene regulating pyrimidine synthesis");
    }
    SUBCASE("false") {
        ScriptedOracle oracle({{"CAD", "false"}});
        std::vector<DroppedCandidate> drops;
        CHECK(index_genes(r, sample_genes(), oracle, [&](const DroppedCandidate& d) { drops.push_back(d); }).empty());
        CHECK(oracle.calls() == 1);
        CHECK(drops.empty());
    }
    SUBCASE("indeterminate is dropped and logged with the raw reply") {
        ScriptedOracle oracle({{"CAD", "It is likely true"}});
        std::vector<DroppedCandidate> drops;
        CHECK(index_genes(r, sample_genes(), oracle, [&](const DroppedCandidate& d) { drops.push_back(d); }).empty());
        REQUIRE(drops.size() == 1);
        CHECK(drops[0] == DroppedCandidate{1, "CAD", "indeterminate", "It is likely true"});
    }
}

TEST_CASE("semantic candidate without context never reaches the oracle") {
    ScriptedOracle oracle({{"CAD", "true"}});
    CHECK(index_genes(text_record(1, "", "CAD levels rose after surgery"), sample_genes(), oracle).empty());
    CHECK(oracle.calls() == 0);
}

TEST_CASE("oracle failure drops the candidate but keeps the rest") {
    class Broken : public Disambiguator {
    public:
        Verdict verdict(const DisambiguationRequest&) override { throw OracleUnavailable("timeout"); }
    } broken;
    std::vector<DroppedCandidate> drops;
    const auto ms = index_genes(text_record(7, "", "CAD and DNMT3A gene mutation"), sample_genes(), broken,
                                [&](const DroppedCandidate& d) { drops.push_back(d); });
    CHECK(ms == std::vector<GeneMatch>{text_match("DNMT3A", GeneTier::Direct, SourceField::AB)});
    REQUIRE(drops.size() == 1);
    CHECK(drops[0].symbol == "CAD");
    CHECK(drops[0].reason.rfind("oracle-error", 0) == 0);
}

TEST_CASE("registry numbers are never used for genes") {
    ScriptedOracle oracle;
    PubMedRecord r;
    r.pmid = 1;
    r.registry_numbers = {"138415-26-6"};
    CHECK(index_genes(r, sample_genes(), oracle).empty());
    r.mesh_descriptors = {sample_genes().find("PRDM1")->mesh_descriptors.at(0)};
    const auto ms = index_genes(r, sample_genes(), oracle);
    REQUIRE(ms.size() == 1);
    CHECK(ms[0].symbol == "PRDM1");
    CHECK(ms[0].channel == GeneChannel::Mesh);
}

TEST_CASE("symbol matching is case sensitive and token bounded") {
    ScriptedOracle oracle;
    CHECK(index_genes(text_record(1, "", "We sequenced dnmt3a in 40 patients."), sample_genes(), oracle).empty());
    CHECK(index_genes(text_record(1, "", "DNMT3AB is not a gene symbol here"), sample_genes(), oracle).empty());
    CHECK(index_genes(text_record(1, "", "pre-DNMT3A-mutant cells"), sample_genes(), oracle).size() == 1);
}

TEST_CASE("property: lowercasing an occurrence removes its text match") {
    ScriptedOracle oracle({{"CAD", "true"}});
    GeneIndexer indexer(sample_genes(), oracle);
    for (const auto& e : sample_genes().entries()) {
        const std::string text = "The " + e.symbol + " gene harbors a mutation.";
        std::string lowered = e.symbol;
        std::transform(lowered.begin(), lowered.end(), lowered.begin(), [](unsigned char c) { return std::tolower(c); });
        if (lowered == e.symbol)
            continue;
        const auto lower_text = "The " + lowered + " gene harbors a mutation.";
        const auto upper = indexer.index(text_record(1, "", text));
        const auto lower = indexer.index(text_record(1, "", lower_text));
        const bool upper_has = std::any_of(upper.begin(), upper.end(), [&](const GeneMatch& m) { return m.symbol == e.symbol; });
        const bool lower_has = std::any_of(lower.begin(), lower.end(), [&](const GeneMatch& m) { return m.symbol == e.symbol; });
        if (e.ambiguity_class != AmbiguityClass::SemanticGated || e.symbol == "CAD")
            CHECK_MESSAGE(upper_has, e.symbol);
        CHECK_FALSE_MESSAGE(lower_has, e.symbol);
    }
}

TEST_CASE("property: gated emissions imply genetic context") {
    ScriptedOracle oracle({{"CAD", "true"}, {"MS", "true"}, {"CAT", "true"}, {"AR", "true"}});
    GeneIndexer indexer(sample_genes(), oracle);
    const std::vector<std::string> texts = {
        "VHL and CAD in the clinic", "VHL and CAD genomics", "AR signalling, MS and CAT activity",
        "MET exon 14 skipping with KIT", "KRAS, ALK and RET in trials", "whole-genome ATM study of MS"};
    for (const auto& t : texts) {
        const auto r = text_record(1, "", t);
        const bool ctx = has_genetic_context(r);
        for (const auto& m : indexer.index(r)) {
            if (m.tier == GeneTier::Context || m.tier == GeneTier::Semantic)
                CHECK_MESSAGE(ctx, t);
        }
    }
}

TEST_CASE("property: MESH matches do not depend on the oracle") {
    ScriptedOracle yes({{"CAD", "true"}}), no({{"CAD", "false"}});
    PubMedRecord r = text_record(1, "CAD gene", "VHL mutation");
    r.mesh_descriptors = {"D000075924", "D024442", "D999999"};
    auto mesh_only = [](std::vector<GeneMatch> ms) {
        ms.erase(std::remove_if(ms.begin(), ms.end(), [](const GeneMatch& m) { return m.channel != GeneChannel::Mesh; }),
                 ms.end());
        return ms;
    };
    CHECK(mesh_only(index_genes(r, sample_genes(), yes)) == mesh_only(index_genes(r, sample_genes(), no)));
    CHECK(mesh_only(index_genes(r, sample_genes(), yes)).size() == 2);
}

TEST_CASE("one oracle call per symbol per record, one match per field") {
    ScriptedOracle oracle({{"CAD", "true"}});
    PubMedRecord r = text_record(1, "CAD gene study", "CAD expression; CAD again");
    r.other_terms = {"CAD"};
    const auto ms = index_genes(r, sample_genes(), oracle);
    CHECK(oracle.calls() == 1);
    CHECK(ms == std::vector<GeneMatch>{text_match("CAD", GeneTier::Semantic, SourceField::TI),
                                       text_match("CAD", GeneTier::Semantic, SourceField::AB),
                                       text_match("CAD", GeneTier::Semantic, SourceField::OT)});
}

TEST_CASE("semantic candidate found only in other terms has no prompt text") {
    ScriptedOracle oracle({{"CAD", "true"}});
    PubMedRecord r;
    r.pmid = 9;
    r.other_terms = {"CAD", "genetics"};
    std::vector<DroppedCandidate> drops;
    CHECK(index_genes(r, sample_genes(), oracle, [&](const DroppedCandidate& d) { drops.push_back(d); }).empty());
    CHECK(oracle.calls() == 0);
    REQUIRE(drops.size() == 1);
    CHECK(drops[0].reason == "empty-text");
}

TEST_CASE("genetic context lexicon") {
    CHECK(has_genetic_context(text_record(1, "", "the VHL gene is mutated")));
    CHECK_FALSE(has_genetic_context(text_record(1, "", "retrieved from the Virtual Health Library portal")));
    CHECK(has_genetic_context(text_record(1, "", "whole-genome analysis")));
    CHECK(has_genetic_context(text_record(1, "GENETICS of uveal melanoma")));
    CHECK(has_genetic_context(text_record(1, "", "mRNA levels")));
    CHECK_FALSE(has_genetic_context(text_record(1, "", "general generation of genealogy")));
    PubMedRecord ot;
    ot.other_terms = {"Allele frequency"};
    CHECK(has_genetic_context(ot));

    const auto custom = ContextLexicon::from_words({"Hereditary"});
    CHECK(custom.matches_text("a hereditary syndrome"));
    CHECK_FALSE(custom.matches_text("a gene"));
}

TEST_CASE("prompt rendering") {
    const std::string prefix =
        "Answer the following question by true or false. Do not add anything else.  In the text between single "
        "quotes that follows this question, does the acronym ";
    CHECK(render_prompt({"CAD", kCadName, "CAD is overexpressed"}) ==
          prefix + "CAD refer to the gene " + kCadName + "? \"CAD is overexpressed\"");
    CHECK(render_prompt({"VHL", "von Hippel", "a \"quoted\" text"}) ==
          prefix + "VHL refer to the gene von Hippel? \"a \"quoted\" text\"");
    CHECK(render_prompt({"X", "${geneName}", "${symbol}"}) == prefix + "X refer to the gene ${geneName}? \"${symbol}\"");
}

TEST_CASE("request digest is stable and input sensitive") {
    const DisambiguationRequest a{"CAD", kCadName, "text"};
    CHECK(request_digest(a) == request_digest(a));
    CHECK(request_digest(a).size() == 64);
    CHECK(request_digest(a) != request_digest({"CAD", kCadName, "text2"}));
    CHECK(request_digest({"AB", "C", "t"}) != request_digest({"A", "BC", "t"}));
}

TEST_CASE("verdict parsing") {
    CHECK(parse_verdict("true").kind == Verdict::Kind::True);
    CHECK(parse_verdict(" False\n").kind == Verdict::Kind::False);
    CHECK(parse_verdict("TRUE.").kind == Verdict::Kind::True);
    CHECK(parse_verdict("false!").kind == Verdict::Kind::False);
    const auto v = parse_verdict("It is likely true");
    CHECK(v.kind == Verdict::Kind::Indeterminate);
    CHECK(v.raw == "It is likely true");
    CHECK(parse_verdict("").kind == Verdict::Kind::Indeterminate);
    CHECK(parse_verdict("true false").kind == Verdict::Kind::Indeterminate);
}

TEST_CASE("dropped candidate JSON round trip") {
    const DroppedCandidate a{12, "CAD", "indeterminate", "maybe"};
    const DroppedCandidate b{13, "MS", "empty-text", std::nullopt};
    CHECK(dropped_candidate_from_json(to_json_line(a)) == a);
    CHECK(dropped_candidate_from_json(to_json_line(b)) == b);
    const auto j = nlohmann::json::parse(to_json_line(b));
    CHECK_FALSE(j.contains("raw_reply"));
    CHECK(j.at("pmid") == 13);
}
