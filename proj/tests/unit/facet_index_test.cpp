#include "qibitz/facet_index.hpp"
#include "qibitz/synthetic.hpp"
#include "support/facet_oracle.hpp"
#include "support/fixtures.hpp"

#include <doctest.h>

#include <atomic>
#include <random>
#include <thread>

using namespace qibitz;
using qibitz::testing::brute_force_search;
using qibitz::testing::read_file;
using qibitz::testing::TempDir;
using qibitz::testing::write_file;

namespace {

EnrichedRecord rec(Pmid pmid, std::vector<std::string> drugs, std::vector<std::string> genes,
                   std::optional<int> year = 2020, std::vector<std::string> mesh = {}, std::string title = "t") {
    EnrichedRecord e;
    e.record.pmid = pmid;
    e.record.title = std::move(title);
    e.record.pub_year = year;
    e.record.mesh_descriptors = std::move(mesh);
    e.drugs = std::move(drugs);
    e.genes = std::move(genes);
    for (const auto& d : e.drugs)
        e.drug_matches.push_back({d, DrugChannel::Text, d, SourceField::TI});
    for (const auto& g : e.genes)
        e.gene_matches.push_back({g, GeneChannel::Text, GeneTier::Direct, g, SourceField::TI});
    return e;
}

std::vector<EnrichedRecord> five_records() {
    return {rec(1, {"metformin", "binimetinib"}, {"GNAQ"}, 2019, {"D008545"}, "Uveal melanoma and metformin"),
            rec(2, {"metformin", "hydroxychloroquine"}, {"GNAQ", "BAP1"}, 2021, {}, "GNAQ signalling"),
            rec(3, {"trametinib"}, {"GNAQ"}, 2021, {"D008545"}, "MEK inhibition"),
            rec(4, {"aspirin"}, {"BAP1"}, std::nullopt, {}, "Aspirin review"),
            rec(5, {}, {"SF3B1"}, 2010, {"D009369"}, "Splicing in tumors")};
}

void load(FacetIndex& index, const std::vector<EnrichedRecord>& rs) {
    for (const auto& r : rs)
        index.upsert(r);
}

std::size_t facet_count(const FacetResult& r, const std::string& facet, const std::string& value) {
    for (const auto& v : r.facets.at(facet))
        if (v.value == value)
            return v.count;
    return 0;
}

}  // namespace

TEST_CASE("gene filter narrows and counts drugs over the filtered set") {
    FacetIndex index;
    const auto corpus = five_records();
    load(index, corpus);
    FacetQuery q;
    q.genes = {"GNAQ"};
    const auto r = index.search(q);
    CHECK(r.total == 3);
    CHECK(r.facets.at("drugs").size() == 4);
    CHECK(facet_count(r, "drugs", "metformin") == 2);
    CHECK(facet_count(r, "drugs", "binimetinib") == 1);
    CHECK(r == brute_force_search(corpus, q));
    // Sorted by count desc then value asc.
    CHECK(r.facets.at("drugs").front().value == "metformin");
    CHECK(r.facets.at("drugs")[1].value == "binimetinib");
}

TEST_CASE("empty query covers the corpus") {
    FacetIndex index;
    const auto corpus = five_records();
    load(index, corpus);
    const auto r = index.search({});
    CHECK(r.total == 5);
    CHECK(facet_count(r, "genes", "GNAQ") == 3);
    CHECK(facet_count(r, "genes", "BAP1") == 2);
    CHECK(facet_count(r, "years", "2021") == 2);
    CHECK(r == brute_force_search(corpus, {}));
}

TEST_CASE("filters across facets are conjunctive") {
    FacetIndex index;
    const auto corpus = five_records();
    load(index, corpus);
    FacetQuery q;
    q.genes = {"GNAQ"};
    q.drugs = {"metformin"};
    const auto r = index.search(q);
    CHECK(r.total == 2);
    CHECK(facet_count(r, "genes", "GNAQ") == 2);
    CHECK(facet_count(r, "genes", "BAP1") == 1);
    CHECK(r == brute_force_search(corpus, q));
}

TEST_CASE("hits are ordered by year then pmid, missing years last, and paged") {
    FacetIndex index;
    load(index, five_records());
    FacetQuery q;
    q.page_size = 2;
    auto r = index.search(q);
    REQUIRE(r.hits.size() == 2);
    CHECK(r.hits[0].pmid == 3);
    CHECK(r.hits[1].pmid == 2);
    q.page = 2;
    r = index.search(q);
    REQUIRE(r.hits.size() == 1);
    CHECK(r.hits[0].pmid == 4);
    q.page = 3;
    CHECK(index.search(q).hits.empty());
}

TEST_CASE("text and year filters") {
    FacetIndex index;
    const auto corpus = five_records();
    load(index, corpus);
    FacetQuery q;
    q.text = "METFORMIN uveal";
    CHECK(index.search(q).total == 1);
    q.text = "gnaq";
    CHECK(index.search(q).total == 1);
    q.text.clear();
    q.year_min = 2015;
    q.year_max = 2021;
    CHECK(index.search(q).total == 3);
    CHECK(index.search(q) == brute_force_search(corpus, q));
}

TEST_CASE("invalid queries are rejected") {
    FacetIndex index;
    FacetQuery q;
    q.page_size = 0;
    CHECK_THROWS_AS(index.search(q), QueryError);
    q.page_size = 501;
    CHECK_THROWS_AS(index.search(q), QueryError);
    q.page_size = 500;
    CHECK_NOTHROW(index.search(q));
    q.year_min = 2020;
    q.year_max = 2019;
    CHECK_THROWS_AS(index.search(q), QueryError);
}

TEST_CASE("upsert examples") {
    SUBCASE("insert") {
        FacetIndex index;
        index.upsert(rec(1, {"metformin"}, {}));
        FacetQuery q;
        q.drugs = {"metformin"};
        CHECK(index.search(q).total == 1);
    }
    SUBCASE("replacement drops every old posting") {
        FacetIndex index;
        index.upsert(rec(1, {"metformin"}, {"GNAQ"}, 2019, {"D1"}, "old words"));
        index.upsert(rec(1, {"aspirin"}, {}, 2020, {}, "new"));
        FacetQuery q;
        q.drugs = {"metformin"};
        CHECK(index.search(q).total == 0);
        q = {};
        q.genes = {"GNAQ"};
        CHECK(index.search(q).total == 0);
        q = {};
        q.text = "old";
        CHECK(index.search(q).total == 0);
        q = {};
        q.drugs = {"aspirin"};
        CHECK(index.search(q).total == 1);
        CHECK(index.get(1)->drugs == std::vector<std::string>{"aspirin"});
    }
    SUBCASE("upserting twice leaves identical state") {
        FacetIndex a, b;
        a.upsert(rec(1, {"metformin"}, {}));
        b.upsert(rec(1, {"metformin"}, {}));
        b.upsert(rec(1, {"metformin"}, {}));
        CHECK(a.digest() == b.digest());
        TempDir dir;
        a.snapshot(dir / "a");
        b.snapshot(dir / "b");
        CHECK(read_file(dir / "a" / "manifest.json") == read_file(dir / "b" / "manifest.json"));
    }
}

TEST_CASE("delete examples") {
    FacetIndex index;
    CHECK_FALSE(index.remove(42));
    index.upsert(rec(7, {"metformin"}, {}));
    CHECK(index.remove(7));
    CHECK_FALSE(index.get(7).has_value());
    FacetQuery q;
    q.drugs = {"metformin"};
    CHECK(index.search(q).total == 0);
    CHECK_FALSE(index.remove(7));
}

TEST_CASE("get returns the stored version") {
    FacetIndex index;
    CHECK_FALSE(index.get(1).has_value());
    const auto a = rec(1, {"metformin"}, {});
    index.upsert(a);
    CHECK(index.get(1) == a);
    const auto b = rec(1, {"aspirin"}, {});
    index.upsert(b);
    CHECK(index.get(1) == b);
}

TEST_CASE("property: last write wins over any interleaving") {
    std::mt19937_64 rng(3);
    for (int round = 0; round < 50; ++round) {
        FacetIndex index;
        std::map<Pmid, std::optional<EnrichedRecord>> expected;
        for (int step = 0; step < 40; ++step) {
            const Pmid p = 1 + rng() % 5;
            if (rng() % 4 == 0) {
                index.remove(p);
                expected[p] = std::nullopt;
            } else {
                auto r = rec(p, {"drug-" + std::to_string(rng() % 4)}, {"G" + std::to_string(rng() % 3)},
                             1990 + static_cast<int>(rng() % 5));
                index.upsert(r);
                expected[p] = r;
            }
        }
        std::vector<EnrichedRecord> live;
        for (const auto& [p, r] : expected) {
            CHECK(index.get(p) == r);
            if (r)
                live.push_back(*r);
        }
        CHECK(index.search({}) == brute_force_search(live, {}));
    }
}

TEST_CASE("property: oracle equivalence, monotonicity and facet-count consistency") {
    synth::FacetCorpusOptions o;
    o.records = 400;
    o.seed = 11;
    const auto corpus = synth::random_facet_corpus(o);
    FacetIndex index;
    load(index, corpus);
    std::mt19937_64 rng(5);
    for (int i = 0; i < 150; ++i) {
        FacetQuery q = synth::random_query(rng, o);
        const auto got = index.search(q);
        REQUIRE(got == brute_force_search(corpus, q));

        for (const auto& [name, values] : got.facets)
            for (const auto& v : values)
                CHECK(v.count <= got.total);

        // OR within a facet never shrinks the result.
        FacetQuery wider = q;
        if (!wider.drugs.empty()) {
            wider.drugs.push_back(synth::drug_pool(o.drug_values)[rng() % o.drug_values]);
            CHECK(index.search(wider).total >= got.total);
        }
        // A new facet filter never grows it, and its count is exact.
        if (q.genes.empty()) {
            FacetQuery q_all = q;
            q_all.facet_limit = 1000;
            const auto all = index.search(q_all);
            for (const auto& v : all.facets.at("genes")) {
                FacetQuery narrower = q;
                narrower.genes = {v.value};
                const auto n = index.search(narrower);
                CHECK(n.total == v.count);
                CHECK(n.total <= got.total);
            }
        }
    }
}

TEST_CASE("large result sets use the parallel counter with identical output") {
    synth::FacetCorpusOptions o;
    o.records = 25000;
    o.seed = 2;
    const auto corpus = synth::random_facet_corpus(o);
    FacetIndex index;
    index.set_count_threads(4);
    load(index, corpus);
    FacetQuery q;
    q.facet_limit = 1000;
    CHECK(index.search(q) == brute_force_search(corpus, q));
}

TEST_CASE("snapshot and restore") {
    synth::FacetCorpusOptions o;
    o.records = 300;
    const auto corpus = synth::random_facet_corpus(o);
    FacetIndex index;
    load(index, corpus);
    index.set_watermark("pubmed25n0003.xml.gz");
    TempDir dir;
    index.snapshot(dir / "idx");

    SUBCASE("restore reproduces every query result") {
        FacetIndex restored;
        restored.restore(dir / "idx");
        CHECK(restored.size() == index.size());
        CHECK(restored.watermark() == "pubmed25n0003.xml.gz");
        CHECK(restored.digest() == index.digest());
        std::mt19937_64 rng(9);
        for (int i = 0; i < 100; ++i) {
            const auto q = synth::random_query(rng, o);
            CHECK(restored.search(q) == index.search(q));
        }
        for (Pmid p : index.pmids())
            CHECK(restored.get(p) == index.get(p));
    }
    SUBCASE("snapshotting twice writes identical manifests") {
        index.snapshot(dir / "idx2");
        CHECK(read_file(dir / "idx" / "manifest.json") == read_file(dir / "idx2" / "manifest.json"));
        index.snapshot(dir / "idx");
        CHECK(read_file(dir / "idx" / "manifest.json") == read_file(dir / "idx2" / "manifest.json"));
    }
    SUBCASE("restore from an empty or missing directory fails") {
        std::filesystem::create_directories(dir / "empty");
        FacetIndex other;
        CHECK_THROWS_AS(other.restore(dir / "empty"), SnapshotError);
        CHECK_THROWS_AS(other.restore(dir / "missing"), SnapshotError);
    }
    SUBCASE("a tampered segment is refused and the index keeps its contents") {
        const auto seg = dir / "idx" / "segments" / "00000.jsonl";
        std::string bytes = read_file(seg);
        bytes[bytes.size() / 2] = bytes[bytes.size() / 2] == 'a' ? 'b' : 'a';
        write_file(seg, bytes);
        FacetIndex other;
        other.upsert(rec(1, {"x"}, {}));
        CHECK_THROWS_AS(other.restore(dir / "idx"), SnapshotError);
        CHECK(other.size() == 1);
    }
    SUBCASE("a truncated snapshot is refused") {
        std::filesystem::remove(dir / "idx" / "segments" / "00000.jsonl");
        FacetIndex other;
        CHECK_THROWS_AS(other.restore(dir / "idx"), SnapshotError);
    }
}

TEST_CASE("snapshot refuses to replace an unrelated directory") {
    TempDir dir;
    write_file(dir / "precious" / "notes.txt", "keep me");
    FacetIndex index;
    CHECK_THROWS_AS(index.snapshot(dir / "precious"), SnapshotError);
    CHECK(read_file(dir / "precious" / "notes.txt") == "keep me");
}

TEST_CASE("readers never observe a half-applied upsert") {
    FacetIndex index;
    for (Pmid p = 1; p <= 200; ++p)
        index.upsert(rec(p, {"a"}, {"G"}));
    std::atomic<bool> stop{false};
    std::atomic<int> bad{0};
    std::thread writer([&] {
        for (int i = 0; i < 2000; ++i) {
            const Pmid p = 1 + i % 200;
            index.upsert(rec(p, {i % 2 ? "b" : "a"}, {"G"}));
        }
        stop = true;
    });
    std::vector<std::thread> readers;
    for (int t = 0; t < 3; ++t) {
        readers.emplace_back([&] {
            FacetQuery q;
            q.facet_limit = 10;
            while (!stop) {
                const auto r = index.search(q);
                std::size_t drugs = 0;
                for (const auto& v : r.facets.at("drugs"))
                    drugs += v.count;
                if (r.total != 200 || drugs != 200 || facet_count(r, "genes", "G") != 200)
                    ++bad;
            }
        });
    }
    writer.join();
    for (auto& r : readers)
        r.join();
    CHECK(bad == 0);
}
