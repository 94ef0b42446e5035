// Writes a synthetic archive of gzip-compressed PubMed batches whose text
// mentions entries of the given vocabularies.

#include "qibitz/synthetic.hpp"
#include "qibitz/vocabulary.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;

int main(int argc, char** argv) {
    CLI::App app{"qibitz_synth: generate a synthetic PubMed archive"};
    std::string out_dir, drugs_path, genes_path;
    std::size_t batches = 2;
    std::size_t per_batch = 1000;
    std::uint64_t seed = 7;
    app.add_option("--out", out_dir, "Archive directory to create")->required();
    app.add_option("--drugs", drugs_path, "Drug vocabulary TSV")->required();
    app.add_option("--genes", genes_path, "Gene vocabulary TSV")->required();
    app.add_option("--batches", batches, "Number of batch files")->capture_default_str();
    app.add_option("--records", per_batch, "Records per batch")->capture_default_str();
    app.add_option("--seed", seed, "Random seed")->capture_default_str();
    CLI11_PARSE(app, argc, argv);

    try {
        const auto drugs = qibitz::load_drug_vocabulary_file(drugs_path);
        const auto genes = qibitz::load_gene_vocabulary_file(genes_path);
        fs::create_directories(out_dir);
        for (std::size_t b = 0; b < batches; ++b) {
            qibitz::synth::TextCorpusOptions o;
            o.records = per_batch;
            o.first_pmid = 1 + b * per_batch;
            o.seed = seed + b;
            const auto records = qibitz::synth::random_text_corpus(drugs, genes, o);
            char name[64];
            std::snprintf(name, sizeof name, "pubmed25n%04zu.xml.gz", b + 1);
            std::ofstream(fs::path(out_dir) / name, std::ios::binary) << qibitz::synth::batch_gz(records);
            std::cout << name << '\n';
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
