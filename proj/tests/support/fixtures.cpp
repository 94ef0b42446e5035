#include "support/fixtures.hpp"

#include "qibitz/pubmed_ingest.hpp"
#include "qibitz/synthetic.hpp"

#include <fstream>
#include <random>
#include <sstream>

namespace fs = std::filesystem;

namespace qibitz::testing {

TempDir::TempDir() {
    std::random_device rd;
    for (;;) {
        path_ = fs::temp_directory_path() / ("qibitz-test-" + std::to_string(rd()));
        if (fs::create_directory(path_))
            break;
    }
}

TempDir::~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
}

std::string data_path(const std::string& relative) { return std::string(QIBITZ_DATA_DIR) + "/" + relative; }

std::string fixture_path(const std::string& relative) { return std::string(QIBITZ_FIXTURE_DIR) + "/" + relative; }

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, const std::string& bytes) {
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    std::ofstream(path, std::ios::binary) << bytes;
}

const DrugVocabulary& sample_drugs() {
    static const DrugVocabulary v = load_drug_vocabulary_file(data_path("vocab/drugs.tsv"));
    return v;
}

const GeneVocabulary& sample_genes() {
    static const GeneVocabulary v = load_gene_vocabulary_file(data_path("vocab/genes.tsv"));
    return v;
}

Verdict ScriptedOracle::verdict(const DisambiguationRequest& req) {
    ++calls_;
    {
        std::lock_guard lock(mu_);
        requests_.push_back(req);
    }
    auto it = replies_.find(req.symbol);
    return parse_verdict(it == replies_.end() ? std::string("no idea") : it->second);
}

std::vector<DisambiguationRequest> ScriptedOracle::requests() const {
    std::lock_guard lock(mu_);
    return requests_;
}

PubMedRecord text_record(Pmid pmid, std::string title, std::string abstract) {
    PubMedRecord r;
    r.pmid = pmid;
    r.title = std::move(title);
    r.abstract = std::move(abstract);
    return r;
}

PipelineSandbox::PipelineSandbox() { fs::create_directories(dir_ / "archive"); }

void PipelineSandbox::write_batch(const std::string& name, const std::vector<PubMedRecord>& upserts,
                                  const std::vector<Pmid>& deletes) {
    write_file(archive() / name, synth::batch_gz(upserts, deletes));
}

void PipelineSandbox::write_raw_batch(const std::string& name, const std::string& xml) {
    write_file(archive() / name, gzip_compress(xml));
}

PipelineConfig PipelineSandbox::config(int workers, std::size_t queue_capacity) const {
    PipelineConfig c;
    c.archive.location = archive().string();
    c.drug_vocabulary = data_path("vocab/drugs.tsv");
    c.gene_vocabulary = data_path("vocab/genes.tsv");
    c.index = (dir_ / "index").string();
    c.checkpoint = (dir_ / "checkpoint.json").string();
    c.drops_log = (dir_ / "drops.jsonl").string();
    c.parse_errors_log = (dir_ / "parse_errors.jsonl").string();
    c.workers = workers;
    c.queue_capacity = queue_capacity;
    c.fetch_attempts = 1;
    c.retry_backoff_ms = 1;
    return c;
}

}  // namespace qibitz::testing
