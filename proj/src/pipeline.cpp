#include "qibitz/pipeline.hpp"

#include "qibitz/archive.hpp"
#include "qibitz/drug_indexer.hpp"
#include "qibitz/enrichment.hpp"
#include "qibitz/gene_indexer.hpp"
#include "qibitz/pubmed_ingest.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;

namespace qibitz {

// ---------------------------------------------------------------------------
// Checkpoint

std::optional<std::string> Checkpoint::watermark() const {
    if (batches.empty())
        return std::nullopt;
    return batches.back().name;
}

void Checkpoint::validate() const {
    for (std::size_t i = 1; i < batches.size(); ++i) {
        if (!(batches[i - 1].name < batches[i].name))
            throw PipelineError("checkpoint", "checkpoint batch names are not strictly increasing at " + batches[i].name);
    }
}

nlohmann::json Checkpoint::to_json() const {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& b : batches)
        list.push_back({{"name", b.name}, {"upserts", b.upserts}, {"deletes", b.deletes}, {"parse_errors", b.parse_errors}});
    return {{"batches", list}, {"oracle_calls", oracle_calls}};
}

Checkpoint Checkpoint::from_json(const nlohmann::json& j) {
    Checkpoint c;
    for (const auto& b : j.at("batches")) {
        c.batches.push_back({b.at("name").get<std::string>(), b.at("upserts").get<std::size_t>(),
                             b.at("deletes").get<std::size_t>(), b.at("parse_errors").get<std::size_t>()});
    }
    c.oracle_calls = j.value("oracle_calls", std::uint64_t{0});
    c.validate();
    return c;
}

std::optional<Checkpoint> Checkpoint::load(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        return std::nullopt;
    try {
        return from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
        throw PipelineError("checkpoint", "corrupt checkpoint " + path + ": " + e.what());
    }
}

void Checkpoint::save(const std::string& path) const {
    validate();
    const fs::path target(path);
    if (target.has_parent_path())
        fs::create_directories(target.parent_path());
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        out << to_json().dump(2) << '\n';
        out.flush();
        if (!out)
            throw IoError("cannot write checkpoint " + tmp);
    }
    fs::rename(tmp, target);
}

nlohmann::json RunReport::to_json() const {
    return {{"batches", batches},
            {"upserts", upserts},
            {"deletes", deletes},
            {"parse_errors", parse_errors},
            {"citations", citations},
            {"oracle_calls", oracle_calls},
            {"processed", processed}};
}

nlohmann::json Pipeline::ReplayReport::to_json() const {
    return {{"candidates", candidates}, {"records", records}, {"still_dropped", still_dropped}};
}

// ---------------------------------------------------------------------------

namespace {

/// Exclusive advisory lock so only one run touches an index at a time.
class RunLock {
public:
    explicit RunLock(const std::string& index_path) : path_(index_path + ".lock") {
        const fs::path p(path_);
        if (p.has_parent_path())
            fs::create_directories(p.parent_path());
        fd_ = ::open(path_.c_str(), O_CREAT | O_RDWR, 0644);
        if (fd_ < 0)
            throw IoError("cannot open lock file " + path_);
        if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
            ::close(fd_);
            throw PipelineError("locked", "another pipeline run holds " + path_);
        }
    }
    ~RunLock() {
        ::flock(fd_, LOCK_UN);
        ::close(fd_);
    }
    RunLock(const RunLock&) = delete;
    RunLock& operator=(const RunLock&) = delete;

private:
    std::string path_;
    int fd_ = -1;
};

/// Appends JSON lines to an optional file.
class LineLog {
public:
    explicit LineLog(const std::string& path) {
        if (path.empty())
            return;
        const fs::path p(path);
        if (p.has_parent_path())
            fs::create_directories(p.parent_path());
        out_.open(path, std::ios::app);
        if (!out_)
            throw IoError("cannot open log " + path);
    }
    void write(const std::string& line) {
        if (out_.is_open())
            out_ << line << '\n';
    }
    void flush() {
        if (out_.is_open())
            out_.flush();
    }

private:
    std::ofstream out_;
};

struct Components {
    DrugVocabulary drugs;
    GeneVocabulary genes;
    std::unique_ptr<Disambiguator> owned_oracle;
    Disambiguator* oracle = nullptr;
    std::unique_ptr<DrugIndexer> drug_indexer;
    std::unique_ptr<GeneIndexer> gene_indexer;
    std::unique_ptr<Enricher> enricher;
};

std::unique_ptr<Components> build_components(const PipelineConfig& config, Disambiguator* override_oracle) {
    auto c = std::make_unique<Components>();
    c->drugs = load_drug_vocabulary_file(config.drug_vocabulary);
    c->genes = load_gene_vocabulary_file(config.gene_vocabulary);
    if (override_oracle) {
        c->oracle = override_oracle;
    } else {
        c->owned_oracle = make_disambiguator(config.oracle);
        c->oracle = c->owned_oracle.get();
    }
    ContextLexicon lexicon =
        config.context_lexicon.empty() ? ContextLexicon::defaults() : ContextLexicon::from_file(config.context_lexicon);
    c->drug_indexer = std::make_unique<DrugIndexer>(c->drugs);
    c->gene_indexer = std::make_unique<GeneIndexer>(c->genes, *c->oracle, std::move(lexicon));
    c->enricher = std::make_unique<Enricher>(*c->drug_indexer, *c->gene_indexer);
    return c;
}

std::string fetch_with_retry(const PipelineConfig& config, const std::string& name) {
    int delay = config.retry_backoff_ms;
    for (int attempt = 1;; ++attempt) {
        try {
            return fetch_batch(config.archive, name);
        } catch (const Error& e) {
            if (!e.retryable() || attempt >= config.fetch_attempts)
                throw;
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(delay));
        delay *= 2;
    }
}

std::vector<std::string> list_with_retry(const PipelineConfig& config, const std::optional<std::string>& since) {
    int delay = config.retry_backoff_ms;
    for (int attempt = 1;; ++attempt) {
        try {
            return list_remote_batches(config.archive, since);
        } catch (const Error& e) {
            if (!e.retryable() || attempt >= config.fetch_attempts)
                throw;
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(delay));
        delay *= 2;
    }
}

}  // namespace

void open_index(FacetIndex& index, const std::string& dir) {
    std::error_code ec;
    const fs::path p(dir);
    const fs::path old = p.parent_path() / (p.filename().string() + ".old");
    if (fs::exists(p / "manifest.json", ec) || fs::exists(old / "manifest.json", ec))
        index.restore(p);
}

Pipeline::Pipeline(PipelineConfig config, PipelineHooks hooks, Disambiguator* oracle)
    : config_(std::move(config)), hooks_(std::move(hooks)), oracle_override_(oracle) {
    config_.validate();
}

Pipeline::~Pipeline() = default;

RunReport Pipeline::run_full() { return run(false); }

RunReport Pipeline::run_incremental() { return run(true); }

RunReport Pipeline::run(bool require_checkpoint) {
    RunLock lock(config_.index);

    auto checkpoint = Checkpoint::load(config_.checkpoint);
    if (require_checkpoint && !checkpoint)
        throw PipelineError("no-checkpoint", "incremental run needs an existing checkpoint at " + config_.checkpoint);
    Checkpoint cp = checkpoint.value_or(Checkpoint{});

    auto parts = build_components(config_, oracle_override_);
    FacetIndex index;
    open_index(index, config_.index);

    LineLog parse_log(config_.parse_errors_log);
    LineLog drop_log(config_.drops_log);

    RunReport report;
    const std::uint64_t calls_before = parts->gene_indexer->oracle_calls();

    for (const std::string& name : list_with_retry(config_, cp.watermark())) {
        const std::string bytes = fetch_with_retry(config_, name);

        Checkpoint::Batch done{name, 0, 0, 0};
        std::vector<PubMedRecord> chunk;
        chunk.reserve(config_.queue_capacity);

        auto flush = [&] {
            if (chunk.empty())
                return;
            EnrichedChunk enriched = parts->enricher->enrich_parallel(chunk, config_.workers);
            for (auto& r : enriched.records)
                index.upsert(std::move(r));
            for (const auto& d : enriched.drops)
                drop_log.write(to_json_line(d));
            done.upserts += chunk.size();
            chunk.clear();
        };

        std::istringstream in(bytes);
        const BatchStats stats = parse_batch(
            in, name,
            [&](RecordEvent&& ev) {
                if (ev.kind() == EventKind::Upsert) {
                    chunk.push_back(std::move(ev.record()));
                    if (chunk.size() >= config_.queue_capacity)
                        flush();
                } else {
                    flush();
                    index.remove(ev.pmid());
                    ++done.deletes;
                }
            },
            [&](const ParseError& e) { parse_log.write(to_json_line(e)); });
        flush();
        parse_log.flush();
        drop_log.flush();
        done.parse_errors = stats.errors;

        index.set_watermark(name);
        index.snapshot(config_.index);
        if (hooks_.after_index_commit)
            hooks_.after_index_commit(name);

        cp.batches.push_back(done);
        cp.oracle_calls += parts->gene_indexer->oracle_calls() - calls_before - report.oracle_calls;
        report.oracle_calls = parts->gene_indexer->oracle_calls() - calls_before;
        cp.save(config_.checkpoint);
        if (hooks_.after_checkpoint)
            hooks_.after_checkpoint(name);

        ++report.batches;
        report.upserts += done.upserts;
        report.deletes += done.deletes;
        report.parse_errors += done.parse_errors;
        report.citations += stats.citations;
        report.processed.push_back(name);
    }

    // A run with nothing to do still leaves a checkpoint behind.
    if (!checkpoint)
        cp.save(config_.checkpoint);
    return report;
}

Pipeline::ReplayReport Pipeline::replay_drops(const std::string& drops_path) {
    RunLock lock(config_.index);
    std::ifstream in(drops_path);
    if (!in)
        throw FileNotFoundError(drops_path);

    ReplayReport report;
    std::set<Pmid> pmids;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        pmids.insert(dropped_candidate_from_json(line).pmid);
        ++report.candidates;
    }
    in.close();

    auto parts = build_components(config_, oracle_override_);
    FacetIndex index;
    open_index(index, config_.index);

    std::vector<DroppedCandidate> still;
    for (Pmid p : pmids) {
        auto stored = index.get(p);
        if (!stored)
            continue;  // deleted since it was logged
        ++report.records;
        index.upsert(parts->enricher->enrich(stored->record, [&](const DroppedCandidate& d) { still.push_back(d); }));
    }
    index.snapshot(config_.index);

    const std::string tmp = drops_path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        for (const auto& d : still)
            out << to_json_line(d) << '\n';
    }
    fs::rename(tmp, drops_path);
    report.still_dropped = still.size();
    return report;
}

RunReport run_full(const PipelineConfig& config) { return Pipeline(config).run_full(); }

RunReport run_incremental(const PipelineConfig& config) { return Pipeline(config).run_incremental(); }

}  // namespace qibitz
