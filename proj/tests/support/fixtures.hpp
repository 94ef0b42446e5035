#pragma once

#include "qibitz/config.hpp"
#include "qibitz/gene_indexer.hpp"
#include "qibitz/pubmed_record.hpp"
#include "qibitz/vocabulary.hpp"

#include <atomic>
#include <filesystem>
#include <map>
#include <mutex>
#include <string>
#include <vector>

namespace qibitz::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

std::string data_path(const std::string& relative);
std::string fixture_path(const std::string& relative);
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& bytes);

const DrugVocabulary& sample_drugs();
const GeneVocabulary& sample_genes();

/// Answers by symbol with a fixed reply string, counting every call and
/// keeping the requests it saw.
class ScriptedOracle : public Disambiguator {
public:
    ScriptedOracle() = default;
    ScriptedOracle(std::initializer_list<std::pair<const std::string, std::string>> replies) : replies_(replies) {}

    void set_reply(const std::string& symbol, std::string reply) { replies_[symbol] = std::move(reply); }
    Verdict verdict(const DisambiguationRequest& req) override;

    std::size_t calls() const { return calls_.load(); }
    std::vector<DisambiguationRequest> requests() const;

private:
    std::map<std::string, std::string> replies_;
    std::atomic<std::size_t> calls_{0};
    mutable std::mutex mu_;
    std::vector<DisambiguationRequest> requests_;
};

PubMedRecord text_record(Pmid pmid, std::string title, std::string abstract = {});

/// A throwaway archive plus index, checkpoint and log paths for pipeline runs.
class PipelineSandbox {
public:
    PipelineSandbox();

    void write_batch(const std::string& name, const std::vector<PubMedRecord>& upserts,
                     const std::vector<Pmid>& deletes = {});
    void write_raw_batch(const std::string& name, const std::string& xml);

    /// Config over the sample vocabularies with the oracle disabled.
    PipelineConfig config(int workers = 1, std::size_t queue_capacity = 1024) const;

    std::filesystem::path archive() const { return dir_ / "archive"; }
    std::filesystem::path root() const { return dir_.path(); }

private:
    TempDir dir_;
};

}  // namespace qibitz::testing
