#pragma once

#include "qibitz/gene_indexer.hpp"

#include <atomic>
#include <fstream>
#include <memory>
#include <mutex>
#include <semaphore>
#include <string>
#include <unordered_map>

namespace qibitz {

/// Deterministic test double: a TSV of `digest<TAB>verdict` rows, where digest
/// is request_digest() of the request. Unknown digests are indeterminate.
class TableDisambiguator : public Disambiguator {
public:
    TableDisambiguator() = default;
    explicit TableDisambiguator(std::unordered_map<std::string, std::string> table) : table_(std::move(table)) {}
    TableDisambiguator(TableDisambiguator&& other) noexcept
        : table_(std::move(other.table_)), calls_(other.calls_.load()) {}
    static TableDisambiguator from_file(const std::string& path);

    void set(const DisambiguationRequest& req, std::string reply) { table_[request_digest(req)] = std::move(reply); }

    Verdict verdict(const DisambiguationRequest& req) override;
    std::uint64_t calls() const { return calls_.load(); }

private:
    std::unordered_map<std::string, std::string> table_;
    std::atomic<std::uint64_t> calls_{0};
};

/// Memoizes determinate verdicts by request digest, optionally persisted to a
/// file in the same TSV format TableDisambiguator reads. Indeterminate replies
/// are not cached so a later run can retry them.
class CachingDisambiguator : public Disambiguator {
public:
    explicit CachingDisambiguator(Disambiguator& inner, std::string cache_path = {});

    Verdict verdict(const DisambiguationRequest& req) override;

    std::uint64_t hits() const { return hits_.load(); }
    std::uint64_t misses() const { return misses_.load(); }
    std::size_t size() const;

private:
    Disambiguator* inner_;
    std::string cache_path_;
    mutable std::mutex mu_;
    std::unordered_map<std::string, bool> cache_;
    std::ofstream append_;
    std::atomic<std::uint64_t> hits_{0};
    std::atomic<std::uint64_t> misses_{0};
};

struct HttpOracleConfig {
    std::string url;  // full endpoint URL, e.g. http://localhost:8080/v1/completions
    std::string model;
    int timeout_ms = 30000;
    int max_in_flight = 4;
    std::string token_env;  // environment variable holding a bearer token, optional
};

/// Remote completion endpoint. POSTs {model, temperature: 0, prompt} and feeds
/// the reply text to parse_verdict. At most `max_in_flight` requests run at once.
class HttpCompletionDisambiguator : public Disambiguator {
public:
    explicit HttpCompletionDisambiguator(HttpOracleConfig config);

    Verdict verdict(const DisambiguationRequest& req) override;

    /// Request body for a prompt; exposed for tests.
    static std::string request_body(const std::string& model, const std::string& prompt);
    /// Reply text from common completion response shapes; nullopt if none.
    static std::optional<std::string> reply_text(const std::string& body);

private:
    HttpOracleConfig config_;
    std::string scheme_host_;
    std::string path_;
    std::counting_semaphore<> in_flight_;
};

/// Used when no oracle is configured: every call fails, so semantic
/// candidates land in the drop log for later replay.
class UnavailableDisambiguator : public Disambiguator {
public:
    Verdict verdict(const DisambiguationRequest&) override { throw OracleUnavailable("no oracle configured"); }
};

}  // namespace qibitz
