#pragma once

#include "qibitz/enrichment.hpp"
#include "qibitz/errors.hpp"

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace qibitz {

inline constexpr std::size_t kMaxPageSize = 500;

/// A filtered search. Values are OR-ed within one facet, facets are AND-ed.
struct FacetQuery {
    std::string text;  // AND of case-insensitive terms over title + abstract
    std::vector<std::string> drugs;
    std::vector<std::string> genes;
    std::vector<std::string> mesh;
    std::optional<int> year_min;
    std::optional<int> year_max;
    std::size_t page = 0;
    std::size_t page_size = 20;
    std::size_t facet_limit = 50;

    /// Throws QueryError on out-of-range pagination or inverted year bounds.
    void validate() const;
};

struct FacetValue {
    std::string value;
    std::size_t count = 0;

    bool operator==(const FacetValue&) const = default;
};

struct Hit {
    Pmid pmid = 0;
    std::string title;
    std::optional<int> year;
    std::vector<std::string> drugs;
    std::vector<std::string> genes;

    bool operator==(const Hit&) const = default;
};

/// Facet names used in results: drugs, genes, mesh, years.
struct FacetResult {
    std::size_t total = 0;
    std::vector<Hit> hits;
    std::map<std::string, std::vector<FacetValue>> facets;

    bool operator==(const FacetResult&) const = default;
};

/// Raw per-value counts over a set of records.
struct FacetCounts {
    std::unordered_map<std::string, std::size_t> drugs;
    std::unordered_map<std::string, std::size_t> genes;
    std::unordered_map<std::string, std::size_t> mesh;
    std::map<int, std::size_t> years;

    bool operator==(const FacetCounts&) const = default;
};

/// Reference counting kernel.
FacetCounts count_facets_serial(std::span<const EnrichedRecord* const> records);
/// OpenMP kernel: per-thread partial counts merged at the end.
FacetCounts count_facets_parallel(std::span<const EnrichedRecord* const> records, int threads);

/// Counts sorted by count descending then value ascending, cut to `limit`.
std::map<std::string, std::vector<FacetValue>> rank_facets(const FacetCounts& counts, std::size_t limit);

class SnapshotError : public Error {
public:
    explicit SnapshotError(const std::string& message) : Error("snapshot", message) {}
};

/// In-memory faceted index over enriched records, keyed by PMID.
///
/// Readers take a shared lock for the whole query, writers an exclusive one,
/// so a query never observes a half-applied upsert.
class FacetIndex {
public:
    FacetIndex() = default;
    FacetIndex(const FacetIndex&) = delete;
    FacetIndex& operator=(const FacetIndex&) = delete;

    /// Inserts or replaces the record with the same PMID.
    void upsert(EnrichedRecord record);
    /// True when the PMID was present.
    bool remove(Pmid pmid);

    FacetResult search(const FacetQuery& query) const;
    std::optional<EnrichedRecord> get(Pmid pmid) const;

    std::size_t size() const;
    std::vector<Pmid> pmids() const;

    /// Name of the last batch whose effects the index holds.
    std::string watermark() const;
    void set_watermark(std::string watermark);

    /// SHA-256 over the canonical serialization of every record, by PMID.
    std::string digest() const;

    /// Writes manifest.json and segments/*.jsonl. The directory is replaced
    /// as a whole; a reader never sees a mix of old and new files.
    void snapshot(const std::filesystem::path& dir) const;
    /// Replaces the contents with a snapshot. Throws SnapshotError when the
    /// manifest is missing or any segment digest disagrees.
    void restore(const std::filesystem::path& dir);

    /// Threads used for facet counting on large result sets.
    void set_count_threads(int threads) { count_threads_ = threads; }

private:
    struct State {
        std::unordered_map<Pmid, std::shared_ptr<const EnrichedRecord>> records;
        std::unordered_map<std::string, std::vector<Pmid>> drugs;
        std::unordered_map<std::string, std::vector<Pmid>> genes;
        std::unordered_map<std::string, std::vector<Pmid>> mesh;
        std::unordered_map<std::string, std::vector<Pmid>> terms;
        std::vector<Pmid> all;
        std::string watermark;

        void add(const std::shared_ptr<const EnrichedRecord>& r);
        void drop(const EnrichedRecord& r);
    };

    std::string digest_locked() const;

    mutable std::shared_mutex mu_;
    State state_;
    int count_threads_ = 0;  // 0: OpenMP default
};

/// Distinct lowercase search terms of a record's title and abstract.
std::vector<std::string> record_terms(const PubMedRecord& record);

}  // namespace qibitz
