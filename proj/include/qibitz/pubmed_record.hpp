#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace qibitz {

using Pmid = std::uint64_t;

inline constexpr int kMinYear = 1800;
inline constexpr int kMaxYear = 2100;

/// One parsed citation. Field comments give the MEDLINE tag they carry.
struct PubMedRecord {
    Pmid pmid = 0;
    std::string title;                             // TI
    std::string abstract;                          // AB
    std::vector<std::string> other_terms;          // OT
    std::vector<std::string> mesh_descriptors;     // MH, descriptor UIs
    std::vector<std::string> substance_names;      // NM, descriptor UIs
    std::vector<std::string> registry_numbers;     // RN
    std::vector<std::string> legacy_gene_symbols;  // GS
    std::optional<int> pub_year;
    std::optional<std::string> journal;
    std::vector<std::string> authors;
    std::int64_t revision = 0;  // DateRevised as YYYYMMDD, 0 when absent

    bool operator==(const PubMedRecord&) const = default;
};

enum class EventKind { Upsert, Delete };

/// Upsert carries a full record; delete carries only the PMID.
class RecordEvent {
public:
    static RecordEvent upsert(PubMedRecord record) { return RecordEvent(std::move(record)); }
    static RecordEvent remove(Pmid pmid) { return RecordEvent(pmid); }

    EventKind kind() const { return std::holds_alternative<PubMedRecord>(payload_) ? EventKind::Upsert : EventKind::Delete; }
    Pmid pmid() const {
        return kind() == EventKind::Upsert ? std::get<PubMedRecord>(payload_).pmid : std::get<Pmid>(payload_);
    }
    const PubMedRecord& record() const { return std::get<PubMedRecord>(payload_); }
    PubMedRecord& record() { return std::get<PubMedRecord>(payload_); }

    bool operator==(const RecordEvent&) const = default;

private:
    explicit RecordEvent(PubMedRecord r) : payload_(std::move(r)) {}
    explicit RecordEvent(Pmid p) : payload_(p) {}

    std::variant<PubMedRecord, Pmid> payload_;
};

}  // namespace qibitz
