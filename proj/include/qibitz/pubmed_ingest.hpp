#pragma once

#include "qibitz/errors.hpp"
#include "qibitz/pubmed_record.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qibitz {

/// Fatal, whole-batch failure (corrupt or truncated gzip).
class BatchError : public Error {
public:
    explicit BatchError(const std::string& message) : Error("batch-corrupt", message) {}
};

/// A single citation that could not be parsed. `offset` is the byte offset of
/// the citation element in the decompressed document.
struct ParseError {
    std::string batch;
    std::uint64_t offset = 0;
    std::optional<Pmid> pmid;
    std::string message;
};

std::string to_json_line(const ParseError& e);

/// The four places a publication year can hide, as raw strings.
struct YearSources {
    std::optional<std::string> pub_date_year;    // JournalIssue/PubDate/Year
    std::optional<std::string> medline_date;     // JournalIssue/PubDate/MedlineDate
    std::optional<std::string> article_date;     // ArticleDate/Year
    std::optional<std::string> date_completed;   // DateCompleted/Year
};

/// First usable year in the order listed in YearSources. MedlineDate strings
/// contribute their first four-digit run that is a plausible year.
std::optional<int> extract_year(const YearSources& sources);

struct BatchStats {
    std::size_t citations = 0;  // citation elements seen, parsed or not
    std::size_t upserts = 0;
    std::size_t deletes = 0;
    std::size_t errors = 0;
};

using EventSink = std::function<void(RecordEvent&&)>;
using ParseErrorSink = std::function<void(const ParseError&)>;

/// Streams a gzip-compressed PubMed batch. Emits one upsert per citation in
/// document order, then the deletes. A malformed citation is reported to
/// `on_error` and skipped. Throws BatchError on a corrupt gzip stream.
BatchStats parse_batch(std::istream& compressed, std::string_view batch_name, const EventSink& on_event,
                       const ParseErrorSink& on_error = {});

struct ParsedBatch {
    std::vector<RecordEvent> events;
    std::vector<ParseError> errors;
    BatchStats stats;
};

ParsedBatch parse_batch_bytes(std::string_view compressed, std::string_view batch_name = "");

/// Parses one <PubmedArticle> element. Throws std::runtime_error on bad XML.
PubMedRecord parse_citation_xml(std::string_view xml);

std::string gzip_compress(std::string_view bytes);

}  // namespace qibitz
