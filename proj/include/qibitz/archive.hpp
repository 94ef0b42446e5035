#pragma once

#include "qibitz/errors.hpp"

#include <optional>
#include <string>
#include <vector>

namespace qibitz {

class ChecksumError : public Error {
public:
    explicit ChecksumError(const std::string& message) : Error("checksum-mismatch", message) {}
};

/// Where batch files live: a local directory (plain path or file://) or an
/// http(s):// directory listing.
struct ArchiveLocator {
    std::string location;

    bool is_remote() const;
    std::string local_path() const;
};

/// Batch file names (`*.xml.gz`) sorted lexicographically, keeping only those
/// strictly after `since` when given.
std::vector<std::string> list_remote_batches(const ArchiveLocator& archive,
                                             const std::optional<std::string>& since = std::nullopt);

/// Raw compressed bytes of one batch. When a `<name>.md5` sidecar exists its
/// digest is checked; a mismatch throws ChecksumError. An unreachable archive
/// throws RetryableError.
std::string fetch_batch(const ArchiveLocator& archive, const std::string& name);

/// Extracts the 32-hex-digit digest from an NLM-style `MD5(file)= <hex>` or
/// `md5sum` line. Empty when none is present.
std::string parse_md5_sidecar(const std::string& content);

}  // namespace qibitz
