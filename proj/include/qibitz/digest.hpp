#pragma once

#include <span>
#include <string>
#include <string_view>

namespace qibitz {

/// Lowercase hex SHA-256 of the given bytes.
std::string sha256_hex(std::string_view bytes);

/// Lowercase hex MD5, used only to verify NLM sidecar checksums.
std::string md5_hex(std::string_view bytes);

/// Incremental SHA-256 for digests over large or streamed content.
class Sha256 {
public:
    Sha256();
    ~Sha256();
    Sha256(const Sha256&) = delete;
    Sha256& operator=(const Sha256&) = delete;

    void update(std::string_view bytes);
    std::string hex_final();

private:
    void* ctx_;
};

}  // namespace qibitz
