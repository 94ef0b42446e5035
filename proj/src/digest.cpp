#include "qibitz/digest.hpp"

#include <openssl/evp.h>

#include <array>
#include <stdexcept>

namespace qibitz {

namespace {

std::string to_hex(const unsigned char* data, unsigned int len) {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(kDigits[data[i] >> 4]);
        out.push_back(kDigits[data[i] & 0x0f]);
    }
    return out;
}

std::string evp_digest(const EVP_MD* md, std::string_view bytes) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> buf{};
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), buf.data(), &len, md, nullptr) != 1)
        throw std::runtime_error("digest computation failed");
    return to_hex(buf.data(), len);
}

}  // namespace

std::string sha256_hex(std::string_view bytes) { return evp_digest(EVP_sha256(), bytes); }

std::string md5_hex(std::string_view bytes) { return evp_digest(EVP_md5(), bytes); }

Sha256::Sha256() : ctx_(EVP_MD_CTX_new()) {
    if (ctx_ == nullptr || EVP_DigestInit_ex(static_cast<EVP_MD_CTX*>(ctx_), EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256 init failed");
}

Sha256::~Sha256() { EVP_MD_CTX_free(static_cast<EVP_MD_CTX*>(ctx_)); }

void Sha256::update(std::string_view bytes) {
    EVP_DigestUpdate(static_cast<EVP_MD_CTX*>(ctx_), bytes.data(), bytes.size());
}

std::string Sha256::hex_final() {
    std::array<unsigned char, EVP_MAX_MD_SIZE> buf{};
    unsigned int len = 0;
    EVP_DigestFinal_ex(static_cast<EVP_MD_CTX*>(ctx_), buf.data(), &len);
    return to_hex(buf.data(), len);
}

}  // namespace qibitz
