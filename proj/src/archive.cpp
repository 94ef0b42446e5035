#include "qibitz/archive.hpp"

#include "qibitz/digest.hpp"

#include <httplib.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

namespace fs = std::filesystem;

namespace qibitz {

namespace {

bool starts_with(const std::string& s, std::string_view prefix) { return s.rfind(prefix, 0) == 0; }

bool ends_with(const std::string& s, std::string_view suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

struct RemoteParts {
    std::string origin;  // scheme://host[:port]
    std::string path;    // always ends with '/'
};

RemoteParts split_remote(const std::string& url) {
    const auto scheme_end = url.find("://");
    const auto path_start = url.find('/', scheme_end + 3);
    RemoteParts parts;
    parts.origin = url.substr(0, path_start);
    parts.path = path_start == std::string::npos ? "/" : url.substr(path_start);
    if (parts.path.back() != '/')
        parts.path.push_back('/');
    return parts;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in)
        throw IoError("cannot read " + p.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

httplib::Result http_get(const RemoteParts& parts, const std::string& name) {
    httplib::Client client(parts.origin);
    client.set_connection_timeout(10);
    client.set_read_timeout(120);
    client.set_follow_location(true);
    return client.Get(parts.path + name);
}

std::string remote_get(const RemoteParts& parts, const std::string& name, bool allow_missing, bool& missing) {
    auto res = http_get(parts, name);
    if (!res)
        throw RetryableError("unreachable", "cannot reach " + parts.origin + ": " + httplib::to_string(res.error()));
    if (res->status == 404 && allow_missing) {
        missing = true;
        return {};
    }
    if (res->status >= 500)
        throw RetryableError("unreachable", "server error " + std::to_string(res->status) + " for " + name);
    if (res->status != 200)
        throw Error("batch-missing", "HTTP " + std::to_string(res->status) + " for " + parts.path + name);
    missing = false;
    return res->body;
}

void verify(const std::string& name, const std::string& bytes, const std::string& sidecar) {
    const std::string expected = parse_md5_sidecar(sidecar);
    if (expected.empty())
        return;
    const std::string actual = md5_hex(bytes);
    if (actual != expected)
        throw ChecksumError(name + ": md5 " + actual + " does not match published " + expected);
}

}  // namespace

bool ArchiveLocator::is_remote() const { return starts_with(location, "http://") || starts_with(location, "https://"); }

std::string ArchiveLocator::local_path() const {
    return starts_with(location, "file://") ? location.substr(7) : location;
}

std::string parse_md5_sidecar(const std::string& content) {
    static const std::regex hex32("([0-9a-fA-F]{32})");
    std::smatch m;
    if (!std::regex_search(content, m, hex32))
        return {};
    std::string digest = m[1];
    std::transform(digest.begin(), digest.end(), digest.begin(), [](unsigned char c) { return std::tolower(c); });
    return digest;
}

std::vector<std::string> list_remote_batches(const ArchiveLocator& archive, const std::optional<std::string>& since) {
    std::set<std::string> names;
    if (archive.is_remote()) {
        bool missing = false;
        const auto parts = split_remote(archive.location);
        const std::string listing = remote_get(parts, "", false, missing);
        static const std::regex href(R"re(href="([^"/?#]+\.xml\.gz)")re");
        for (auto it = std::sregex_iterator(listing.begin(), listing.end(), href); it != std::sregex_iterator(); ++it)
            names.insert((*it)[1]);
    } else {
        const fs::path dir = archive.local_path();
        std::error_code ec;
        if (!fs::is_directory(dir, ec))
            throw RetryableError("unreachable", "archive directory not found: " + dir.string());
        for (const auto& entry : fs::directory_iterator(dir)) {
            const std::string name = entry.path().filename().string();
            if (entry.is_regular_file() && ends_with(name, ".xml.gz"))
                names.insert(name);
        }
    }
    std::vector<std::string> out;
    for (const auto& n : names) {
        if (!since || n > *since)
            out.push_back(n);
    }
    return out;
}

std::string fetch_batch(const ArchiveLocator& archive, const std::string& name) {
    if (archive.is_remote()) {
        const auto parts = split_remote(archive.location);
        bool missing = false;
        std::string bytes = remote_get(parts, name, false, missing);
        const std::string sidecar = remote_get(parts, name + ".md5", true, missing);
        if (!missing)
            verify(name, bytes, sidecar);
        return bytes;
    }
    const fs::path dir = archive.local_path();
    const fs::path file = dir / name;
    std::error_code ec;
    if (!fs::is_directory(dir, ec))
        throw RetryableError("unreachable", "archive directory not found: " + dir.string());
    if (!fs::is_regular_file(file, ec))
        throw Error("batch-missing", "no such batch: " + file.string());
    std::string bytes = read_file(file);
    const fs::path sidecar = dir / (name + ".md5");
    if (fs::is_regular_file(sidecar, ec))
        verify(name, bytes, read_file(sidecar));
    return bytes;
}

}  // namespace qibitz
