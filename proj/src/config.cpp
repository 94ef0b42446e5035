#include "qibitz/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>

namespace fs = std::filesystem;

namespace qibitz {

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

std::string unquote(const std::string& v, std::size_t line_no) {
    if (v.size() >= 2 && v.front() == '"') {
        if (v.back() != '"')
            throw ConfigError("line " + std::to_string(line_no) + ": unterminated string");
        return v.substr(1, v.size() - 2);
    }
    // Bare values may carry a trailing comment.
    const auto hash = v.find(" #");
    return trim(hash == std::string::npos ? v : v.substr(0, hash));
}

long long to_int(const std::string& key, const std::string& v) {
    long long out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size())
        throw ConfigError(key + ": expected an integer, got '" + v + "'");
    return out;
}

std::string resolve(const fs::path& base, const std::string& v) {
    if (v.empty() || base.empty() || v.find("://") != std::string::npos)
        return v;
    const fs::path p(v);
    return p.is_absolute() ? v : (base / p).lexically_normal().string();
}

/// Keeps the inner disambiguator alive beneath the cache.
class OwningCache : public Disambiguator {
public:
    OwningCache(std::unique_ptr<Disambiguator> inner, const std::string& path)
        : inner_(std::move(inner)), cache_(*inner_, path) {}
    Verdict verdict(const DisambiguationRequest& req) override { return cache_.verdict(req); }

private:
    std::unique_ptr<Disambiguator> inner_;
    CachingDisambiguator cache_;
};

}  // namespace

void PipelineConfig::validate() const {
    if (archive.location.empty())
        throw ConfigError("archive is required");
    if (drug_vocabulary.empty() || gene_vocabulary.empty())
        throw ConfigError("drug_vocabulary and gene_vocabulary are required");
    if (index.empty() || checkpoint.empty())
        throw ConfigError("index and checkpoint are required");
    if (workers < 1)
        throw ConfigError("workers must be >= 1");
    if (queue_capacity < 1)
        throw ConfigError("queue_capacity must be >= 1");
    if (fetch_attempts < 1)
        throw ConfigError("fetch_attempts must be >= 1");
    std::set<std::string> outputs;
    for (const std::string* p : {&index, &checkpoint, &drops_log, &parse_errors_log}) {
        if (p->empty())
            continue;
        if (!outputs.insert(fs::path(*p).lexically_normal().string()).second)
            throw ConfigError("output paths must be distinct: " + *p);
    }
    if (oracle.mode != "none" && oracle.mode != "table" && oracle.mode != "http")
        throw ConfigError("oracle.mode must be none, table or http");
    if (oracle.mode == "table" && oracle.table.empty())
        throw ConfigError("oracle.table is required when oracle.mode = table");
    if (oracle.mode == "http" && (oracle.http.url.empty() || oracle.http.model.empty()))
        throw ConfigError("oracle.url and oracle.model are required when oracle.mode = http");
}

PipelineConfig parse_pipeline_config(std::istream& in, const fs::path& base_dir) {
    PipelineConfig c;
    using Setter = std::function<void(const std::string&)>;
    auto path_of = [&](std::string& field) -> Setter { return [&, base_dir](const std::string& v) { field = resolve(base_dir, v); }; };
    auto int_of = [](auto& field, const std::string& key) -> Setter {
        return [&field, key](const std::string& v) { field = static_cast<std::remove_reference_t<decltype(field)>>(to_int(key, v)); };
    };
    const std::map<std::string, Setter> setters = {
        {"archive", [&](const std::string& v) { c.archive.location = resolve(base_dir, v); }},
        {"drug_vocabulary", path_of(c.drug_vocabulary)},
        {"gene_vocabulary", path_of(c.gene_vocabulary)},
        {"context_lexicon", path_of(c.context_lexicon)},
        {"index", path_of(c.index)},
        {"checkpoint", path_of(c.checkpoint)},
        {"drops_log", path_of(c.drops_log)},
        {"parse_errors_log", path_of(c.parse_errors_log)},
        {"workers", int_of(c.workers, "workers")},
        {"queue_capacity", int_of(c.queue_capacity, "queue_capacity")},
        {"fetch_attempts", int_of(c.fetch_attempts, "fetch_attempts")},
        {"retry_backoff_ms", int_of(c.retry_backoff_ms, "retry_backoff_ms")},
        {"oracle.mode", [&](const std::string& v) { c.oracle.mode = v; }},
        {"oracle.table", path_of(c.oracle.table)},
        {"oracle.cache", path_of(c.oracle.cache)},
        {"oracle.url", [&](const std::string& v) { c.oracle.http.url = v; }},
        {"oracle.model", [&](const std::string& v) { c.oracle.http.model = v; }},
        {"oracle.timeout_ms", int_of(c.oracle.http.timeout_ms, "oracle.timeout_ms")},
        {"oracle.max_in_flight", int_of(c.oracle.http.max_in_flight, "oracle.max_in_flight")},
        {"oracle.token_env", [&](const std::string& v) { c.oracle.http.token_env = v; }},
    };

    std::string line;
    std::string section;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t.front() == '#')
            continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw ConfigError("line " + std::to_string(line_no) + ": bad section header");
            section = trim(std::string_view(t).substr(1, t.size() - 2));
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        std::string key = trim(std::string_view(t).substr(0, eq));
        if (!section.empty())
            key = section + "." + key;
        const std::string value = unquote(trim(std::string_view(t).substr(eq + 1)), line_no);
        auto it = setters.find(key);
        if (it == setters.end())
            throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        it->second(value);
    }
    return c;
}

PipelineConfig load_pipeline_config(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw FileNotFoundError(path);
    return parse_pipeline_config(in, fs::absolute(path).parent_path());
}

std::unique_ptr<Disambiguator> make_disambiguator(const OracleSettings& settings) {
    std::unique_ptr<Disambiguator> base;
    if (settings.mode == "table")
        base = std::make_unique<TableDisambiguator>(TableDisambiguator::from_file(settings.table));
    else if (settings.mode == "http")
        base = std::make_unique<HttpCompletionDisambiguator>(settings.http);
    else
        base = std::make_unique<UnavailableDisambiguator>();
    if (settings.cache.empty())
        return base;
    return std::make_unique<OwningCache>(std::move(base), settings.cache);
}

}  // namespace qibitz
