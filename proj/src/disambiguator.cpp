#include "qibitz/disambiguator.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <cstdlib>

namespace qibitz {

namespace {

std::unordered_map<std::string, std::string> read_table(const std::string& path, bool must_exist) {
    std::unordered_map<std::string, std::string> table;
    std::ifstream in(path);
    if (!in) {
        if (must_exist)
            throw FileNotFoundError(path);
        return table;
    }
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty() || line.front() == '#')
            continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos)
            continue;
        table[line.substr(0, tab)] = line.substr(tab + 1);
    }
    return table;
}

}  // namespace

TableDisambiguator TableDisambiguator::from_file(const std::string& path) {
    return TableDisambiguator(read_table(path, true));
}

Verdict TableDisambiguator::verdict(const DisambiguationRequest& req) {
    calls_.fetch_add(1);
    auto it = table_.find(request_digest(req));
    if (it == table_.end())
        return Verdict::unclear("");
    return parse_verdict(it->second);
}

CachingDisambiguator::CachingDisambiguator(Disambiguator& inner, std::string cache_path)
    : inner_(&inner), cache_path_(std::move(cache_path)) {
    if (cache_path_.empty())
        return;
    for (const auto& [digest, reply] : read_table(cache_path_, false)) {
        const Verdict v = parse_verdict(reply);
        if (v.kind != Verdict::Kind::Indeterminate)
            cache_[digest] = v.kind == Verdict::Kind::True;
    }
    append_.open(cache_path_, std::ios::app);
    if (!append_)
        throw IoError("cannot open oracle cache " + cache_path_);
}

Verdict CachingDisambiguator::verdict(const DisambiguationRequest& req) {
    const std::string digest = request_digest(req);
    {
        std::lock_guard lock(mu_);
        if (auto it = cache_.find(digest); it != cache_.end()) {
            hits_.fetch_add(1);
            return it->second ? Verdict::yes() : Verdict::no();
        }
    }
    misses_.fetch_add(1);
    Verdict v = inner_->verdict(req);
    if (v.kind == Verdict::Kind::Indeterminate)
        return v;
    std::lock_guard lock(mu_);
    const bool value = v.kind == Verdict::Kind::True;
    if (cache_.emplace(digest, value).second && append_.is_open()) {
        append_ << digest << '\t' << (value ? "true" : "false") << '\n';
        append_.flush();
    }
    return v;
}

std::size_t CachingDisambiguator::size() const {
    std::lock_guard lock(mu_);
    return cache_.size();
}

// ---------------------------------------------------------------------------
// HTTP client

HttpCompletionDisambiguator::HttpCompletionDisambiguator(HttpOracleConfig config)
    : config_(std::move(config)), in_flight_(std::max(1, config_.max_in_flight)) {
    const auto scheme_end = config_.url.find("://");
    if (scheme_end == std::string::npos)
        throw ConfigError("oracle url must be http:// or https://: " + config_.url);
    const auto path_start = config_.url.find('/', scheme_end + 3);
    scheme_host_ = config_.url.substr(0, path_start);
    path_ = path_start == std::string::npos ? "/" : config_.url.substr(path_start);
}

std::string HttpCompletionDisambiguator::request_body(const std::string& model, const std::string& prompt) {
    nlohmann::json j = {{"model", model}, {"temperature", 0}, {"prompt", prompt}};
    return j.dump();
}

std::optional<std::string> HttpCompletionDisambiguator::reply_text(const std::string& body) {
    const auto j = nlohmann::json::parse(body, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        return std::nullopt;
    if (j.contains("text") && j["text"].is_string())
        return j["text"].get<std::string>();
    if (j.contains("response") && j["response"].is_string())
        return j["response"].get<std::string>();
    if (j.contains("choices") && j["choices"].is_array() && !j["choices"].empty()) {
        const auto& c = j["choices"][0];
        if (c.contains("text") && c["text"].is_string())
            return c["text"].get<std::string>();
        if (c.contains("message") && c["message"].contains("content") && c["message"]["content"].is_string())
            return c["message"]["content"].get<std::string>();
    }
    return std::nullopt;
}

Verdict HttpCompletionDisambiguator::verdict(const DisambiguationRequest& req) {
    in_flight_.acquire();
    struct Release {
        std::counting_semaphore<>& s;
        ~Release() { s.release(); }
    } release{in_flight_};

    httplib::Client client(scheme_host_);
    const auto secs = config_.timeout_ms / 1000;
    const auto usecs = (config_.timeout_ms % 1000) * 1000;
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);
    httplib::Headers headers;
    if (!config_.token_env.empty()) {
        if (const char* token = std::getenv(config_.token_env.c_str()); token && *token)
            headers.emplace("Authorization", std::string("Bearer ") + token);
    }
    auto res = client.Post(path_, headers, request_body(config_.model, render_prompt(req)), "application/json");
    if (!res)
        throw OracleUnavailable("oracle request failed: " + httplib::to_string(res.error()));
    if (res->status != 200)
        throw OracleUnavailable("oracle returned HTTP " + std::to_string(res->status));
    auto text = reply_text(res->body);
    if (!text)
        return Verdict::unclear(res->body);
    return parse_verdict(*text);
}

}  // namespace qibitz
